"""Combinatorial Hubbard trees of strictly preperiodic quadratic parameters.

Points of the dendrite Julia set are modeled as co-landing classes of external
angles (equal itineraries relative to the parameter).  Betweenness is decided
on the circle: a class M separates A from B exactly when A and B occupy
different complementary arcs of M's angle set.  Branch points are discovered by
a triod iteration driven by the partition symbols.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

from . import angles as A
from .angles import STAR, Fraction as _F  # noqa: F401
from .errors import ConsistencyFailure, DepthExceeded, NotOnTree

AngleSet = tuple[Fraction, ...]


@dataclass(frozen=True, order=True)
class JuliaPoint:
    """A co-landing class of angles for a fixed parameter: a dendrite point."""

    parameter: Fraction
    angles: AngleSet

    @property
    def min_angle(self) -> Fraction:
        return self.angles[0]

    def to_json_dict(self) -> dict:
        return {"angles": [A.format_angle(t) for t in self.angles]}


class Dendrite:
    """Symbolic-dynamics context for one parameter: symbols, classes, triods.

    All methods are pure; results are memoized on the instance, so reuse one
    Dendrite per parameter when possible.
    """

    def __init__(self, theta: Fraction, triod_bound: int = 10_000):
        if not A.is_misiurewicz_angle(theta):
            raise ValueError(f"{A.format_angle(theta)} is not strictly preperiodic")
        self.theta = theta
        self.triod_bound = triod_bound
        self.low, self.high = A.partition_points(theta)
        self._class_cache: dict[Fraction, AngleSet] = {}
        self._triod_cache: dict = {}
        # class interning: small integer ids make state hashing and caching cheap
        self._ids: dict[AngleSet, int] = {}
        self._by_id: list[AngleSet] = []
        self._points: list[JuliaPoint] = []
        self._img: dict[int, int] = {}
        self._sym: dict[int, str] = {}
        self._loc: dict[tuple[int, int], int] = {}

    # -- symbols ---------------------------------------------------------

    def symbol(self, x: Fraction) -> str:
        if x == self.low or x == self.high:
            return STAR
        return "1" if self.low < x < self.high else "0"

    def class_id(self, cls: AngleSet) -> int:
        cid = self._ids.get(cls)
        if cid is None:
            cid = len(self._by_id)
            self._ids[cls] = cid
            self._by_id.append(cls)
            self._points.append(JuliaPoint(self.theta, cls))
            self._sym[cid] = self.symbol(cls[0])
        return cid

    def point_of_id(self, cid: int) -> JuliaPoint:
        return self._points[cid]

    def image_id(self, cid: int) -> int:
        out = self._img.get(cid)
        if out is None:
            cls = self._by_id[cid]
            img = self.class_of(A.double(cls[0]))
            if not {A.double(t) for t in cls} <= set(img):
                raise ConsistencyFailure("doubling did not map the class into one class")
            out = self.class_id(img)
            self._img[cid] = out
        return out

    def locate_ids(self, base: int, other: int) -> int:
        key = (base, other)
        out = self._loc.get(key)
        if out is None:
            out = self.locate(self._by_id[base], self._by_id[other])
            self._loc[key] = out
        return out

    def itinerary(self, x: Fraction) -> A.Itinerary:
        return A.itinerary(self.theta, x)

    # -- co-landing classes ----------------------------------------------

    def class_of(self, t: Fraction) -> AngleSet:
        """The full co-landing class of t, as a sorted angle tuple."""
        cached = self._class_cache.get(t)
        if cached is not None:
            return cached
        info = A.orbit(t)
        # resolve the periodic tail first, then pull classes back along the orbit
        base = info.orbit[info.preperiod]
        if base not in self._class_cache:
            self._class_cache[base] = self._periodic_class(base)
        for j in range(info.preperiod - 1, -1, -1):
            x = info.orbit[j]
            if x in self._class_cache:
                continue
            parent = self._class_cache[info.orbit[j + 1]]
            s = self.symbol(x)
            members = tuple(
                sorted(h for p in parent for h in A.halves(p) if self.symbol(h) == s)
            )
            if x not in members:
                raise ConsistencyFailure(f"class pullback lost {A.format_angle(x)}")
            self._class_cache[x] = members
        return self._class_cache[t]

    def _periodic_class(self, u: Fraction) -> AngleSet:
        """Class of a periodic angle: the full fiber of its periodic itinerary.

        Satellite-type points carry one transitive return-map cycle of rays,
        but primitive portraits (renormalizable parameters) split into several
        cycles sharing the itinerary, so the fiber is computed exactly: refine
        the symbol arcs until the count stabilizes, then contract each arc to
        its periodic point with the inverse branches.
        """
        it = self.itinerary(u)
        if it.preperiodic:
            raise ConsistencyFailure("periodic angle with preperiodic itinerary")
        word = it.periodic
        fiber = self._periodic_fiber(word)
        if u not in fiber:
            raise ConsistencyFailure("fiber computation lost the seed angle")
        return fiber

    def _inverse_branch(self, sym: str, x: Fraction) -> Fraction:
        for h in A.halves(x):
            s = self.symbol(h)
            if s == sym or s == STAR:
                return h
        raise ConsistencyFailure("no inverse branch matched")

    def _periodic_fiber(self, word: tuple[str, ...]) -> AngleSet:
        d = len(word)
        key = ("fiber", word)
        hit = self._triod_cache.get(key)
        if hit is not None:
            return hit

        # integer interval refinement over a growing power-of-two denominator
        L = self.low.denominator  # (theta+1)/2 has the same reduced denominator
        den = L
        low_n = self.low.numerator
        high_n = self.high.numerator * (L // self.high.denominator)
        arcs = [(0, den)]
        counts: list[int] = []
        for _ in range(4 * d + 64):
            for sym in reversed(word):
                den *= 2
                low_n *= 2
                high_n *= 2
                windows = (
                    ((low_n, high_n),)
                    if sym == "1"
                    else ((0, low_n), (high_n, den))
                )
                half = den // 2
                nxt = []
                for a, b in arcs:
                    for lo, hi in ((a, b), (a + half, b + half)):
                        for wa, wb in windows:
                            ia = lo if lo > wa else wa
                            ib = hi if hi < wb else wb
                            if ia < ib:
                                nxt.append((ia, ib))
                arcs = nxt
            if not arcs:
                raise ConsistencyFailure("itinerary word has empty fiber")
            counts.append(len(arcs))
            if (
                len(counts) >= 2
                and counts[-1] == counts[-2]
                and len(counts) >= counts[-1] + 2
            ):
                break
        else:
            raise DepthExceeded("fiber refinement did not stabilize")

        # arcs are narrower than half the grid spacing: round midpoints exactly
        found: set[Fraction] = set()
        for a, b in arcs:
            mid = Fraction(a + b, 2 * den)
            got = None
            for ell in range(1, len(arcs) + 1):
                grid = (1 << (d * ell)) - 1
                cand = Fraction(round(mid * grid) % grid, grid)
                cit = self.itinerary(cand)
                dd = len(cit.periodic)
                if (
                    not cit.preperiodic
                    and d % dd == 0
                    and all(word[i] == cit.periodic[i % dd] for i in range(d))
                ):
                    got = cand
                    break
            if got is None:
                raise DepthExceeded("fiber point extraction did not converge")
            found.add(got)
        # close under the d-fold doubling (shifting by a full word)
        frontier = list(found)
        while frontier:
            x = (frontier.pop() * (1 << d)) % 1
            if x not in found:
                found.add(x)
                frontier.append(x)
        fiber = tuple(sorted(found))
        self._triod_cache[key] = fiber
        return fiber

    def point(self, t: Fraction) -> JuliaPoint:
        return JuliaPoint(self.theta, self.class_of(t))

    @property
    def critical_class(self) -> JuliaPoint:
        """The critical point: the class of the two partition angles."""
        p = self.point(self.low)
        if p.angles != (self.low, self.high):
            raise ConsistencyFailure("critical class is not the partition pair")
        return p

    @property
    def critical_value(self) -> JuliaPoint:
        return self.point(self.theta)

    def image(self, p: JuliaPoint) -> JuliaPoint:
        """Image point under the map: the class containing the doubled angles."""
        return self._points[self.image_id(self.class_id(p.angles))]

    def postcritical(self) -> tuple[JuliaPoint, ...]:
        """Classes of the critical value orbit theta, 2*theta, ..., deduplicated."""
        out: list[JuliaPoint] = []
        for x in A.orbit(self.theta).orbit:
            p = self.point(x)
            if p not in out:
                out.append(p)
        return tuple(out)

    def critical_orbit(self) -> tuple[JuliaPoint, ...]:
        """The critical point together with the postcritical classes."""
        return (self.critical_class,) + self.postcritical()

    # -- circle order ----------------------------------------------------

    def sector_index(self, base: AngleSet, x: Fraction) -> int:
        """Index i such that x lies in the arc (base[i], base[i+1]) cyclically."""
        if x in base:
            raise ValueError("angle lies on the class itself")
        i = bisect.bisect_left(base, x)
        return (i - 1) % len(base)

    def locate(self, base: AngleSet, other: AngleSet) -> int:
        """Sector of `base` containing the whole class `other` (classes are unlinked)."""
        idx = {self.sector_index(base, t) for t in other}
        if len(idx) != 1:
            raise ConsistencyFailure(
                f"classes {base} and {other} are linked; itinerary fibers must not cross"
            )
        return idx.pop()

    def between(self, mid: JuliaPoint, a: JuliaPoint, b: JuliaPoint) -> bool:
        """True iff mid separates a from b (lies on the open arc between them)."""
        if mid == a or mid == b or len(mid.angles) < 2:
            return False
        if a == b:
            return False
        m, ia, ib = (self.class_id(mid.angles), self.class_id(a.angles), self.class_id(b.angles))
        return self.locate_ids(m, ia) != self.locate_ids(m, ib)

    # -- triods ------------------------------------------------------------

    def _pullback_class(self, cls: AngleSet, sym: str) -> AngleSet:
        """Preimage class of `cls` in the closed half labeled `sym`."""
        strict = [h for t in cls for h in A.halves(t) if self.symbol(h) == sym]
        if strict:
            out = self.class_of(strict[0])
            if not set(strict) <= set(out):
                raise ConsistencyFailure("branch preimage split across classes")
            return out
        stars = [h for t in cls for h in A.halves(t) if self.symbol(h) == STAR]
        if stars:
            return self.class_of(stars[0])
        raise ConsistencyFailure("class has no preimage in the requested half")

    def _angle_from_periodic_word(self, word: tuple[str, ...]) -> Fraction:
        """A periodic angle whose itinerary is word^infinity (phase 0)."""
        return self._periodic_fiber(word)[0]

    def triod_middle(self, a: JuliaPoint, b: JuliaPoint, c: JuliaPoint) -> JuliaPoint:
        """The unique point lying on all three arcs [a,b], [b,c], [a,c]."""
        ids = tuple(sorted(self.class_id(p.angles) for p in (a, b, c)))
        hit = self._triod_cache.get(ids)
        if hit is not None:
            return self._points[hit]
        result = self._triod_middle_uncached(*ids)
        self._triod_cache[ids] = self.class_id(result.angles)
        return result

    def _triod_middle_uncached(self, ia: int, ib: int, ic: int) -> JuliaPoint:
        k_id = self.class_id(self.critical_class.angles)
        state = (ia, ib, ic)
        prefix: list[str] = []
        seen: dict[tuple[int, int, int], int] = {}
        middle: int | None = None

        for _ in range(self.triod_bound):
            if state[0] == state[1] or state[0] == state[2]:
                middle = state[0]
                break
            if state[1] == state[2]:
                middle = state[1]
                break
            if state in seen:
                # the middle is periodic: its itinerary is the emitted symbol cycle
                start = seen[state]
                word = tuple(prefix[start:])
                if not word:
                    raise ConsistencyFailure("empty triod cycle")
                u = self._angle_from_periodic_word(word)
                middle = self.class_id(self.class_of(u))
                prefix = prefix[:start]
                break
            seen[state] = len(prefix)
            syms = [self._sym[cid] for cid in state]
            starred = [i for i, s in enumerate(syms) if s == STAR]
            plain = {s for s in syms if s != STAR}
            if starred:
                if len(plain) == 2:
                    middle = k_id  # the critical point separates the other two
                    break
                # the critical class sits in both closed halves: map forward
                prefix.append(plain.pop())
                state = tuple(self.image_id(cid) for cid in state)
            elif len(plain) == 1:
                prefix.append(syms[0])
                state = tuple(self.image_id(cid) for cid in state)
            else:
                # two agree, one differs: replace the odd one by the critical class
                odd = 0 if syms[1] == syms[2] else (1 if syms[0] == syms[2] else 2)
                state = tuple(k_id if i == odd else cid for i, cid in enumerate(state))
        if middle is None:
            raise DepthExceeded(f"triod resolution exceeded {self.triod_bound} steps")
        cls = self._by_id[middle]
        for sym in reversed(prefix):
            cls = self._pullback_class(cls, sym)
        return self._points[self.class_id(cls)]


@dataclass(frozen=True)
class HubbardTree:
    """Finite invariant tree spanned by the postcritical set, plus marked points."""

    parameter: Fraction
    vertices: tuple[JuliaPoint, ...]
    edges: tuple[tuple[int, int], ...]
    rotation: tuple[tuple[int, ...], ...]  # per vertex: neighbor indices, CCW
    dynamics: tuple[int, ...]
    postcritical_set: frozenset[int]
    branch_set: frozenset[int]
    extra_set: frozenset[int]
    dendrite: Dendrite = field(compare=False, repr=False)

    def index_of(self, p: JuliaPoint) -> int | None:
        try:
            return self.vertices.index(p)
        except ValueError:
            return None

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.rotation[i]

    def to_json_dict(self) -> dict:
        return {
            "parameter": A.format_angle(self.parameter),
            "vertices": [
                {
                    "angles": [A.format_angle(t) for t in v.angles],
                    "postcritical": i in self.postcritical_set,
                    "branch": i in self.branch_set,
                    "extra": i in self.extra_set,
                }
                for i, v in enumerate(self.vertices)
            ],
            "edges": [list(e) for e in self.edges],
            "rotation": [list(r) for r in self.rotation],
            "dynamics": list(self.dynamics),
        }


class _TreeBuilder:
    """Incremental dendrite-hull construction via sector tests and triods."""

    def __init__(self, dendrite: Dendrite):
        self.d = dendrite
        self.points: list[JuliaPoint] = []
        self.adj: dict[int, set[int]] = {}

    def _add_vertex(self, p: JuliaPoint) -> int:
        self.points.append(p)
        i = len(self.points) - 1
        self.adj[i] = set()
        return i

    def _add_edge(self, i: int, j: int) -> None:
        self.adj[i].add(j)
        self.adj[j].add(i)

    def _split_edge(self, i: int, j: int, m: int) -> None:
        self.adj[i].discard(j)
        self.adj[j].discard(i)
        self._add_edge(i, m)
        self._add_edge(m, j)

    def _step_toward(self, u: int, exclude: int, p: JuliaPoint) -> int | None:
        """Neighbor of u (other than `exclude`) in the sector of u containing p."""
        pu = self.points[u]
        cands = [n for n in self.adj[u] if n != exclude]
        if not cands:
            return None
        if len(pu.angles) == 1:
            # an endpoint class has valence <= 1, so there is nothing further
            return None
        sec = self.d.locate(pu.angles, p.angles)
        for n in cands:
            if self.d.locate(pu.angles, self.points[n].angles) == sec:
                return n
        return None

    def insert(self, p: JuliaPoint) -> int:
        d = self.d
        if p in self.points:
            return self.points.index(p)
        if len(self.points) == 0:
            return self._add_vertex(p)
        if len(self.points) == 1:
            i = self._add_vertex(p)
            self._add_edge(0, i)
            return i
        u = 0
        v = next(iter(self.adj[0]))
        for _ in range(4 * len(self.points) + 8):
            pu, pv = self.points[u], self.points[v]
            if d.between(p, pu, pv):
                i = self._add_vertex(p)
                self._split_edge(u, v, i)
                return i
            # walk toward the attachment along cheap separation tests
            advanced = False
            for w0, other in ((v, u), (u, v)):
                pw, po = self.points[w0], self.points[other]
                if d.between(pw, po, p):
                    nxt = self._step_toward(w0, other, p)
                    if nxt is None:
                        i = self._add_vertex(p)
                        self._add_edge(w0, i)
                        return i
                    u, v = w0, nxt
                    advanced = True
                    break
            if advanced:
                continue
            # neither endpoint separates: a branch point splits this edge
            m = d.triod_middle(pu, pv, p)
            if m == p or m == pu or m == pv:
                raise ConsistencyFailure("branch middle degenerated during insertion")
            mi = self._add_vertex(m)
            self._split_edge(u, v, mi)
            i = self._add_vertex(p)
            self._add_edge(mi, i)
            return i
        raise DepthExceeded("tree insertion walk did not terminate")


def _finalize_tree(
    dendrite: Dendrite,
    builder: _TreeBuilder,
    postcritical: set[JuliaPoint],
    extra: set[JuliaPoint],
) -> HubbardTree:
    d = dendrite
    # map every vertex forward; insert missing images until closed
    changed = True
    while changed:
        changed = False
        for p in list(builder.points):
            img = d.image(p)
            if img not in builder.points:
                builder.insert(img)
                changed = True

    order = sorted(range(len(builder.points)), key=lambda i: builder.points[i].angles)
    old_to_new = {o: n for n, o in enumerate(order)}
    points = tuple(builder.points[o] for o in order)
    adj = {old_to_new[i]: {old_to_new[j] for j in js} for i, js in builder.adj.items()}
    edges = tuple(sorted((min(i, j), max(i, j)) for i in adj for j in adj[i] if i < j))

    rotation = []
    for i, p in enumerate(points):
        nbs = sorted(adj[i])
        if len(p.angles) > 1 and len(nbs) > 1:
            nbs.sort(key=lambda n: p.angles[d.locate(p.angles, points[n].angles)])
        rotation.append(tuple(nbs))

    dynamics = tuple(points.index(d.image(p)) for p in points)
    post_idx = frozenset(i for i, p in enumerate(points) if p in postcritical)
    branch_idx = frozenset(i for i in range(len(points)) if len(adj[i]) >= 3)
    extra_idx = frozenset(i for i, p in enumerate(points) if p in extra)
    for i in branch_idx:
        if len(points[i].angles) < 3:
            raise ConsistencyFailure("branch vertex with fewer than 3 rays")
    if len(edges) != len(points) - 1:
        raise ConsistencyFailure("vertex/edge count mismatch: not a tree")
    return HubbardTree(
        parameter=d.theta,
        vertices=points,
        edges=edges,
        rotation=tuple(rotation),
        dynamics=dynamics,
        postcritical_set=post_idx,
        branch_set=branch_idx,
        extra_set=extra_idx,
        dendrite=d,
    )


_DENDRITES: dict[Fraction, Dendrite] = {}
_TREES: dict[Fraction, "HubbardTree"] = {}


def get_dendrite(theta: Fraction) -> Dendrite:
    """Shared per-parameter context (dendrites are immutable, caching is safe)."""
    if theta not in _DENDRITES:
        _DENDRITES[theta] = Dendrite(theta)
    return _DENDRITES[theta]


def build_tree(theta: Fraction, dendrite: Dendrite | None = None) -> HubbardTree:
    """Hubbard tree of the parameter: hull of the postcritical classes.

    Vertices are the postcritical classes, the branch points of their hull, and
    the forward orbits of those branch points.  The critical point is a vertex
    only when it is itself postcritical or a branch point.
    """
    if dendrite is None and theta in _TREES:
        return _TREES[theta]
    d = dendrite or get_dendrite(theta)
    builder = _TreeBuilder(d)
    post = set(d.postcritical())
    for p in sorted(post, key=lambda p: p.angles):
        builder.insert(p)
    tree = _finalize_tree(d, builder, post, set())
    if dendrite is None or dendrite is _DENDRITES.get(theta):
        _TREES[theta] = tree
    return tree


def on_tree(tree: HubbardTree, p: JuliaPoint) -> bool:
    """True iff p lies on the tree (a vertex or interior to an edge)."""
    if p in tree.vertices:
        return True
    d = tree.dendrite
    return any(
        d.between(p, tree.vertices[i], tree.vertices[j]) for i, j in tree.edges
    )


def extend_marking(tree: HubbardTree, extra: "set[JuliaPoint] | list[JuliaPoint]") -> HubbardTree:
    """Tree with additional marked points and their forward orbits as vertices."""
    d = tree.dendrite
    closure: list[JuliaPoint] = []
    for p in extra:
        if not on_tree(tree, p):
            raise NotOnTree(f"{[A.format_angle(t) for t in p.angles]} is not on the tree")
        x = p
        while x not in closure:
            closure.append(x)
            x = d.image(x)
    builder = _TreeBuilder(d)
    for v in tree.vertices:
        builder.insert(v)
    for p in closure:
        builder.insert(p)
    post = {tree.vertices[i] for i in tree.postcritical_set}
    old_extra = {tree.vertices[i] for i in tree.extra_set}
    new_extra = old_extra | {p for p in closure if p not in post}
    return _finalize_tree(d, builder, post, new_extra)


@dataclass(frozen=True)
class DoubledTree:
    """Full doubling preimage of a Hubbard tree: two copies joined at the critical class."""

    base: HubbardTree
    vertices: tuple[JuliaPoint, ...]
    edges: tuple[tuple[int, int], ...]
    projection: tuple[int, ...]  # lifted vertex -> base vertex index
    critical_index: int
    symbols: tuple[str, ...]  # "1", "0", or "*" per lifted vertex
    dendrite: Dendrite = field(compare=False, repr=False)


def lift_tree(tree: HubbardTree) -> DoubledTree:
    """The combinatorial preimage tree under the doubling of classes."""
    d = tree.dendrite
    k_class = d.critical_class

    def preimage_parts(p: JuliaPoint) -> dict[str, JuliaPoint]:
        parts: dict[str, JuliaPoint] = {}
        for t in p.angles:
            for h in A.halves(t):
                s = d.symbol(h)
                if s not in parts:
                    parts[s] = d.point(h)
        return parts

    parts_of = {v: preimage_parts(v) for v in tree.vertices}
    lifted: list[JuliaPoint] = []
    for v in tree.vertices:
        for p in parts_of[v].values():
            if p not in lifted:
                lifted.append(p)
    lifted.sort(key=lambda p: p.angles)

    def pre(v: JuliaPoint, s: str) -> JuliaPoint:
        parts = parts_of[v]
        return parts.get(s, parts.get(STAR, k_class))

    edge_set: set[tuple[int, int]] = set()
    for i, j in tree.edges:
        u, w = tree.vertices[i], tree.vertices[j]
        for s in ("1", "0"):
            a, b = lifted.index(pre(u, s)), lifted.index(pre(w, s))
            if a != b:
                edge_set.add((min(a, b), max(a, b)))
    # bridge edges when the critical value class has non-star preimage parts
    cv = d.critical_value
    if cv in parts_of:
        parts = parts_of[cv]
        if STAR in parts:
            k_i = lifted.index(parts[STAR])
            for s in ("1", "0"):
                if s in parts:
                    a = lifted.index(parts[s])
                    edge_set.add((min(a, k_i), max(a, k_i)))

    if k_class not in lifted:
        raise ConsistencyFailure("critical class missing from the lifted tree")
    projection = []
    for p in lifted:
        img = d.image(p)
        idx = tree.index_of(img)
        if idx is None:
            raise ConsistencyFailure("lifted vertex projects outside the base tree")
        projection.append(idx)
    base_classes = set(tree.vertices)
    if not base_classes <= set(lifted):
        raise ConsistencyFailure("base tree classes do not embed in the doubled tree")
    symbols = tuple(
        STAR if p == k_class else d.symbol(p.min_angle) for p in lifted
    )
    return DoubledTree(
        base=tree,
        vertices=tuple(lifted),
        edges=tuple(sorted(edge_set)),
        projection=tuple(projection),
        critical_index=lifted.index(k_class),
        symbols=symbols,
        dendrite=d,
    )
