"""Embedded complexes on the glued sphere: skeletons, rotation systems, faces.

Vertices are collapsed ray classes (or plain tree points); the cyclic dart
order at each vertex comes from a boundary walk around the collapsed class:
alpha landing points are traversed counterclockwise in their own angles, beta
points in theirs, and the walk flips hemisphere at each equator touch.  Faces
are traced from the rotation system; every produced complex is checked against
V - E + F = 2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import angles as A
from .errors import (
    ConsistencyFailure,
    CriterionFailed,
    DisconnectedSkeleton,
    EulerViolation,
    ObstructedMating,
    RepairFailed,
)
from .mating import ALPHA, BETA, SIDES, Mating, RayClass, RayNode, position
from .tree import Dendrite, DoubledTree, HubbardTree, JuliaPoint, extend_marking, lift_tree, on_tree


@dataclass(frozen=True)
class GraphVertex:
    constituents: tuple[RayNode, ...]
    tau: RayClass | None

    @property
    def sides(self) -> frozenset:
        return frozenset(s for s, _ in self.constituents)

    @property
    def min_angle(self) -> Fraction:
        return min(t for _, p in self.constituents for t in p.angles)

    def to_json_dict(self) -> dict:
        return {
            "constituents": [
                {"side": s, "angles": [A.format_angle(t) for t in p.angles]}
                for s, p in self.constituents
            ],
            "collapsed": self.tau is not None,
        }


@dataclass(frozen=True)
class GraphEdge:
    side: str
    u_point: JuliaPoint
    w_point: JuliaPoint
    u: int
    w: int


# events: ("dart", dart_id) or ("exit", position, sign)
Event = tuple


@dataclass
class EmbeddedGraph:
    vertices: tuple[GraphVertex, ...]
    edges: tuple[GraphEdge, ...]
    rotation: tuple[tuple[int, ...], ...]
    events: tuple[tuple[Event, ...], ...]
    dendrites: dict[str, Dendrite] = field(repr=False)

    def tail(self, d: int) -> int:
        e = self.edges[d >> 1]
        return e.u if d & 1 == 0 else e.w

    def head(self, d: int) -> int:
        e = self.edges[d >> 1]
        return e.w if d & 1 == 0 else e.u

    def darts(self) -> range:
        return range(2 * len(self.edges))

    def to_json_dict(self) -> dict:
        return {
            "vertices": [v.to_json_dict() for v in self.vertices],
            "edges": [
                {
                    "side": e.side,
                    "u": e.u,
                    "w": e.w,
                    "u_angles": [A.format_angle(t) for t in e.u_point.angles],
                    "w_angles": [A.format_angle(t) for t in e.w_point.angles],
                }
                for e in self.edges
            ],
            "rotation": [list(r) for r in self.rotation],
        }


@dataclass
class CWComplex2:
    """A 2-complex on the sphere: embedded graph plus traced faces."""

    graph: EmbeddedGraph
    faces: tuple[tuple[int, ...], ...]
    kind: str  # "quotient" | "pullback" | "single_tree" | "synthetic"
    trees: dict[str, HubbardTree] = field(default_factory=dict, repr=False)
    lifted: dict[str, DoubledTree] = field(default_factory=dict, repr=False)
    sides: dict[str, "SideData"] = field(default_factory=dict, repr=False)
    taus: tuple = field(default_factory=tuple, repr=False)

    @property
    def face_sizes(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.faces)

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.graph.vertices), len(self.graph.edges), len(self.faces))

    def face_of_dart(self, d: int) -> int:
        return self._face_index[d]

    def __post_init__(self):
        self._face_index = {}
        for i, f in enumerate(self.faces):
            for d in f:
                self._face_index[d] = i

    def to_json_dict(self) -> dict:
        v, e, f = self.counts
        return {
            "kind": self.kind,
            "V": v,
            "E": e,
            "F": f,
            "face_sizes": sorted(self.face_sizes),
            "graph": self.graph.to_json_dict(),
            "faces": [list(face) for face in self.faces],
        }


# ---------------------------------------------------------------------------
# spot walks: rotation and equator exits around a (possibly collapsed) vertex
# ---------------------------------------------------------------------------


def _sector_key(dend: Dendrite, p: JuliaPoint, other: JuliaPoint) -> Fraction:
    if len(p.angles) == 1:
        return p.angles[0]
    return p.angles[dend.locate(p.angles, other.angles)]


def _plain_events(darts_with_keys: list[tuple[Fraction, int]]) -> tuple[Event, ...]:
    return tuple(("dart", d) for _, d in sorted(darts_with_keys, key=lambda kv: kv[0]))


def _spot_events(
    dendrites: dict[str, Dendrite],
    members: tuple[RayNode, ...],
    attachments: dict[RayNode, list[tuple[Fraction, int]]],
) -> tuple[Event, ...]:
    """Boundary-walk events around a collapsed ray class.

    Returns the cyclic sequence of tree-dart and equator-exit events seen when
    walking once around the class; the dart subsequence is the vertex rotation.
    """
    # nodes: ("L", side, angles) for landing points, ("T", pos) for equator touches
    items: dict[tuple, list[tuple]] = {}
    touch_sides: dict[Fraction, dict[str, tuple]] = {}
    for side, p in members:
        lid = ("L", side, p.angles)
        entries: list[tuple] = []
        for a in p.angles:
            pos = position(side, a)
            entries.append((a, 0, ("ray", pos)))
            touch_sides.setdefault(pos, {})[side] = (lid, a)
        for key, dart in attachments.get((side, p), ()):
            entries.append((key, 1, ("att", dart)))
        entries.sort(key=lambda t: (t[0], t[1]))
        items[lid] = [e[2] for e in entries]
    for pos, by_side in touch_sides.items():
        # real collapsed classes are glue-closed (both rays present); synthetic
        # same-side merges may leave a touch with a single ray, which U-turns
        items[("T", pos)] = [("end", s) for s in (ALPHA, BETA) if s in by_side]

    n_rays = sum(len(p.angles) for _, p in members)
    n_nodes = len(items)
    if n_rays != n_nodes - 1:
        raise ConsistencyFailure("collapsed class is not a tree; quotient would pinch")

    def partner(node: tuple, slot: int) -> tuple[tuple, int]:
        kind = items[node][slot][0]
        if kind == "ray":
            pos = items[node][slot][1]
            side = node[1]
            return (("T", pos), 0 if side == ALPHA else 1)
        # end slot at a touch: back to the landing node's ray slot
        side = items[node][slot][1]
        lid, a = touch_sides[node[1]][side]
        pos = node[1]
        for i, it in enumerate(items[lid]):
            if it[0] == "ray" and it[1] == pos:
                return (lid, i)
        raise ConsistencyFailure("ray back-reference missing")

    events: list[Event] = []
    start = None
    for node, its in items.items():
        for i, it in enumerate(its):
            if it[0] in ("ray", "end"):
                start = (node, i)
                break
        if start:
            break
    if start is None:
        raise ConsistencyFailure("collapsed class has no rays")

    total_ribbon = 2 * n_rays
    visited: set[tuple[tuple, int]] = set()
    cur = start
    while cur not in visited:
        visited.add(cur)
        node, slot = partner(*cur)
        its = items[node]
        j = slot
        while True:
            nxt = (j + 1) % len(its)
            if node[0] == "T":
                pos = node[1]
                if len(its) == 1:
                    # one-sided touch: sweep both equator exits and U-turn
                    order = (-1, 1) if its[j][1] == ALPHA else (1, -1)
                    events.append(("exit", pos, order[0]))
                    events.append(("exit", pos, order[1]))
                else:
                    # corner between the two ray ends of a touch
                    sign = -1 if its[j][1] == ALPHA else 1
                    events.append(("exit", pos, sign))
                cur = (node, nxt)
                break
            it = its[nxt]
            if it[0] == "att":
                events.append(("dart", it[1]))
                j = nxt
                continue
            cur = (node, nxt)
            break
    if len(visited) != total_ribbon:
        raise ConsistencyFailure("spot walk did not close over all rays")
    return tuple(events)


# ---------------------------------------------------------------------------
# assembly of glued complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SideData:
    dendrite: Dendrite
    points: tuple[JuliaPoint, ...]
    edges: tuple[tuple[JuliaPoint, JuliaPoint], ...]


def side_data_from_tree(tree: HubbardTree) -> SideData:
    return SideData(
        dendrite=tree.dendrite,
        points=tree.vertices,
        edges=tuple((tree.vertices[i], tree.vertices[j]) for i, j in tree.edges),
    )


def side_data_from_doubled(doubled: DoubledTree) -> SideData:
    return SideData(
        dendrite=doubled.dendrite,
        points=doubled.vertices,
        edges=tuple((doubled.vertices[i], doubled.vertices[j]) for i, j in doubled.edges),
    )


def assemble_graph(
    sides: dict[str, SideData],
    taus: tuple[RayClass, ...],
    groups: list[frozenset[RayNode]],
) -> EmbeddedGraph:
    """Glue the per-side graphs along the merge groups and build rotations."""
    node_index: dict[RayNode, int] = {}
    nodes: list[RayNode] = []
    for side in sorted(sides):
        for p in sides[side].points:
            node = (side, p)
            node_index[node] = len(nodes)
            nodes.append(node)

    parent = list(range(len(nodes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for group in groups:
        it = iter(group)
        first = node_index[next(it)]
        for n in it:
            parent[find(node_index[n])] = find(first)

    classes: dict[int, list[RayNode]] = {}
    for node, i in node_index.items():
        classes.setdefault(find(i), []).append(node)

    tau_of_node: dict[RayNode, RayClass] = {}
    for tau in taus:
        for n in tau.nodes:
            tau_of_node[n] = tau

    raw_vertices = []
    for members in classes.values():
        members.sort(key=lambda n: (n[0], n[1].angles))
        vtaus = {id(tau_of_node[n]): tau_of_node[n] for n in members if n in tau_of_node}
        if len(vtaus) > 1:
            raise ConsistencyFailure("merged vertex meets two distinct collapsing classes")
        tau = next(iter(vtaus.values())) if vtaus else None
        raw_vertices.append(GraphVertex(tuple(members), tau))
    raw_vertices.sort(key=lambda v: (v.min_angle, v.constituents))
    vertices = tuple(raw_vertices)

    vertex_of_node: dict[RayNode, int] = {}
    for i, v in enumerate(vertices):
        for n in v.constituents:
            vertex_of_node[n] = i

    edges = []
    for side in sorted(sides):
        for pu, pw in sides[side].edges:
            edges.append(
                GraphEdge(side, pu, pw, vertex_of_node[(side, pu)], vertex_of_node[(side, pw)])
            )
    edges = tuple(edges)

    dendrites = {s: sd.dendrite for s, sd in sides.items()}
    attachments: dict[RayNode, list[tuple[Fraction, int]]] = {}
    incident: dict[int, list[int]] = {i: [] for i in range(len(vertices))}
    for e_idx, e in enumerate(edges):
        for dart, pt, other in ((2 * e_idx, e.u_point, e.w_point), (2 * e_idx + 1, e.w_point, e.u_point)):
            key = _sector_key(dendrites[e.side], pt, other)
            attachments.setdefault((e.side, pt), []).append((key, dart))
            incident[vertex_of_node[(e.side, pt)]].append(dart)

    rotations: list[tuple[int, ...]] = []
    all_events: list[tuple[Event, ...]] = []
    for i, v in enumerate(vertices):
        if v.tau is None and len(v.constituents) == 1:
            node = v.constituents[0]
            evs = _plain_events(attachments.get(node, []))
        else:
            members = v.tau.nodes if v.tau is not None else v.constituents
            evs = _spot_events(dendrites, members, attachments)
        darts = tuple(p[1] for p in evs if p[0] == "dart")
        if sorted(darts) != sorted(incident[i]):
            raise ConsistencyFailure("rotation lost or duplicated a dart")
        rotations.append(darts)
        all_events.append(evs)

    return EmbeddedGraph(vertices, edges, tuple(rotations), tuple(all_events), dendrites)


def trace_faces(graph: EmbeddedGraph, kind: str = "synthetic", **meta) -> CWComplex2:
    """Faces as orbits of dart -> rotation successor of its reversal."""
    rot_pos: dict[int, tuple[int, int]] = {}
    for v, rot in enumerate(graph.rotation):
        for i, d in enumerate(rot):
            rot_pos[d] = (v, i)

    def next_dart(d: int) -> int:
        r = d ^ 1
        v, i = rot_pos[r]
        rot = graph.rotation[v]
        return rot[(i + 1) % len(rot)]

    faces = []
    seen: set[int] = set()
    for d0 in graph.darts():
        if d0 in seen:
            continue
        cyc = []
        d = d0
        while d not in seen:
            seen.add(d)
            cyc.append(d)
            d = next_dart(d)
        m = cyc.index(min(cyc))
        faces.append(tuple(cyc[m:] + cyc[:m]))
    faces.sort(key=lambda f: (len(f), f))

    # connectivity
    if graph.vertices:
        seen_v = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for d in graph.rotation[v]:
                w = graph.head(d)
                if w not in seen_v:
                    seen_v.add(w)
                    stack.append(w)
        if len(seen_v) != len(graph.vertices):
            raise EulerViolation("graph is disconnected")
    V, E, F = len(graph.vertices), len(graph.edges), len(faces)
    if V - E + F != 2:
        raise EulerViolation(f"V - E + F = {V - E + F}, expected 2")
    if sum(len(f) for f in faces) != 2 * E:
        raise EulerViolation("face sizes do not sum to twice the edge count")
    return CWComplex2(graph=graph, faces=tuple(faces), kind=kind, **meta)


# ---------------------------------------------------------------------------
# quotient skeleton of the two glued trees
# ---------------------------------------------------------------------------


def _merge_groups(
    taus: tuple[RayClass, ...], trees: dict[str, HubbardTree]
) -> list[frozenset[RayNode]]:
    groups = []
    for tau in taus:
        members = frozenset(
            n for n in tau.nodes if n[0] in trees and on_tree(trees[n[0]], n[1])
        )
        if len(members) >= 2:
            groups.append(members)
    return groups


def _mark_group_members(
    trees: dict[str, HubbardTree], groups: list[frozenset[RayNode]]
) -> dict[str, HubbardTree]:
    extras: dict[str, set[JuliaPoint]] = {s: set() for s in trees}
    for group in groups:
        for side, p in group:
            if p not in trees[side].vertices:
                extras[side].add(p)
    out = dict(trees)
    for side, pts in extras.items():
        if pts:
            out[side] = extend_marking(out[side], pts)
    return out


def quotient_skeleton(
    tree_alpha: HubbardTree, tree_beta: HubbardTree, mating: Mating
) -> tuple[EmbeddedGraph, dict[str, HubbardTree], dict[str, SideData]]:
    """1-skeleton of the glued quotient: both trees merged along the collapsing classes."""
    partition = mating.essential_partition()
    trees = {ALPHA: tree_alpha, BETA: tree_beta}
    groups = _merge_groups(partition.tau_classes, trees)
    if not any(len({s for s, _ in g}) == 2 for g in groups):
        raise DisconnectedSkeleton(
            "no identification joins the two trees; the essential mating is the formal mating"
        )
    trees = _mark_group_members(trees, groups)
    groups = _merge_groups(partition.tau_classes, trees)
    sides = {s: side_data_from_tree(trees[s]) for s in SIDES}
    graph = assemble_graph(sides, partition.tau_classes, groups)
    return graph, trees, sides


def _resubdivide(side: SideData, tree: HubbardTree) -> SideData:
    """Replace each side edge by its path through the (extended) tree's vertices."""
    d = side.dendrite
    edges: list[tuple[JuliaPoint, JuliaPoint]] = []
    for pu, pw in side.edges:
        members = [v for v in tree.vertices if v == pu or v == pw or d.between(v, pu, pw)]
        rank = {
            r: sum(1 for s in members if s != r and (s == pu or d.between(s, pu, r)))
            for r in members
        }
        chain = sorted(members, key=rank.__getitem__)
        edges.extend(zip(chain, chain[1:]))
    return SideData(d, tree.vertices, tuple(edges))


def digon_repair(complex_: CWComplex2, mating: Mating | None, attempts: int = 16) -> CWComplex2:
    """Split small faces by marking the smallest-denominator preperiodic interior point."""
    current = complex_
    for _ in range(attempts):
        small = [f for f in current.faces if len(f) < 3]
        if not small:
            return current
        face = small[0]
        edge = current.graph.edges[face[0] >> 1]
        dend = current.graph.dendrites[edge.side]
        mark = _interior_point(dend, edge.u_point, edge.w_point)
        trees = dict(current.trees)
        trees[edge.side] = extend_marking(trees[edge.side], {mark})
        taus = current.taus
        if mating is not None:
            groups = _merge_groups(taus, trees)
        else:
            groups = [
                frozenset(v.constituents)
                for v in current.graph.vertices
                if len(v.constituents) >= 2
            ]
        sides = {s: _resubdivide(current.sides[s], trees[s]) for s in current.sides}
        graph = assemble_graph(sides, taus, groups)
        current = trace_faces(
            graph, kind=current.kind, trees=trees, sides=sides, taus=taus
        )
    raise RepairFailed(f"faces of size < 3 persisted after {attempts} repair rounds")


def _interior_point(dend: Dendrite, pu: JuliaPoint, pw: JuliaPoint) -> JuliaPoint:
    """Smallest-denominator strictly preperiodic class interior to the arc [pu, pw]."""
    for den in range(2, 1 << 12, 2):
        for num in range(1, den):
            t = Fraction(num, den)
            if t.denominator != den:
                continue
            p = dend.point(t)
            if dend.between(p, pu, pw):
                return p
    raise RepairFailed("no interior preperiodic point found on the digon edge")


def quotient_complex(
    mating: Mating, tree_alpha: HubbardTree, tree_beta: HubbardTree
) -> CWComplex2:
    """Full construction: skeleton, faces, digon repair."""
    graph, trees, sides = quotient_skeleton(tree_alpha, tree_beta, mating)
    complex_ = trace_faces(
        graph,
        kind="quotient",
        trees=trees,
        sides=sides,
        taus=mating.essential_partition().tau_classes,
    )
    return digon_repair(complex_, mating)


# ---------------------------------------------------------------------------
# single-tree skeleton
# ---------------------------------------------------------------------------


def single_tree_skeleton(mating: Mating, side: str, tree: HubbardTree | None = None) -> CWComplex2:
    """Subdivision complex built from one quotiented tree only.

    Valid when the quotient of the chosen tree carries the full critical orbit
    of the mating; otherwise CriterionFailed names the failing conditions.
    """
    from .tree import build_tree

    partition = mating.essential_partition()
    t = tree if tree is not None else build_tree(mating.spec.theta(side), mating.dendrites[side])
    trees = {side: t}

    failures: list[str] = []
    # which tau represents each off-side critical-orbit point on this tree?
    marks: set[JuliaPoint] = set()
    for tau in partition.tau_classes:
        members = [n for n in tau.nodes if n[0] == side and on_tree(t, n[1])]
        if members and (len(members) >= 2 or tau.contains_critical_orbit):
            marks.update(p for _, p in members)
    for oside in SIDES:
        for p in mating.dendrites[oside].critical_orbit():
            if oside == side:
                if not on_tree(t, p):
                    failures.append("contains postcritical set")
                else:
                    marks.add(p)
            else:
                tau = partition.class_of_node((oside, p))
                if tau is None or not any(
                    n[0] == side and on_tree(t, n[1]) for n in tau.nodes
                ):
                    failures.append("contains postcritical set")
    if failures:
        raise CriterionFailed(sorted(set(failures)))

    new = {p for p in marks if p not in t.vertices}
    if new:
        t = extend_marking(t, new)
    trees = {side: t}
    groups = _merge_groups(partition.tau_classes, trees)
    sides = {side: side_data_from_tree(t)}
    graph = assemble_graph(sides, partition.tau_classes, groups)
    complex_ = trace_faces(
        graph, kind="single_tree", trees=trees, sides=sides, taus=partition.tau_classes
    )
    # forward invariance: vertex images are vertices
    for v in complex_.graph.vertices:
        for s, p in v.constituents:
            if mating.dendrites[s].image(p) not in t.vertices:
                raise CriterionFailed(["forward invariant"])
    return digon_repair(complex_, mating)


# ---------------------------------------------------------------------------
# pullback complex
# ---------------------------------------------------------------------------


def pullback_complex(
    mating: Mating, complex_: CWComplex2, enforce_clean: bool = True
) -> CWComplex2:
    """Preimage of the complex under the mating.

    Lifted points are identified along the preimage components of each
    collapsed base vertex (realized through half-angle classes): components
    that are collapsing classes merge by the quotient itself, and components
    avoiding every collapsing class are the neighborhoods where the mating is
    rerouted homeomorphically, so their skeleton points also become one marked
    point of the preimage complex.
    """
    if complex_.kind != "single_tree" and enforce_clean:
        report = mating.obstruction_check(complex_.trees[ALPHA], complex_.trees[BETA])
        if report.obstructed:
            raise ObstructedMating(report=report)
    lifted = {s: lift_tree(complex_.trees[s]) for s in complex_.trees}
    sides = {s: side_data_from_doubled(lifted[s]) for s in lifted}
    point_sets = {s: set(sides[s].points) for s in sides}

    groups = []
    spot_classes = []
    seen_keys = set()
    for v in complex_.graph.vertices:
        if v.tau is None:
            continue
        for comp in mating.preimage_components(v.tau):
            if comp.key in seen_keys:
                continue
            seen_keys.add(comp.key)
            spot_classes.append(comp)
            present = frozenset(
                n for n in comp.nodes if n[0] in point_sets and n[1] in point_sets[n[0]]
            )
            if len(present) >= 2:
                groups.append(present)
    graph = assemble_graph(sides, tuple(spot_classes), groups)
    return trace_faces(
        graph,
        kind="pullback",
        trees=dict(complex_.trees),
        lifted=lifted,
        sides=sides,
        taus=tuple(spot_classes),
    )
