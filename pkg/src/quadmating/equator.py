"""Pseudo-equator analysis: equator curve, edge replacement matrix, decomposition.

The deformed equator passes once through every postcritical class of the
mating, ordered by the circle coordinate of the defining ray pairs, with each
arc routed through a single face of the subdivision complex.  Its preimage is
the equator again, marked at the halved positions; counting the sub-arcs of
each deformed edge over each edge gives the replacement matrix, whose exact
leading eigenvector recovers the external angles of the constituent pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import angles as A
from .complexes import CWComplex2
from .errors import (
    ConsistencyFailure,
    NoConsistentSolution,
    NoIntegerEigenvalue,
    ObstructedMating,
    ReducibleMatrix,
)
from .mating import ALPHA, BETA, Mating, RayClass, position


@dataclass(frozen=True)
class PinchReport:
    """Outcome when the would-be equator is pinched into a non-Jordan curve."""

    classes: tuple[RayClass, ...]
    reasons: tuple[str, ...]

    @property
    def jordan(self) -> bool:
        return False

    def to_json_dict(self) -> dict:
        return {
            "pinched": True,
            "reasons": list(self.reasons),
            "classes": [c.to_json_dict() for c in self.classes],
        }


@dataclass(frozen=True)
class EquatorCurve:
    """Jordan curve through the postcritical classes, with face-routed edges."""

    points: tuple[RayClass, ...]  # p_0 ... p_n in circle order
    spots: tuple[Fraction, ...]  # equator position of each point
    edge_faces: tuple[int, ...]  # face of the complex containing each edge arc
    dynamics: tuple[int, ...]  # p_i -> p_{sigma(i)}
    critical_value_indices: dict[str, int]  # side -> index of its critical value class

    @property
    def jordan(self) -> bool:
        return True

    def __len__(self) -> int:
        return len(self.points)

    def to_json_dict(self) -> dict:
        return {
            "pinched": False,
            "points": [
                {
                    "spot": A.format_angle(s),
                    "class": c.to_json_dict(),
                }
                for s, c in zip(self.spots, self.points)
            ],
            "edge_faces": list(self.edge_faces),
            "dynamics": list(self.dynamics),
            "critical_values": dict(self.critical_value_indices),
        }


@dataclass(frozen=True)
class LiftedCurve:
    """The preimage curve: equator touches labelled by marked preimage points."""

    touches: tuple[Fraction, ...]  # sorted positions
    touch_image: tuple[int, ...]  # index i of the curve point each touch doubles to
    touch_group: tuple[int, ...]  # preimage marked point (group id) per touch
    crossings: tuple[int, ...]  # group ids visited more than once

    def sub_edges(self) -> list[tuple[int, int]]:
        """(start touch index, image edge index) for each sub-edge, in cyclic order."""
        n = len(self.touches)
        return [(k, self.touch_image[k]) for k in range(n)]

    def to_json_dict(self) -> dict:
        return {
            "touches": [A.format_angle(t) for t in self.touches],
            "touch_image": list(self.touch_image),
            "crossings": list(self.crossings),
        }


@dataclass(frozen=True)
class DecompositionResult:
    lam: int
    v: tuple[Fraction, ...]
    theta: tuple[Fraction, ...]
    critical_values: tuple[int, int]
    recovered_pair: tuple[Fraction, Fraction]

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "eigenvector": [A.format_angle(x) for x in self.v],
            "theta": [A.format_angle(x) for x in self.theta],
            "critical_values": list(self.critical_values),
            "recovered_pair": [A.format_angle(x) for x in self.recovered_pair],
        }


# ---------------------------------------------------------------------------
# curve construction
# ---------------------------------------------------------------------------


def build_equator(mating: Mating, complex_: CWComplex2) -> EquatorCurve | PinchReport:
    """The deformed equator through the postcritical classes, or a pinch report.

    Pinching occurs when a collapsing class contains two or more postcritical
    or critical points of one polynomial, and more generally whenever a curve
    point would touch the equator at two distinct positions.
    """
    partition = mating.essential_partition()
    # postcritical classes of the mating: collapsed classes containing a
    # postcritical point, plus uncollapsed postcritical points themselves
    p_classes: list[RayClass] = []
    seen_nodes = set()
    for tau in partition.tau_classes:
        if tau.postcritical_count >= 1:
            p_classes.append(tau)
            seen_nodes.update(tau.nodes)
    for side in (ALPHA, BETA):
        for p in mating.dendrites[side].postcritical():
            node = (side, p)
            if node not in seen_nodes:
                p_classes.append(mating._make_class({node}))
                seen_nodes.add(node)

    pinched: list[RayClass] = []
    reasons: list[str] = []
    for cls in partition.tau_classes:
        for side in (ALPHA, BETA):
            count = sum(
                1
                for s, p in cls.nodes
                if s == side
                and (
                    p in mating.dendrites[side].postcritical()
                    or p == mating.dendrites[side].critical_class
                )
            )
            if count >= 2:
                pinched.append(cls)
                reasons.append(f"class with {count} postcritical/critical points on {side}")
                break
    for cls in p_classes:
        if len(cls.positions()) > 1 and cls not in pinched:
            pinched.append(cls)
            reasons.append("postcritical class touches the equator at several positions")
    if pinched:
        return PinchReport(tuple(pinched), tuple(reasons))

    spots = {cls: cls.positions()[0] for cls in p_classes}
    order = sorted(p_classes, key=lambda c: spots[c])
    positions = tuple(spots[c] for c in order)

    # dynamics: image class of each point
    def image_class(cls: RayClass) -> RayClass:
        side, p = cls.nodes[0]
        img_node = mating.node_image((side, p))
        hit = partition.class_of_node(img_node)
        if hit is not None:
            return hit
        return mating._make_class({img_node})

    index_of = {cls.key: i for i, cls in enumerate(order)}
    dynamics = []
    for cls in order:
        img = image_class(cls)
        if img.key not in index_of:
            raise ConsistencyFailure("postcritical class maps outside the marked set")
        dynamics.append(index_of[img.key])

    critical_values = {}
    for side in (ALPHA, BETA):
        cv = mating.dendrites[side].critical_value
        hits = [i for i, cls in enumerate(order) if (side, cv) in cls.nodes]
        if len(hits) != 1:
            raise ConsistencyFailure("critical value class not uniquely marked")
        critical_values[side] = hits[0]

    edge_faces = _route_edges(mating, complex_, order, positions)
    return EquatorCurve(
        points=tuple(order),
        spots=positions,
        edge_faces=edge_faces,
        dynamics=tuple(dynamics),
        critical_value_indices=critical_values,
    )


def _route_edges(
    mating: Mating,
    complex_: CWComplex2,
    order: list[RayClass],
    positions: tuple[Fraction, ...],
) -> tuple[int, ...]:
    """Face containing each equator arc, read off the exit corners at the spots."""
    graph = complex_.graph

    def vertex_of_class(cls: RayClass) -> int:
        for i, v in enumerate(graph.vertices):
            if set(v.constituents) & set(cls.nodes):
                return i
        raise ConsistencyFailure("curve point is not a vertex of the complex")

    def exit_face(vi: int, pos: Fraction, sign: int) -> int:
        evs = graph.events[vi]
        n = len(evs)
        for k, ev in enumerate(evs):
            if ev[0] == "exit" and ev[1] == pos and ev[2] == sign:
                # the face swept at this corner: next dart event after the exit
                for j in range(1, n + 1):
                    nxt = evs[(k + j) % n]
                    if nxt[0] == "dart":
                        return complex_.face_of_dart(nxt[1])
        raise ConsistencyFailure(f"no equator exit at {pos} around vertex {vi}")

    n = len(order)
    faces = []
    for i in range(n):
        vi = vertex_of_class(order[i])
        vj = vertex_of_class(order[(i + 1) % n])
        f_out = exit_face(vi, positions[i], +1)
        f_in = exit_face(vj, positions[(i + 1) % n], -1)
        if f_out != f_in:
            raise ConsistencyFailure(
                "equator arc does not stay inside a single face; curve is blocked"
            )
        faces.append(f_out)
    return tuple(faces)


def separation_check(curve: EquatorCurve, complex_: CWComplex2) -> bool:
    """Removing the curve separates the remaining alpha skeleton from the beta one."""
    graph = complex_.graph
    curve_vertices = set()
    for cls in curve.points:
        for i, v in enumerate(graph.vertices):
            if set(v.constituents) & set(cls.nodes):
                curve_vertices.add(i)
    comp: dict[int, int] = {}
    cid = 0
    for start in range(len(graph.vertices)):
        if start in curve_vertices or start in comp:
            continue
        stack = [start]
        comp[start] = cid
        while stack:
            u = stack.pop()
            for d in graph.rotation[u]:
                w = graph.head(d)
                if w in curve_vertices or w in comp:
                    continue
                comp[w] = cid
                stack.append(w)
        cid += 1
    sides_by_comp: dict[int, set] = {}
    for vi, c in comp.items():
        sides_by_comp.setdefault(c, set()).update(graph.vertices[vi].sides)
    return all(len(s) == 1 for s in sides_by_comp.values())


# ---------------------------------------------------------------------------
# pullback of the curve
# ---------------------------------------------------------------------------


def pullback_curve(mating: Mating, curve: EquatorCurve, complex1: CWComplex2 | None = None) -> LiftedCurve:
    """The preimage curve, decomposed at the preimages of the marked points.

    Marked preimage points are the connected preimage components of the curve
    points; the two critical components touch the equator twice, producing the
    two self-crossings.
    """
    partition = mating.essential_partition()
    spot_index = {s: i for i, s in enumerate(curve.spots)}
    touches: list[Fraction] = []
    for s in curve.spots:
        touches.extend(A.halves(s))
    touches.sort()

    # group touches by the preimage component containing the touch's ray pair
    comp_of_touch: list[int] = []
    comp_keys: dict[tuple, int] = {}
    comps_per_point = {
        i: mating.preimage_components(curve.points[i]) for i in range(len(curve.points))
    }
    images: list[int] = []
    for y in touches:
        img = spot_index[A.double(y)]
        images.append(img)
        node = mating.node(ALPHA, y)
        hit = None
        for comp in comps_per_point[img]:
            if node in comp.nodes:
                hit = comp
                break
        if hit is None:
            raise ObstructedMating("curve preimage point missing from preimage components")
        if hit.key not in comp_keys:
            comp_keys[hit.key] = len(comp_keys)
        comp_of_touch.append(comp_keys[hit.key])

    seen: dict[int, int] = {}
    for g in comp_of_touch:
        seen[g] = seen.get(g, 0) + 1
    crossings = tuple(sorted(g for g, k in seen.items() if k > 1))
    if any(seen[g] > 2 for g in seen):
        raise ObstructedMating("curve preimage crosses itself more than twice at a point")
    return LiftedCurve(
        touches=tuple(touches),
        touch_image=tuple(images),
        touch_group=tuple(comp_of_touch),
        crossings=crossings,
    )


def replacement_matrix(curve: EquatorCurve, lifted: LiftedCurve) -> tuple[tuple[int, ...], ...]:
    """a[i][j] = number of sub-edges of the deformed edge E_i mapping onto E_j."""
    n = len(curve.points)
    touches = lifted.touches
    m = len(touches)
    pos_index = {t: k for k, t in enumerate(touches)}
    a = [[0] * n for _ in range(n)]
    for i in range(n):
        start = pos_index[curve.spots[i]]
        end = pos_index[curve.spots[(i + 1) % n]]
        k = start
        while True:
            a[i][lifted.touch_image[k]] += 1
            k = (k + 1) % m
            if k == end:
                break
    return tuple(tuple(r) for r in a)


# ---------------------------------------------------------------------------
# exact spectral data and angle recovery
# ---------------------------------------------------------------------------


def _is_irreducible(a) -> bool:
    n = len(a)
    for start in range(n):
        reach = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if a[i][j] and j not in reach:
                    reach.add(j)
                    stack.append(j)
        if len(reach) != n:
            return False
    return True


def _nullspace_positive(a, lam: int) -> tuple[Fraction, ...] | None:
    """A positive vector spanning ker(a - lam I), if the kernel is a line."""
    n = len(a)
    m = [[Fraction(a[i][j]) - (lam if i == j else 0) for j in range(n)] for i in range(n)]
    # Gaussian elimination to reduced row echelon form
    pivots = []
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for r in range(n):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    x = [Fraction(0)] * n
    x[free[0]] = Fraction(1)
    for r, col in enumerate(pivots):
        x[col] = -m[r][free[0]]
    if any(v <= 0 for v in x):
        x = [-v for v in x]
    if any(v <= 0 for v in x):
        return None
    total = sum(x)
    return tuple(v / total for v in x)


def leading_eigen(a, bound: int = 16) -> tuple[int, tuple[Fraction, ...]]:
    """Integer leading eigenvalue with its exact positive eigenvector (sum 1).

    Scans integer candidates 2..bound for a one-dimensional kernel of a - lam I
    with a positive vector; exact rational arithmetic throughout.
    """
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    if not _is_irreducible(a):
        raise ReducibleMatrix("replacement matrix is not irreducible")
    for lam in range(2, bound + 1):
        v = _nullspace_positive(a, lam)
        if v is not None:
            return lam, v
    raise NoIntegerEigenvalue(
        f"no integer eigenvalue in 2..{bound} with a positive eigenvector"
    )


def recover_angles(
    v: tuple[Fraction, ...], curve: EquatorCurve, lam: int = 2
) -> DecompositionResult:
    """Solve the doubling congruences for the marked angles and the angle pair.

    Edge i has length v[i]; with c_i the partial sums, every index forces
    theta_0 = c_{sigma(i)} - 2 c_i (mod 1), and all must agree.
    """
    n = len(curve.points)
    c = [Fraction(0)] * n
    for i in range(1, n):
        c[i] = c[i - 1] + v[i - 1]
    candidates = {(c[curve.dynamics[i]] - 2 * c[i]) % 1 for i in range(n)}
    if len(candidates) != 1:
        raise NoConsistentSolution(
            "doubling congruences disagree", residuals=sorted(candidates)
        )
    theta0 = candidates.pop()
    theta = tuple((theta0 + c[i]) % 1 for i in range(n))
    for i in range(n):
        if A.double(theta[i]) != theta[curve.dynamics[i]]:
            raise NoConsistentSolution("recovered angles break the doubling relation")
    ia = curve.critical_value_indices[ALPHA]
    ib = curve.critical_value_indices[BETA]
    pair = (theta[ia], (1 - theta[ib]) % 1)
    return DecompositionResult(
        lam=lam,
        v=tuple(v),
        theta=theta,
        critical_values=(ia, ib),
        recovered_pair=pair,
    )


def decompose(mating: Mating, complex_: CWComplex2, eigen_bound: int = 16):
    """Full pseudo-equator pipeline; returns PinchReport or (curve, matrix, result)."""
    curve = build_equator(mating, complex_)
    if isinstance(curve, PinchReport):
        return curve
    if not separation_check(curve, complex_):
        raise ConsistencyFailure("equator curve fails the separation check")
    lifted = pullback_curve(mating, curve)
    a = replacement_matrix(curve, lifted)
    lam, v = leading_eigen(a, eigen_bound)
    result = recover_angles(v, curve, lam)
    return curve, lifted, a, result
