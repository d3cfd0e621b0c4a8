"""Ray structure of the formal mating and the essential identifications.

The glued sphere carries two hemispheres; the equator identifies the alpha
angle t with the beta angle 1-t.  Connected graphs of external rays are
modelled as closures of landing classes under that gluing.  The classes that
meet the critical orbit form the essential identifications; their preimage
structure drives the obstruction criterion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import angles as A
from .errors import ClosureDepthExceeded, InvalidMating
from .tree import HubbardTree, JuliaPoint, on_tree

ALPHA = "alpha"
BETA = "beta"
SIDES = (ALPHA, BETA)

RayNode = tuple[str, JuliaPoint]  # (side, landing class)


def other_side(side: str) -> str:
    return BETA if side == ALPHA else ALPHA


def position(side: str, t: Fraction) -> Fraction:
    """Circle coordinate of a ray endpoint: alpha t at t, beta s at 1-s."""
    return t if side == ALPHA else (1 - t) % 1


@dataclass(frozen=True)
class RayClass:
    """A connected graph of external rays, as landing classes on both sides."""

    nodes: tuple[RayNode, ...]
    postcritical_count: int
    contains_critical_orbit: bool
    generation: int | None = None

    @property
    def key(self) -> tuple:
        return tuple((s, p.angles) for s, p in self.nodes)

    def support(self, side: str) -> tuple[Fraction, ...]:
        return tuple(
            sorted(t for s, p in self.nodes for t in p.angles if s == side)
        )

    @property
    def min_angle(self) -> Fraction:
        return min(t for _, p in self.nodes for t in p.angles)

    def positions(self) -> tuple[Fraction, ...]:
        """Equator touch positions of the class (each ray pair touches once)."""
        return tuple(
            sorted({position(s, t) for s, p in self.nodes for t in p.angles})
        )

    def to_json_dict(self) -> dict:
        d = {
            "nodes": [
                {"side": s, "angles": [A.format_angle(t) for t in p.angles]}
                for s, p in self.nodes
            ],
            "postcritical_count": self.postcritical_count,
            "contains_critical_orbit": self.contains_critical_orbit,
        }
        if self.generation is not None:
            d["generation"] = self.generation
        return d


@dataclass(frozen=True)
class EssentialPartition:
    """The finite set of collapsing classes, stratified by preimage depth."""

    l_classes: tuple[RayClass, ...]
    tau_classes: tuple[RayClass, ...]

    def class_of_node(self, node: RayNode) -> RayClass | None:
        for tau in self.tau_classes:
            if node in tau.nodes:
                return tau
        return None

    def to_json_dict(self) -> dict:
        return {
            "l_classes": [c.to_json_dict() for c in self.l_classes],
            "tau_classes": [c.to_json_dict() for c in self.tau_classes],
        }


@dataclass(frozen=True)
class ObstructionWitness:
    x: RayNode
    y: RayNode
    tau_index: int

    def to_json_dict(self) -> dict:
        return {
            "x": {"side": self.x[0], "angles": [A.format_angle(t) for t in self.x[1].angles]},
            "y": {"side": self.y[0], "angles": [A.format_angle(t) for t in self.y[1].angles]},
            "tau_index": self.tau_index,
        }


@dataclass(frozen=True)
class ObstructionReport:
    status: str  # "clean" | "obstructed"
    witnesses: tuple[ObstructionWitness, ...]

    @property
    def obstructed(self) -> bool:
        return self.status == "obstructed"

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "witnesses": [w.to_json_dict() for w in self.witnesses],
        }


@dataclass(frozen=True)
class MatingSpec:
    """An angle pair with its admissibility record."""

    theta_alpha: Fraction
    theta_beta: Fraction
    misiurewicz_alpha: bool
    misiurewicz_beta: bool
    in_conjugate_limbs: bool

    @property
    def valid(self) -> bool:
        return self.misiurewicz_alpha and self.misiurewicz_beta and not self.in_conjugate_limbs

    def theta(self, side: str) -> Fraction:
        return self.theta_alpha if side == ALPHA else self.theta_beta

    def to_json_dict(self) -> dict:
        return {
            "theta_alpha": A.format_angle(self.theta_alpha),
            "theta_beta": A.format_angle(self.theta_beta),
            "misiurewicz_alpha": self.misiurewicz_alpha,
            "misiurewicz_beta": self.misiurewicz_beta,
            "conjugate_limbs": self.in_conjugate_limbs,
            "valid": self.valid,
        }


def validate(theta_alpha: Fraction, theta_beta: Fraction, limb_bound: int = 64) -> MatingSpec:
    """Admissibility gate; raises InvalidMating when the pair is rejected."""
    ma = A.is_misiurewicz_angle(theta_alpha)
    mb = A.is_misiurewicz_angle(theta_beta)
    conj = A.conjugate_limbs(theta_alpha, theta_beta, limb_bound) if ma and mb else False
    spec = MatingSpec(theta_alpha, theta_beta, ma, mb, conj)
    if not (ma and mb):
        bad = [A.format_angle(t) for t, ok in ((theta_alpha, ma), (theta_beta, mb)) if not ok]
        raise InvalidMating("NotMisiurewicz", ", ".join(bad))
    if conj:
        raise InvalidMating(
            "ConjugateLimbs",
            f"{A.format_angle(theta_alpha)} and {A.format_angle(theta_beta)}",
        )
    return spec


class Mating:
    """Computation context of one admissible mating: dendrites, classes, closures."""

    def __init__(
        self,
        theta_alpha: Fraction,
        theta_beta: Fraction,
        closure_bound: int = 10_000,
        generation_bound: int = 64,
        limb_bound: int = 64,
    ):
        self.spec = validate(theta_alpha, theta_beta, limb_bound)
        self.closure_bound = closure_bound
        self.generation_bound = generation_bound
        from .tree import get_dendrite

        self.dendrites = {ALPHA: get_dendrite(theta_alpha), BETA: get_dendrite(theta_beta)}
        self._postcritical = {
            s: frozenset(self.dendrites[s].postcritical()) for s in SIDES
        }
        self._critical_orbit = {
            s: frozenset(self.dendrites[s].critical_orbit()) for s in SIDES
        }
        self._partition: EssentialPartition | None = None
        self._obstruction: dict[tuple, ObstructionReport] = {}

    # -- nodes -------------------------------------------------------------

    def node(self, side: str, t: Fraction) -> RayNode:
        return (side, self.dendrites[side].point(t))

    def is_postcritical(self, node: RayNode) -> bool:
        return node[1] in self._postcritical[node[0]]

    def is_critical_orbit(self, node: RayNode) -> bool:
        return node[1] in self._critical_orbit[node[0]]

    def node_image(self, node: RayNode) -> RayNode:
        side, p = node
        return (side, self.dendrites[side].image(p))

    def _make_class(self, nodes: "set[RayNode]", generation: int | None = None) -> RayClass:
        ordered = tuple(sorted(nodes, key=lambda n: (n[0], n[1].angles)))
        return RayClass(
            nodes=ordered,
            postcritical_count=sum(1 for n in ordered if self.is_postcritical(n)),
            contains_critical_orbit=any(self.is_critical_orbit(n) for n in ordered),
            generation=generation,
        )

    # -- closures ------------------------------------------------------------

    def ray_component(self, seed: RayNode, depth_bound: int | None = None) -> RayClass:
        """Closure of the seed under equator gluing and co-landing."""
        bound = depth_bound if depth_bound is not None else self.closure_bound
        seen: set[RayNode] = {seed}
        frontier = [seed]
        joins = 0
        while frontier:
            side, p = frontier.pop()
            for t in p.angles:
                joins += 1
                if joins > bound:
                    raise ClosureDepthExceeded(
                        f"ray closure exceeded {bound} joins; raise the bound"
                    )
                partner = self.node(other_side(side), (1 - t) % 1)
                if partner not in seen:
                    seen.add(partner)
                    frontier.append(partner)
        return self._make_class(seen)

    # same closure, distinct name: no postcritical filtering is applied here either,
    # but this is the entry point used by the obstruction machinery
    tilde_t_component = ray_component

    def postcritical_components(self) -> tuple[RayClass, ...]:
        """Ray-graph components seeded at postcritical points with >= 2 postcritical members."""
        out: list[RayClass] = []
        seen_keys: set[tuple] = set()
        for side in SIDES:
            for p in sorted(self._postcritical[side], key=lambda p: p.angles):
                comp = self.ray_component((side, p))
                if comp.key in seen_keys:
                    continue
                seen_keys.add(comp.key)
                if comp.postcritical_count >= 2:
                    out.append(comp)
        out.sort(key=lambda c: c.min_angle)
        return tuple(out)

    def preimage_components(self, cls: RayClass) -> tuple[RayClass, ...]:
        """Connected components of the doubling preimage of a ray class.

        Preimage points are the landing classes of the halved support angles;
        the components are taken under equator gluing among those points.
        """
        points: dict[RayNode, int] = {}
        for side, p in cls.nodes:
            for t in p.angles:
                for h in A.halves(t):
                    node = self.node(side, h)
                    if node not in points:
                        points[node] = len(points)
        parent = list(range(len(points)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i: int, j: int) -> None:
            parent[find(i)] = find(j)

        for node, i in points.items():
            side, p = node
            for t in p.angles:
                partner = self.node(other_side(side), (1 - t) % 1)
                if partner not in points:
                    raise ClosureDepthExceeded("preimage point set is not glue-closed")
                union(i, points[partner])
        groups: dict[int, set[RayNode]] = {}
        for node, i in points.items():
            groups.setdefault(find(i), set()).add(node)
        comps = [self._make_class(g) for g in groups.values()]
        comps.sort(key=lambda c: c.min_angle)
        return tuple(comps)

    # -- essential identifications -----------------------------------------

    def essential_partition(self) -> EssentialPartition:
        """All ray classes in the iterated preimages of the postcritical graphs
        that meet the critical orbit, stratified by preimage depth."""
        if self._partition is not None:
            return self._partition
        ls = tuple(
            RayClass(c.nodes, c.postcritical_count, c.contains_critical_orbit, 0)
            for c in self.postcritical_components()
        )
        taus: list[RayClass] = list(ls)
        seen = {c.key for c in taus}
        frontier: list[RayClass] = list(ls)
        gen = 0
        while frontier:
            gen += 1
            if gen > self.generation_bound:
                raise ClosureDepthExceeded(
                    f"essential classes did not stabilize within {self.generation_bound} generations"
                )
            nxt: list[RayClass] = []
            for cls in frontier:
                for comp in self.preimage_components(cls):
                    if comp.key in seen:
                        continue
                    if comp.contains_critical_orbit:
                        seen.add(comp.key)
                        tagged = RayClass(
                            comp.nodes, comp.postcritical_count, True, gen
                        )
                        taus.append(tagged)
                        nxt.append(tagged)
            frontier = nxt
        taus.sort(key=lambda c: (c.generation, c.min_angle))
        self._partition = EssentialPartition(l_classes=ls, tau_classes=tuple(taus))
        return self._partition

    # -- obstruction ---------------------------------------------------------

    def obstruction_check(
        self, tree_alpha: HubbardTree, tree_beta: HubbardTree
    ) -> ObstructionReport:
        """Search the preimages of the essential classes for tree points that are
        glued by the topological mating but not by the essential one."""
        cache_key = (tree_alpha.vertices, tree_beta.vertices)
        if cache_key in self._obstruction:
            return self._obstruction[cache_key]
        trees = {ALPHA: tree_alpha, BETA: tree_beta}
        partition = self.essential_partition()
        witnesses: list[ObstructionWitness] = []
        for idx, tau in enumerate(partition.tau_classes):
            for comp in self.preimage_components(tau):
                members_on_tree = [
                    n for n in comp.nodes if on_tree(trees[n[0]], n[1])
                ]
                if len(members_on_tree) < 2:
                    continue
                groups: dict[tuple, list[RayNode]] = {}
                for n in members_on_tree:
                    cls = partition.class_of_node(n)
                    gkey = cls.key if cls is not None else ("single", n[0], n[1].angles)
                    groups.setdefault(gkey, []).append(n)
                if len(groups) >= 2:
                    reps = sorted(
                        (min(g, key=lambda n: n[1].angles) for g in groups.values()),
                        key=lambda n: n[1].angles,
                    )
                    witnesses.append(ObstructionWitness(reps[0], reps[1], idx))
        report = ObstructionReport(
            status="obstructed" if witnesses else "clean",
            witnesses=tuple(witnesses),
        )
        self._obstruction[cache_key] = report
        return report
