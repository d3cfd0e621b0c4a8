from fractions import Fraction as F
from itertools import combinations

import pytest

from quadmating import angles as A
from quadmating.errors import NotOnTree
from quadmating.tree import (
    Dendrite,
    HubbardTree,
    JuliaPoint,
    build_tree,
    extend_marking,
    get_dendrite,
    lift_tree,
    on_tree,
)

ALPHA_CLASS = (F(1, 7), F(2, 7), F(4, 7))


@pytest.fixture(scope="module")
def d16():
    return get_dendrite(F(1, 6))


def brute_force_tree(theta):
    """Oracle: vertices from all postcritical triples, edges by betweenness."""
    d = get_dendrite(theta)
    points = list(d.postcritical())
    frontier = list(points)
    while frontier:
        nxt = []
        for a, b, c in combinations(points, 3):
            m = d.triod_middle(a, b, c)
            if m not in points:
                points.append(m)
                nxt.append(m)
        for p in list(points):
            img = d.image(p)
            if img not in points:
                points.append(img)
                nxt.append(img)
        frontier = nxt
    edges = set()
    for u, w in combinations(points, 2):
        if not any(d.between(m, u, w) for m in points if m not in (u, w)):
            edges.add(frozenset((u, w)))
    return set(points), edges


class TestClasses:
    def test_singletons(self, d16):
        assert d16.class_of(F(1, 6)) == (F(1, 6),)
        assert d16.class_of(F(1, 3)) == (F(1, 3),)
        assert d16.class_of(F(5, 6)) == (F(5, 6),)

    def test_branch_class(self, d16):
        assert d16.class_of(F(1, 7)) == ALPHA_CLASS
        assert d16.class_of(F(2, 7)) == ALPHA_CLASS

    def test_critical_class(self, d16):
        assert d16.critical_class.angles == (F(1, 12), F(7, 12))

    def test_preimage_classes(self, d16):
        assert d16.class_of(F(1, 14)) == (F(1, 14), F(9, 14), F(11, 14))
        assert d16.class_of(F(1, 24)) == (F(1, 24), F(19, 24))

    def test_image_closure(self, d16):
        p = d16.point(F(1, 14))
        assert d16.image(p).angles == ALPHA_CLASS

    def test_two_ray_critical_value(self):
        # a parameter whose critical value carries two rays
        d = get_dendrite(F(5, 12))
        assert d.class_of(F(5, 12)) == (F(5, 12), F(7, 12))


class TestTriod:
    def test_postcritical_triple(self, d16):
        c1, c2, c3 = (d16.point(t) for t in (F(1, 6), F(1, 3), F(2, 3)))
        assert d16.triod_middle(c1, c2, c3).angles == ALPHA_CLASS

    def test_degenerate(self, d16):
        a, b = d16.point(F(1, 6)), d16.point(F(1, 3))
        assert d16.triod_middle(a, a, b) == a

    def test_middle_at_critical_class(self, d16):
        alpha = d16.point(F(1, 7))
        c3 = d16.point(F(2, 3))
        assert d16.triod_middle(alpha, c3, d16.critical_class) == d16.critical_class

    def test_symmetry(self, d16):
        pts = [d16.point(t) for t in (F(1, 6), F(1, 3), F(2, 3))]
        expected = d16.triod_middle(*pts)
        import itertools

        for perm in itertools.permutations(pts):
            assert d16.triod_middle(*perm) == expected


class TestBuildTree:
    def test_tripod_16(self):
        tree = build_tree(F(1, 6))
        assert len(tree.vertices) == 4 and len(tree.edges) == 3
        branch = [tree.vertices[i] for i in tree.branch_set]
        assert len(branch) == 1 and branch[0].angles == ALPHA_CLASS
        alpha_idx = tree.vertices.index(branch[0])
        assert all(alpha_idx in e for e in tree.edges)

    def test_tree_14_matches_oracle(self):
        # the oracle places a branch point here (the triple's middle is a new
        # fixed class, not one of the three postcritical points)
        tree = build_tree(F(1, 4))
        pts, edges = brute_force_tree(F(1, 4))
        assert set(tree.vertices) == pts
        assert {frozenset((tree.vertices[i], tree.vertices[j])) for i, j in tree.edges} == edges
        assert any(v.angles == ALPHA_CLASS for v in tree.vertices)

    def test_star_78(self):
        tree = build_tree(F(7, 8))
        assert len(tree.vertices) == 5 and len(tree.edges) == 4
        center = [v for i, v in enumerate(tree.vertices) if i in tree.branch_set]
        assert len(center) == 1
        assert center[0].angles == (F(7, 15), F(11, 15), F(13, 15), F(14, 15))

    @pytest.mark.parametrize("theta", [F(1, 6), F(1, 4), F(1, 2), F(7, 8), F(5, 6), F(13, 14), F(5, 12)])
    def test_matches_brute_force(self, theta):
        tree = build_tree(theta)
        pts, edges = brute_force_tree(theta)
        assert set(tree.vertices) == pts
        assert {frozenset((tree.vertices[i], tree.vertices[j])) for i, j in tree.edges} == edges

    @pytest.mark.parametrize("theta", [F(1, 6), F(7, 8), F(13, 14), F(3, 10), F(5, 12)])
    def test_invariants(self, theta):
        tree = build_tree(theta)
        d = tree.dendrite
        assert len(tree.edges) == len(tree.vertices) - 1
        for i, v in enumerate(tree.vertices):
            img = tree.vertices[tree.dynamics[i]]
            assert set(A.double(t) for t in v.angles) <= set(img.angles)
            if i in tree.branch_set:
                assert len(v.angles) >= 3
        for p in d.postcritical():
            assert p in tree.vertices
        # rotation at each vertex follows ascending sector order
        for i, v in enumerate(tree.vertices):
            rot = tree.rotation[i]
            if len(v.angles) > 1 and len(rot) > 1:
                keys = [v.angles[d.locate(v.angles, tree.vertices[n].angles)] for n in rot]
                m = keys.index(min(keys))
                assert keys[m:] + keys[:m] == sorted(keys)


class TestOnTree:
    def test_vertex_is_on_tree(self, d16):
        tree = build_tree(F(1, 6))
        assert on_tree(tree, d16.point(F(1, 7)))

    def test_critical_class_on_tree(self, d16):
        tree = build_tree(F(1, 6))
        assert on_tree(tree, d16.critical_class)

    def test_off_tree_point(self, d16):
        tree = build_tree(F(1, 6))
        assert not on_tree(tree, d16.point(F(5, 6)))


class TestExtendMarking:
    def test_add_critical_class(self, d16):
        tree = build_tree(F(1, 6))
        bigger = extend_marking(tree, {d16.critical_class})
        assert len(bigger.vertices) == 5 and len(bigger.edges) == 4
        k = bigger.vertices.index(d16.critical_class)
        alpha = bigger.vertices.index(d16.point(F(1, 7)))
        c3 = bigger.vertices.index(d16.point(F(2, 3)))
        assert (min(alpha, k), max(alpha, k)) in bigger.edges
        assert (min(c3, k), max(c3, k)) in bigger.edges

    def test_idempotent_on_existing_vertex(self):
        tree = build_tree(F(1, 6))
        again = extend_marking(tree, {tree.vertices[0]})
        assert again.vertices == tree.vertices and again.edges == tree.edges

    def test_rejects_off_tree(self, d16):
        tree = build_tree(F(1, 6))
        with pytest.raises(NotOnTree):
            extend_marking(tree, {d16.point(F(5, 6))})


class TestLiftTree:
    def test_doubled_tripod(self, d16):
        tree = build_tree(F(1, 6))
        doubled = lift_tree(tree)
        assert len(doubled.vertices) == 2 * len(tree.vertices) - 1
        assert len(doubled.edges) == 2 * len(tree.edges)
        k = doubled.vertices[doubled.critical_index]
        assert k.angles == (F(1, 12), F(7, 12))

    @pytest.mark.parametrize("theta", [F(1, 6), F(1, 4), F(7, 8), F(13, 14)])
    def test_two_components_project_bijectively(self, theta):
        tree = build_tree(theta)
        doubled = lift_tree(tree)
        # components after removing the critical class, by symbol
        for sym in ("1", "0"):
            part = [i for i, s in enumerate(doubled.symbols) if s == sym]
            proj = [doubled.projection[i] for i in part]
            assert sorted(proj) == sorted(set(proj))
            assert len(part) + 1 == len(tree.vertices) or len(part) == len(tree.vertices)
        # base classes embed (forward invariance)
        assert set(tree.vertices) <= set(doubled.vertices)

    def test_lifted_edges_subdivide_base(self):
        # the lifted tree of the tripod subdivides the long leg in the order
        # branch point, critical class, its preimage, then the far endpoint
        tree = build_tree(F(1, 6))
        doubled = lift_tree(tree)
        d = tree.dendrite
        k = d.critical_class
        neg_alpha = d.point(F(1, 14))
        alpha = d.point(F(1, 7))
        c3 = d.point(F(2, 3))
        assert d.between(k, alpha, neg_alpha)
        assert d.between(neg_alpha, k, c3)
        idx = {p: i for i, p in enumerate(doubled.vertices)}
        edge_set = {frozenset(e) for e in doubled.edges}
        assert frozenset((idx[alpha], idx[k])) in edge_set
        assert frozenset((idx[k], idx[neg_alpha])) in edge_set
        assert frozenset((idx[neg_alpha], idx[c3])) in edge_set
