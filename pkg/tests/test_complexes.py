from fractions import Fraction as F

import pytest

from quadmating.complexes import (
    assemble_graph,
    pullback_complex,
    quotient_complex,
    side_data_from_tree,
    single_tree_skeleton,
    trace_faces,
)
from quadmating.errors import (
    CriterionFailed,
    DisconnectedSkeleton,
    ObstructedMating,
)
from quadmating.mating import ALPHA, BETA, Mating
from quadmating.rules import check_subdivision, extract_rule, iterate_rule
from quadmating.tree import build_tree


@pytest.fixture(scope="module")
def m66():
    return Mating(F(1, 6), F(1, 6))


@pytest.fixture(scope="module")
def C66(m66):
    return quotient_complex(m66, build_tree(F(1, 6)), build_tree(F(1, 6)))


@pytest.fixture(scope="module")
def m78(authoritative=None):
    return Mating(F(7, 8), F(1, 4))


@pytest.fixture(scope="module")
def C78(m78):
    return quotient_complex(m78, build_tree(F(7, 8)), build_tree(F(1, 4)))


class TestQuotientComplex:
    def test_66_counts(self, C66):
        assert C66.counts == (6, 6, 2)
        assert sorted(C66.face_sizes) == [4, 8]

    def test_66_merges(self, C66):
        merged = [v for v in C66.graph.vertices if len(v.constituents) == 2]
        assert len(merged) == 2
        sets = {frozenset((s, p.angles) for s, p in v.constituents) for v in merged}
        assert frozenset({(ALPHA, (F(1, 3),)), (BETA, (F(2, 3),))}) in sets
        assert frozenset({(ALPHA, (F(2, 3),)), (BETA, (F(1, 3),))}) in sets

    def test_dart_sum(self, C66):
        assert sum(C66.face_sizes) == 2 * len(C66.graph.edges)

    def test_disconnected_when_formal(self):
        m = Mating(F(1, 6), F(7, 8))
        with pytest.raises(DisconnectedSkeleton):
            quotient_complex(m, build_tree(F(1, 6)), build_tree(F(7, 8)))

    def test_78_14_connected(self, C78):
        v, e, f = C78.counts
        assert v - e + f == 2
        assert min(C78.face_sizes) >= 3


class TestDigonRepair:
    def test_synthetic_digon(self):
        # two single-edge trees glued at both endpoints bound two digon faces
        from quadmating.complexes import digon_repair

        tree = build_tree(F(1, 2))
        d = tree.dendrite
        p0, p1 = tree.vertices
        sides = {ALPHA: side_data_from_tree(tree), BETA: side_data_from_tree(tree)}
        groups = [
            frozenset({(ALPHA, p0), (BETA, p0)}),
            frozenset({(ALPHA, p1), (BETA, p1)}),
        ]
        graph = assemble_graph(sides, (), groups)
        raw = trace_faces(
            graph, kind="synthetic", trees={ALPHA: tree, BETA: tree}, sides=sides
        )
        assert raw.face_sizes == (2, 2)
        repaired = digon_repair(raw, None)
        assert min(repaired.face_sizes) >= 3
        v, e, f = repaired.counts
        assert v - e + f == 2
        # exactly one preperiodic class was added to one side
        total = sum(len(t.vertices) for t in repaired.trees.values())
        assert total == 2 * len(tree.vertices) + 1

    def test_no_digons_is_identity(self, m66, C66):
        from quadmating.complexes import digon_repair

        again = digon_repair(C66, m66)
        assert again.counts == C66.counts


class TestPullback:
    def test_66_census(self, m66, C66):
        C1 = pullback_complex(m66, C66)
        assert C1.counts == (10, 12, 4)
        assert sorted(C1.face_sizes) == [4, 4, 8, 8]

    def test_obstructed_raises(self, m78, C78):
        with pytest.raises(ObstructedMating):
            pullback_complex(m78, C78)

    def test_face_count_conservation(self, m66, C66):
        # every pullback face nests inside exactly one base face, and the
        # per-face counts sum to the pullback face count
        C1 = pullback_complex(m66, C66)
        ok, emb = check_subdivision(C66, C1)
        assert ok
        per_face = {}
        for fi, owner in emb.containment.items():
            per_face[owner] = per_face.get(owner, 0) + 1
        assert sum(per_face.values()) == len(C1.faces)


class TestCheckSubdivision:
    def test_66_true(self, m66, C66):
        C1 = pullback_complex(m66, C66)
        ok, emb = check_subdivision(C66, C1)
        assert ok
        for e_idx in range(len(C66.graph.edges)):
            assert len(emb.edge_paths[e_idx]) >= 1

    def test_78_14_attempt_false(self, m78, C78):
        C1 = pullback_complex(m78, C78, enforce_clean=False)
        ok, failure = check_subdivision(C78, C1)
        assert not ok
        assert failure.reason

    def test_self_identity(self, C66):
        ok, emb = check_subdivision(C66, C66, subdivision_map="identity")
        assert ok
        assert emb.vertex_map == {i: i for i in range(len(C66.graph.vertices))}


class TestExtractRule:
    def test_66_rule(self, m66, C66):
        C1 = pullback_complex(m66, C66)
        ok, emb = check_subdivision(C66, C1)
        rule = extract_rule(C66, C1, emb)
        assert rule.tile_names == ("4-gon", "8-gon")
        assert rule.matrix == ((0, 1), (2, 1))
        assert not rule.ambiguous_words

    def test_identity_rule(self, C66):
        ok, emb = check_subdivision(C66, C66, subdivision_map="identity")
        rule = extract_rule(C66, C66, emb, subdivision_map="identity")
        n = len(rule.tile_names)
        assert rule.matrix == tuple(
            tuple(1 if i == j else 0 for j in range(n)) for i in range(n)
        )

    def test_66_iteration(self, m66, C66):
        C1 = pullback_complex(m66, C66)
        _, emb = check_subdivision(C66, C1)
        rule = extract_rule(C66, C1, emb)
        censuses, complexes = iterate_rule(rule, 4)
        assert censuses == [(1, 1), (2, 2), (4, 4), (8, 8), (16, 16)]
        # explicit complexes carry Euler-valid structure at every level
        assert complexes[1].counts == (10, 12, 4)
        for x in complexes:
            v, e, f = x.counts
            assert v - e + f == 2
            assert sum(x.face_sizes) == 2 * e

    def test_level2_explicit_census_matches_matrix(self, m66, C66):
        C1 = pullback_complex(m66, C66)
        _, emb = check_subdivision(C66, C1)
        rule = extract_rule(C66, C1, emb)
        censuses, complexes = iterate_rule(rule, 2)
        assert complexes[2].census(2) == censuses[2] == (4, 4)


class TestSingleTree:
    def test_78_14_ten_gon(self, m78):
        Cs = single_tree_skeleton(m78, ALPHA)
        assert Cs.counts == (6, 5, 1)
        assert Cs.face_sizes == (10,)

    def test_78_14_rule(self, m78):
        Cs = single_tree_skeleton(m78, ALPHA)
        C1 = pullback_complex(m78, Cs)
        assert sorted(C1.face_sizes) == [10, 10]
        ok, emb = check_subdivision(Cs, C1)
        assert ok
        rule = extract_rule(Cs, C1, emb)
        assert rule.tile_names == ("10-gon",)
        assert rule.matrix == ((2,),)
        censuses, complexes = iterate_rule(rule, 3)
        assert [c[0] for c in censuses] == [1, 2, 4, 8]
        for x in complexes:
            assert set(x.face_sizes) == {10}

    def test_66_criterion_fails(self, m66):
        with pytest.raises(CriterionFailed) as exc:
            single_tree_skeleton(m66, ALPHA)
        assert "contains postcritical set" in exc.value.conditions

    def test_euler_identity(self, m78):
        Cs = single_tree_skeleton(m78, ALPHA)
        v, e, f = Cs.counts
        assert v - e + f == 2
        assert sum(Cs.face_sizes) == 2 * e


class TestRotationConsistency:
    @pytest.mark.parametrize("pair", [(F(1, 6), F(1, 6)), (F(7, 8), F(1, 4))])
    def test_faces_close_under_rotation(self, pair):
        m = Mating(*pair)
        C = quotient_complex(m, build_tree(pair[0]), build_tree(pair[1]))
        # reversal followed by rotation-successor generates exactly F cycles
        assert sum(C.face_sizes) == 2 * len(C.graph.edges)
        assert len({d for f in C.faces for d in f}) == 2 * len(C.graph.edges)
