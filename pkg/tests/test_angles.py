import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadmating import angles as A
from quadmating.errors import LimbNotFound


def itinerary_window_equal(a, b):
    """Independent equality oracle: compare over max preperiods + lcm of periods."""
    n = max(len(a.preperiodic), len(b.preperiodic)) + math.lcm(
        len(a.periodic), len(b.periodic)
    )
    return a.prefix(n) == b.prefix(n) and a.symbol_at(n) == b.symbol_at(n)


small_rationals = st.builds(
    lambda n, d: F(n % d, d), st.integers(0, 10**6), st.integers(1, 2000)
)


class TestDoubleHalves:
    def test_double_examples(self):
        assert A.double(F(1, 6)) == F(1, 3)
        assert A.double(F(0)) == F(0)
        assert A.double(F(13, 14)) == F(6, 7)

    def test_halves_examples(self):
        assert A.halves(F(1, 3)) == (F(1, 6), F(2, 3))
        assert A.halves(F(1, 6)) == (F(1, 12), F(7, 12))
        assert A.halves(F(0)) == (F(0), F(1, 2))

    @given(small_rationals)
    def test_halves_are_preimages(self, t):
        lo, hi = A.halves(t)
        assert lo < hi
        assert A.double(lo) == t and A.double(hi) == t

    @given(small_rationals)
    def test_halves_denominator_growth(self, t):
        for h in A.halves(t):
            assert h.denominator <= 2 * t.denominator


class TestOrbit:
    def test_orbit_examples(self):
        info = A.orbit(F(1, 6))
        assert (info.preperiod, info.period) == (1, 2)
        assert info.orbit == (F(1, 6), F(1, 3), F(2, 3))
        assert A.orbit(F(0)) == A.OrbitInfo(0, 1, (F(0),))
        info = A.orbit(F(13, 14))
        assert (info.preperiod, info.period) == (1, 3)
        assert info.orbit == (F(13, 14), F(6, 7), F(5, 7), F(3, 7))

    @given(small_rationals)
    def test_orbit_minimality_and_bound(self, t):
        info = A.orbit(t)
        assert len(info.orbit) == info.preperiod + info.period <= t.denominator
        for i in range(len(info.orbit) - 1):
            assert info.orbit[i + 1] == A.double(info.orbit[i])
        assert A.double(info.orbit[-1]) == info.orbit[info.preperiod]

    @given(small_rationals)
    def test_orbit_shift(self, t):
        a, b = A.orbit(t), A.orbit(A.double(t))
        assert b.preperiod == max(0, a.preperiod - 1)
        assert b.period == a.period


class TestMisiurewicz:
    @pytest.mark.parametrize(
        "t,expected",
        [(F(1, 6), True), (F(1, 3), False), (F(7, 8), True), (F(0), False)],
    )
    def test_examples(self, t, expected):
        assert A.is_misiurewicz_angle(t) is expected

    @given(small_rationals)
    def test_matches_orbit(self, t):
        assert A.is_misiurewicz_angle(t) == (A.orbit(t).preperiod >= 1)


class TestItinerary:
    def test_critical_value_itinerary(self):
        it = A.itinerary(F(1, 6), F(1, 6))
        # the sequence 1,1,0,1,0,... in canonical minimal form
        assert it.prefix(6) == ("1", "1", "0", "1", "0", "1")

    def test_partition_point_is_star(self):
        it = A.itinerary(F(1, 6), F(1, 12))
        assert it.symbol_at(0) == A.STAR
        ref = A.itinerary(F(1, 6), F(1, 6))
        assert it.prefix(5)[1:] == ref.prefix(4)

    def test_periodic_point(self):
        it = A.itinerary(F(1, 6), F(3, 7))
        assert it.preperiodic == ()
        assert it.periodic == ("1", "0", "0")

    def test_requires_preperiodic_parameter(self):
        with pytest.raises(ValueError):
            A.itinerary(F(1, 3), F(1, 6))


class TestCoLanding:
    def test_examples(self):
        assert A.co_lands(F(1, 6), F(1, 12), F(7, 12))
        assert not A.co_lands(F(1, 6), F(1, 3), F(2, 3))

    def test_fixed_branch_class_regression(self):
        # oracle-fixed: the three rays of the fixed branch point share the
        # all-ones itinerary, hence land together
        for t in (F(1, 7), F(2, 7), F(4, 7)):
            it = A.itinerary(F(1, 6), t)
            assert it.preperiodic == () and it.periodic == ("1",)
        assert A.co_lands(F(1, 6), F(1, 7), F(2, 7))
        assert A.co_lands(F(1, 6), F(2, 7), F(4, 7))

    def test_structural_equality_matches_window_oracle(self):
        theta = F(1, 6)
        pool = [F(n, d) for d in range(1, 30) for n in range(d)]
        pool = [t % 1 for t in pool]
        for t in pool[:200]:
            for u in pool[:60]:
                same = A.itinerary(theta, t) == A.itinerary(theta, u)
                assert same == itinerary_window_equal(
                    A.itinerary(theta, t), A.itinerary(theta, u)
                )

    def test_critical_halves_co_land(self):
        for theta in (F(1, 6), F(7, 8), F(1, 4), F(13, 14), F(5, 12)):
            lo, hi = A.halves(theta)
            assert A.co_lands(theta, lo, hi)


class TestLandingPartition:
    def test_examples(self):
        blocks = A.landing_partition(F(1, 6), {F(1, 12), F(7, 12), F(1, 6)})
        assert blocks == ((F(1, 12), F(7, 12)), (F(1, 6),))
        assert A.landing_partition(F(1, 6), {F(1, 3)}) == ((F(1, 3),),)
        blocks = A.landing_partition(F(1, 6), {F(1, 3), F(2, 3), F(5, 6)})
        assert blocks == ((F(1, 3),), (F(2, 3),), (F(5, 6),))


def brute_force_rotation_orbits(q):
    """All period-q doubling orbits acting as circular rotations, by enumeration."""
    den = (1 << q) - 1
    seen = set()
    out = {}
    for k in range(den):
        t = F(k, den)
        if t in seen:
            continue
        orb = [t]
        x = A.double(t)
        while x != t:
            orb.append(x)
            x = A.double(x)
        seen.update(orb)
        if len(orb) != q:
            continue
        sorted_orb = sorted(orb)
        idx = {v: i for i, v in enumerate(sorted_orb)}
        shifts = {(idx[A.double(v)] - idx[v]) % q for v in sorted_orb}
        if len(shifts) == 1:
            p = shifts.pop()
            if 0 < p < q and math.gcd(p, q) == 1:
                out[F(p, q)] = tuple(sorted_orb)
    return out


class TestLimb:
    def test_rotation_orbits_against_enumeration(self):
        for q in range(2, 9):
            oracle = brute_force_rotation_orbits(q)
            for p in range(1, q):
                if math.gcd(p, q) != 1:
                    continue
                assert A.rotation_orbit(p, q) == oracle[F(p, q)]

    def test_wake_examples(self):
        lid = A.limb(F(1, 6))
        assert lid.rotation_number == F(1, 3) and lid.wake == (F(1, 7), F(2, 7))
        lid = A.limb(F(1, 4))
        assert lid.rotation_number == F(1, 3) and lid.wake == (F(1, 7), F(2, 7))
        lid = A.limb(F(3, 4))
        assert lid.rotation_number == F(2, 3) and lid.wake == (F(5, 7), F(6, 7))

    def test_wake_width(self):
        for q in range(2, 10):
            for p in range(1, q):
                if math.gcd(p, q) == 1:
                    a, b = A.wake(p, q)
                    assert (b - a) % 1 == F(1, (1 << q) - 1)

    def test_limb_not_found(self):
        with pytest.raises(LimbNotFound):
            A.limb(F(1, 6), bound=2)


class TestConjugateLimbs:
    def test_examples(self):
        assert A.conjugate_limbs(F(1, 4), F(3, 4))
        assert not A.conjugate_limbs(F(1, 6), F(1, 6))
        assert not A.conjugate_limbs(F(7, 8), F(1, 4))

    def test_symmetry_on_samples(self):
        pool = [
            F(n, d)
            for d in range(2, 20, 2)
            for n in range(1, d)
            if F(n, d).denominator == d
        ]
        for a in pool[:12]:
            for b in pool[:12]:
                assert A.conjugate_limbs(a, b) == A.conjugate_limbs(b, a)


class TestSerialization:
    def test_format(self):
        assert A.format_angle(F(0)) == "0/1"
        assert A.format_angle(F(5, 6)) == "5/6"

    def test_parse(self):
        assert A.parse_angle("5/6") == F(5, 6)
        assert A.parse_angle("7/6") == F(1, 6)
        assert A.parse_angle("0") == F(0)
        with pytest.raises(ValueError):
            A.parse_angle("0.5")


class TestEquivalenceRelation:
    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(
            st.builds(lambda n, d: F(n % d, d), st.integers(0, 400), st.integers(1, 60)),
            min_size=1,
            max_size=8,
        )
    )
    def test_co_lands_is_equivalence(self, universe):
        theta = F(1, 6)
        blocks = A.landing_partition(theta, universe)
        for block in blocks:
            for t in block:
                for u in block:
                    assert A.co_lands(theta, t, u)
        for i, b1 in enumerate(blocks):
            for b2 in blocks[i + 1 :]:
                assert not A.co_lands(theta, b1[0], b2[0])
