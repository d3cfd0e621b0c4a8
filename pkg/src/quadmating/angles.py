"""Exact arithmetic and symbolic dynamics of the angle-doubling map on R/Z.

Angles are reduced `fractions.Fraction` values in [0, 1).  All operations are
exact; no floating point appears anywhere in this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import LimbNotFound

# Symbols of the two-arc partition.  The arc containing the parameter gets "1",
# the complementary arc "0"; the two partition points themselves get STAR.
STAR = "*"


def angle(numerator: int, denominator: int = 1) -> Fraction:
    """Reduced angle numerator/denominator taken mod 1."""
    return Fraction(numerator, denominator) % 1


def parse_angle(text: str) -> Fraction:
    """Parse an exact "p/q" angle string.  Decimal input is rejected."""
    s = text.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        return Fraction(int(p), int(q)) % 1
    # bare integers are allowed ("0" parses to 0/1); decimals are not
    return Fraction(int(s)) % 1


def format_angle(t: Fraction) -> str:
    """Serialize an angle as the exact string "p/q" ("0/1" for zero)."""
    return f"{t.numerator}/{t.denominator}"


def double(t: Fraction) -> Fraction:
    """Image 2t mod 1 under the doubling map."""
    return (2 * t) % 1


def halves(t: Fraction) -> tuple[Fraction, Fraction]:
    """The two doubling preimages t/2 and (t+1)/2, ascending."""
    h = t / 2
    return (h, h + Fraction(1, 2))


@dataclass(frozen=True)
class OrbitInfo:
    """Eventual cycle data of an angle under doubling."""

    preperiod: int
    period: int
    orbit: tuple[Fraction, ...]


@lru_cache(maxsize=None)
def orbit(t: Fraction) -> OrbitInfo:
    """Minimal preperiod/period of t under doubling; orbit length <= denominator."""
    seen: dict[Fraction, int] = {}
    seq: list[Fraction] = []
    x = t
    while x not in seen:
        seen[x] = len(seq)
        seq.append(x)
        x = double(x)
    pre = seen[x]
    return OrbitInfo(pre, len(seq) - pre, tuple(seq))


def is_misiurewicz_angle(t: Fraction) -> bool:
    """True iff t is strictly preperiodic under doubling (even reduced denominator)."""
    return t.denominator % 2 == 0


def _minimal_cyclic_period(word: tuple[str, ...]) -> int:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and all(word[i] == word[i % d] for i in range(n)):
            return d
    return n


@dataclass(frozen=True)
class Itinerary:
    """Eventually periodic symbol sequence of an angle relative to a parameter.

    Symbols live in {"0", "1", "*"}; the representation is canonical (minimal
    preperiod and period), so structural equality decides sequence equality.
    """

    parameter: Fraction
    preperiodic: tuple[str, ...]
    periodic: tuple[str, ...]

    def symbol_at(self, n: int) -> str:
        if n < len(self.preperiodic):
            return self.preperiodic[n]
        return self.periodic[(n - len(self.preperiodic)) % len(self.periodic)]

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.symbol_at(i) for i in range(n))


def partition_points(theta: Fraction) -> tuple[Fraction, Fraction]:
    """The two doubling preimages of the parameter, ordered ascending."""
    return halves(theta)


def symbol(theta: Fraction, x: Fraction) -> str:
    """Partition symbol of x: "1" on the open arc containing theta, "*" on its boundary."""
    a, b = partition_points(theta)
    if x == a or x == b:
        return STAR
    return "1" if a < x < b else "0"


@lru_cache(maxsize=None)
def itinerary(theta: Fraction, t: Fraction) -> Itinerary:
    """Canonical itinerary of t under doubling relative to parameter theta."""
    if not is_misiurewicz_angle(theta):
        raise ValueError(f"parameter {format_angle(theta)} is not strictly preperiodic")
    info = orbit(t)
    syms = tuple(symbol(theta, x) for x in info.orbit)
    ell, k = info.preperiod, info.period
    word = syms[ell:]
    d = _minimal_cyclic_period(word)
    a = ell
    while a > 0 and syms[a - 1] == syms[a - 1 + d]:
        a -= 1
    return Itinerary(theta, syms[:a], tuple(syms[a + i] for i in range(d)))


def co_lands(theta: Fraction, t: Fraction, u: Fraction) -> bool:
    """True iff t and u have equal itineraries relative to theta (they land together)."""
    return itinerary(theta, t) == itinerary(theta, u)


def landing_partition(
    theta: Fraction, universe: "set[Fraction] | tuple[Fraction, ...] | list[Fraction]"
) -> tuple[tuple[Fraction, ...], ...]:
    """Group a finite angle set into co-landing classes.

    Blocks are reported sorted by their minimal representative.
    """
    blocks: dict[Itinerary, list[Fraction]] = {}
    for t in set(universe):
        blocks.setdefault(itinerary(theta, t), []).append(t)
    out = [tuple(sorted(b)) for b in blocks.values()]
    out.sort(key=lambda b: b[0])
    return tuple(out)


@dataclass(frozen=True)
class LimbId:
    """A limb of the main cardioid, identified by rotation number and wake interval."""

    rotation_number: Fraction
    wake: tuple[Fraction, Fraction]


@lru_cache(maxsize=None)
def rotation_orbit(p: int, q: int) -> tuple[Fraction, ...]:
    """The unique period-q doubling orbit with rotation number p/q, sorted ascending.

    Built from the Christoffel word of slope p/q: the binary expansion
    0.(s_0 ... s_{q-1}) with s_j = floor((j+1)p/q) - floor(jp/q) is periodic of
    period q and its orbit is combinatorially a rotation by p.
    """
    if not (0 < p < q) or math.gcd(p, q) != 1:
        raise ValueError("rotation number must be a reduced p/q with 0 < p < q")
    word = [(((j + 1) * p) // q) - ((j * p) // q) for j in range(q)]
    n = 0
    for s in word:
        n = (n << 1) | s
    t = Fraction(n, (1 << q) - 1)
    orb = [t]
    for _ in range(q - 1):
        orb.append(double(orb[-1]))
    orb_sorted = tuple(sorted(orb))
    # sanity: doubling must act as the rotation i -> i + p on the sorted orbit
    idx = {x: i for i, x in enumerate(orb_sorted)}
    for i, x in enumerate(orb_sorted):
        if idx[double(x)] != (i + p) % q:
            raise AssertionError(f"rotation orbit for {p}/{q} is not a rotation")
    return orb_sorted


@lru_cache(maxsize=None)
def wake(p: int, q: int) -> tuple[Fraction, Fraction]:
    """Root wake of the p/q limb: the shortest gap of the rotation orbit."""
    orb = rotation_orbit(p, q)
    gaps = [((orb[(i + 1) % q] - orb[i]) % 1, orb[i], orb[(i + 1) % q]) for i in range(q)]
    width, a, b = min(gaps)
    if width != Fraction(1, (1 << q) - 1):
        raise AssertionError(f"characteristic gap of {p}/{q} has unexpected width {width}")
    return (a, b)


def _in_wake(t: Fraction, w: tuple[Fraction, Fraction]) -> bool:
    a, b = w
    if a < b:
        return a < t < b
    return t > a or t < b


def limb(theta: Fraction, bound: int = 64) -> LimbId:
    """The unique limb whose wake strictly contains theta.

    Searches rotation numbers p/q for q up to `bound`; main-cardioid wakes are
    pairwise disjoint, so the first hit is the answer.
    """
    if not is_misiurewicz_angle(theta):
        raise ValueError(f"{format_angle(theta)} is not a strictly preperiodic angle")
    for q in range(2, bound + 1):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            w = wake(p, q)
            if _in_wake(theta, w):
                return LimbId(Fraction(p, q), w)
    raise LimbNotFound(
        f"no limb with denominator <= {bound} contains {format_angle(theta)}; raise the bound"
    )


def conjugate_limbs(theta_a: Fraction, theta_b: Fraction, bound: int = 64) -> bool:
    """True iff the two parameters lie in mirror-image limbs of the main cardioid."""
    lid = limb(theta_a, bound)
    return _in_wake((1 - theta_b) % 1, lid.wake)
