"""Exception hierarchy shared across the package."""
from __future__ import annotations


class MatingError(Exception):
    """Base class for all package errors."""


class LimbNotFound(MatingError):
    """No limb with denominator within the configured search bound contains the angle."""


class DepthExceeded(MatingError):
    """An iterative procedure (triod resolution, closure walk) hit its step bound."""


class NotOnTree(MatingError):
    """A point required to lie on a Hubbard tree does not."""


class ConsistencyFailure(MatingError):
    """An internal structural invariant failed; indicates an upstream bug."""


class InvalidMating(MatingError):
    """The angle pair does not define an admissible mating."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}{': ' + detail if detail else ''}")


class ClosureDepthExceeded(MatingError):
    """A ray-graph closure did not stabilize within the join bound."""


class DisconnectedSkeleton(MatingError):
    """No identification joins the two trees; the essential mating equals the formal one."""


class EulerViolation(MatingError):
    """Face tracing produced a complex violating V - E + F = 2."""


class RepairFailed(MatingError):
    """Digon repair did not converge within the configured attempts."""


class ObstructedMating(MatingError):
    """An operation requiring a clean (unobstructed) mating was invoked on an obstructed one."""

    def __init__(self, message: str = "mating is obstructed", report=None):
        self.report = report
        super().__init__(message)


class CriterionFailed(MatingError):
    """A single-tree skeleton fails one of the five validity conditions."""

    def __init__(self, conditions: list[str]):
        self.conditions = list(conditions)
        super().__init__("criterion failed: " + ", ".join(conditions))


class NoIntegerEigenvalue(MatingError):
    """No integer in the scan range is a leading eigenvalue with a positive eigenvector."""


class ReducibleMatrix(MatingError):
    """The replacement matrix is not irreducible."""


class NoConsistentSolution(MatingError):
    """The angle-recovery congruences admit no common solution."""

    def __init__(self, message: str, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class LevelTooDeep(MatingError):
    """A render or expansion level exceeds the expansion bound."""
