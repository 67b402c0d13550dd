"""Numerical tolerances shared by every module."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Tolerance record; pass a modified copy via ``tol=`` to override per call.

    Attributes
    ----------
    tau : float
        Generic equality tolerance for distance comparisons.
    feas : float
        Primal feasibility tolerance of LP / transportation solutions.
    opt : float
        Optimality tolerance of LP values.
    dist_two : float
        Tolerance for "distance equals two" tests (two LP solves compose).
    slackness : float
        Complementary slackness residual bound.
    """

    tau: float = 1e-9
    feas: float = 1e-8
    opt: float = 1e-7
    dist_two: float = 1e-6
    slackness: float = 1e-6

    def with_(self, **changes):
        return replace(self, **changes)


DEFAULT_TOL = Tolerances()


def resolve(tol):
    return DEFAULT_TOL if tol is None else tol
