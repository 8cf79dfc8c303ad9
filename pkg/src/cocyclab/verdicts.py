"""Three-valued verdicts for inequalities between Monte Carlo estimates."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

Z_SIGMA = 3.0


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class InequalityCheck:
    """``measured < bound`` judged against ``Z_SIGMA`` standard errors."""

    measured: float
    bound: float
    sigma: float
    verdict: Verdict

    @property
    def holds(self):
        return self.verdict is Verdict.HOLDS

    @property
    def not_refuted(self):
        return self.verdict is not Verdict.FAILS


def less_than(measured, bound, sigma=0.0, z=Z_SIGMA):
    """Verdict on ``measured < bound`` given a standard error ``sigma``.

    Holds when the whole ``z``-sigma band is below the bound, fails when it
    is entirely at or above it, and is inconclusive otherwise. ``-inf`` is
    below every finite bound.
    """
    measured, bound, sigma = float(measured), float(bound), float(sigma)
    if np.isnan(measured) or np.isnan(bound):
        return InequalityCheck(measured, bound, sigma, Verdict.INCONCLUSIVE)
    if measured == -np.inf or bound == np.inf:
        v = Verdict.HOLDS if measured < bound else Verdict.FAILS
        return InequalityCheck(measured, bound, sigma, v)
    if measured + z * sigma < bound:
        v = Verdict.HOLDS
    elif measured - z * sigma >= bound:
        v = Verdict.FAILS
    else:
        v = Verdict.INCONCLUSIVE
    return InequalityCheck(measured, bound, sigma, v)


def greater_than(measured, bound, sigma=0.0, z=Z_SIGMA):
    """Verdict on ``measured > bound``; stored with the original sign."""
    c = less_than(-float(measured), -float(bound), sigma, z)
    return InequalityCheck(float(measured), float(bound), float(sigma), c.verdict)


def at_most(measured, bound, sigma=0.0, z=Z_SIGMA):
    """Verdict on ``measured <= bound``; equality holds."""
    measured, bound, sigma = float(measured), float(bound), float(sigma)
    if np.isnan(measured) or np.isnan(bound):
        return InequalityCheck(measured, bound, sigma, Verdict.INCONCLUSIVE)
    if measured + z * sigma <= bound:
        v = Verdict.HOLDS
    elif measured - z * sigma > bound:
        v = Verdict.FAILS
    else:
        v = Verdict.INCONCLUSIVE
    return InequalityCheck(measured, bound, sigma, v)
