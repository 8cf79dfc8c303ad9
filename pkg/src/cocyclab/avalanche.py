"""Avalanche principle on finite chains of matrices.

For a chain ``g_0, ..., g_{n-1}`` whose blocks have a large singular gap
(``gr(g_i) > 1/kappa``) and whose consecutive blocks are not too misaligned
(``||g_i g_{i-1}|| > epsilon ||g_i|| ||g_{i-1}||``), the norm of the product
is predicted from single and pairwise norms:

    log||g^{(n)}|| ~ sum_i log||g_i g_{i-1}|| - sum_{i=1}^{n-2} log||g_i||

with an error at most ``C_AP * n * kappa / epsilon**2``. The constant is
not known explicitly; :data:`DEFAULT_C_AP` is calibrated by
:func:`calibrate_c_ap` on a generated ensemble.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInputError

DEFAULT_C_GATE = 0.01

# Output of calibrate_c_ap() with its default arguments: twice the largest
# defect * eps^2 / (n * kappa) observed over the 10^4-chain ensemble.
DEFAULT_C_AP = 0.3100185901506111

# Floating-point resolution of a defect assembled from terms of total
# magnitude S is about ROUNDOFF_FACTOR * eps * S.
ROUNDOFF_FACTOR = 64


@dataclass(frozen=True)
class APHypotheses:
    epsilon: float
    kappa: float
    c_gate: float = DEFAULT_C_GATE

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidInputError("epsilon must lie in (0, 1)")
        if not self.kappa > 0 or not self.c_gate > 0:
            raise InvalidInputError("kappa and c_gate must be positive")
        if self.kappa > self.c_gate * self.epsilon ** 2:
            raise InvalidInputError(
                f"kappa={self.kappa!r} exceeds c_gate*epsilon^2={self.c_gate * self.epsilon ** 2!r}"
            )


@dataclass(frozen=True)
class HypothesisCheck:
    ok: bool
    index: int = None
    condition: str = None       # "gap" or "angle"
    value: float = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class APReport:
    n: int
    lhs_defect: float
    bound: float
    hypotheses_ok: bool
    satisfied: bool
    roundoff: float = 0.0
    failure: HypothesisCheck = None


def _as_chain(chain):
    g = linalg.as_square(chain, allow_stack=True)
    if g.ndim != 3:
        raise InvalidInputError("a chain is a sequence of square matrices")
    if len(g) < 2:
        raise InvalidInputError("a chain needs at least two matrices")
    return g


def angle_ratios(chain):
    """``||g_i g_{i-1}|| / (||g_i|| ||g_{i-1}||)`` for ``i = 1..n-1``."""
    g = _as_chain(chain)
    norms = linalg.op_norm(g)
    pairs = linalg.op_norm(np.matmul(g[1:], g[:-1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        return pairs / (norms[1:] * norms[:-1])


def check_hypotheses(chain, hyp):
    """First index where the gap or angle condition fails, scanning in order."""
    g = _as_chain(chain)
    if g.shape[-1] < 2:
        raise InvalidInputError("gap condition needs dimension >= 2")
    gaps = linalg.gap_ratio(g)
    ratios = angle_ratios(g)
    for i in range(len(g)):
        if not gaps[i] > 1.0 / hyp.kappa:
            return HypothesisCheck(False, i, "gap", float(gaps[i]))
        if i >= 1 and not ratios[i - 1] > hyp.epsilon:
            return HypothesisCheck(False, i, "angle", float(ratios[i - 1]))
    return HypothesisCheck(True)


def _defect_terms(g):
    """Local terms whose sum is the signed defect; works on ``(..., n, m, m)``.

    With ``U_i`` the unit-norm direction of ``g_{i-1} ... g_0``,
    ``log||g^{(n)}|| = log||g_1 g_0|| + sum_{i>=2} log||g_i U_i||``, so the
    defect telescopes into terms
    ``log||g_i U_i|| + log||g_{i-1}|| - log||g_i g_{i-1}||`` for i >= 2.
    Each term vanishes for aligned diagonal chains, which keeps the
    sum exact there.
    """
    n = g.shape[-3]
    norms = linalg.op_norm(g)                                     # (..., n)
    pairs = linalg.op_norm(np.matmul(g[..., 1:, :, :], g[..., :-1, :, :]))
    lead = g.shape[:-3]
    if np.any(norms == 0):
        raise InvalidInputError("chain contains a zero matrix")
    terms = np.zeros(lead + (max(n - 2, 0),))
    mags = np.zeros(lead + (max(n - 2, 0),))
    U = np.matmul(g[..., 1, :, :], g[..., 0, :, :])
    s = linalg.op_norm(U)
    U = U / np.where(s > 0, s, 1.0)[..., None, None]
    for i in range(2, n):
        V = np.matmul(g[..., i, :, :], U)
        sv = linalg.op_norm(V)
        with np.errstate(divide="ignore"):
            step = np.log(sv)
        t = step + np.log(norms[..., i - 1]) - np.log(pairs[..., i - 1])
        terms[..., i - 2] = t
        mags[..., i - 2] = np.abs(step) + np.abs(np.log(norms[..., i - 1])) + np.abs(np.log(pairs[..., i - 1]))
        U = V / np.where(sv > 0, sv, 1.0)[..., None, None]
    return terms, mags


def ap_defect(chain):
    """``|log||g^{(n)}|| + sum_{i=1}^{n-2} log||g_i|| - sum_{i=1}^{n-1} log||g_i g_{i-1}|||``."""
    g = _as_chain(chain)
    terms, _ = _defect_terms(g)
    return abs(math.fsum(terms.tolist()))


def ap_defect_batch(chains):
    """Defects and round-off floors of a stack ``(B, n, m, m)`` of chains."""
    g = np.asarray(chains, dtype=float)
    if g.ndim != 4 or g.shape[1] < 2:
        raise InvalidInputError("expected a stack of chains with shape (B, n, m, m)")
    terms, mags = _defect_terms(g)
    defects = np.abs(terms.sum(axis=-1))
    return defects, roundoff_floor(mags.sum(axis=-1))


def roundoff_floor(magnitude):
    return ROUNDOFF_FACTOR * np.finfo(float).eps * np.asarray(magnitude)


def ap_bound(n, kappa, epsilon, C_AP=DEFAULT_C_AP):
    return C_AP * n * kappa / epsilon ** 2


def verify_ap(chain, hyp, C_AP=DEFAULT_C_AP):
    """Check the hypotheses and compare the defect with ``C_AP n kappa / eps^2``.

    The comparison allows the floating-point floor of the defect itself,
    since bounds below ~1e-13 cannot be resolved in double precision.
    """
    g = _as_chain(chain)
    check = check_hypotheses(g, hyp)
    terms, mags = _defect_terms(g)
    defect = abs(math.fsum(terms.tolist()))
    floor = float(roundoff_floor(mags.sum()))
    bound = ap_bound(len(g), hyp.kappa, hyp.epsilon, C_AP)
    return APReport(
        n=len(g),
        lhs_defect=defect,
        bound=bound,
        hypotheses_ok=check.ok,
        satisfied=check.ok and defect <= bound + floor,
        roundoff=floor,
        failure=None if check.ok else check,
    )


def ap_predict_log_norm(pair_log_norms, single_log_norms):
    """AP prediction of ``log||g^{(n)}||`` from the n-1 pair and n-2 inner single log-norms."""
    pairs = list(np.ravel(pair_log_norms))
    singles = list(np.ravel(single_log_norms))
    if len(pairs) < 1 or len(singles) != len(pairs) - 1:
        raise InvalidInputError(
            f"need n-1 pair and n-2 single log-norms, got {len(pairs)} and {len(singles)}"
        )
    return math.fsum(pairs) - math.fsum(singles)


# --------------------------------------------------------------------------
# chain generator and calibration


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def hyperbolic_chains(rng, count, n, epsilon, kappa, margin=1.05):
    """Random 2x2 chains that satisfy the AP hypotheses by construction.

    ``g_i = R(theta_{i+1}) diag(sigma_i, sigma_i k_i) R(delta_i - theta_i)``
    with ``k_i < kappa`` and ``|cos delta_i| >= margin * epsilon``; the product
    ``g_i g_{i-1}`` then contains ``R(delta_i)`` between the two diagonal
    factors, so the angle ratio is at least ``|cos delta_i|``.
    """
    theta = rng.uniform(0, 2 * np.pi, size=(count, n + 1))
    dmax = math.acos(min(1.0, margin * epsilon))
    delta = rng.uniform(-dmax, dmax, size=(count, n))
    sigma = np.exp(rng.uniform(-1, 1, size=(count, n)))
    k = kappa * rng.uniform(0.05, 0.95, size=(count, n))
    D = np.zeros((count, n, 2, 2))
    D[..., 0, 0] = sigma
    D[..., 1, 1] = sigma * k
    return rotation(theta[:, 1:]) @ D @ rotation(delta - theta[:, :-1])


CALIBRATION_SEED = 20_170_101
CALIBRATION_LENGTHS = (2, 3, 5, 10, 20, 50, 100, 200)


def calibration_ensemble(trials=10_000, epsilon=0.5, kappa=1e-4, seed=CALIBRATION_SEED,
                         lengths=CALIBRATION_LENGTHS):
    """Yield ``(n, chains)`` groups covering ``trials`` chains in total."""
    rng = np.random.default_rng(seed)
    per = [trials // len(lengths) + (1 if i < trials % len(lengths) else 0) for i in range(len(lengths))]
    for n, count in zip(lengths, per):
        if count:
            yield n, hyperbolic_chains(rng, count, n, epsilon, kappa)


def calibrate_c_ap(trials=10_000, epsilon=0.5, kappa=1e-4, seed=CALIBRATION_SEED,
                   lengths=CALIBRATION_LENGTHS):
    """Twice the largest ``defect * eps^2 / (n kappa)`` over the ensemble."""
    worst = 0.0
    for n, chains in calibration_ensemble(trials, epsilon, kappa, seed, lengths):
        defects, _ = ap_defect_batch(chains)
        worst = max(worst, float(np.max(defects)) * epsilon ** 2 / (n * kappa))
    return 2.0 * worst
