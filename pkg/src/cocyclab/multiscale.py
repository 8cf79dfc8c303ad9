"""The inductive step from scale ``n0`` to ``n1`` and its ingredients.

The step estimates ``Lambda^{(n1)}`` from data at ``n0`` and ``2 n0`` with
the avalanche principle applied to blocks ``B^{(n0)}(T^{i n0} x)``. Two
error budgets are carried along: ``eta`` (how far ``Lambda^{(n)}`` is from
stabilizing) and ``theta`` (distance to the reference cocycle's exponent).
All Monte Carlo comparisons return three-valued verdicts.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import avalanche, linalg
from .cocycle import exterior, finite_scale_le, iterate
from .dynamics import advance
from .errors import GateError, InvalidInputError
from .ldt import log_psi
from .montecarlo import _renormalize, derive_seed, evaluator, map_chunks, mean_and_error, segment_log_norms
from .verdicts import Verdict, greater_than, less_than

DEFAULT_GROWTH = 0.1


# --------------------------------------------------------------------------
# state and schedules


@dataclass(frozen=True)
class InductiveState:
    n: int
    eta: float
    theta: float
    epsilon: float
    kappa: float
    C: float

    def __post_init__(self):
        if self.eta < 0 or self.theta < 0:
            raise InvalidInputError("eta and theta must be >= 0")
        if not self.epsilon > 0 or not self.C > 0:
            raise InvalidInputError("epsilon and C must be positive")

    @property
    def gate_lhs(self):
        return 4 * self.eta + 2 * self.theta

    @property
    def gate_rhs(self):
        return self.kappa - 12 * self.epsilon

    @property
    def gate_ok(self):
        return self.gate_lhs < self.gate_rhs


def check_gate(state):
    if not state.gate_ok:
        raise GateError(
            "gate", f"4*eta + 2*theta = {state.gate_lhs!r} >= kappa - 12*eps = {state.gate_rhs!r}",
            n=state.n, eta=state.eta, theta=state.theta, lhs=state.gate_lhs, rhs=state.gate_rhs,
        )


def scale_window(n0, profile, growth=DEFAULT_GROWTH):
    """Admissible ``n1`` range ``[ceil(n0^{1+a}), floor(n0 * iota(n0)^{-1/2})]``."""
    lo = math.ceil(n0 ** (1 + growth) - 1e-9)
    lp = float(log_psi(profile, n0))
    hi = math.floor(math.exp(lp)) if lp < 700 else math.inf
    return lo, hi


@dataclass(frozen=True)
class ScaleSchedule:
    """Intervals of scales ``[n_k^-, n_k^+]`` stored through their logarithms.

    ``n_0^+ = floor(e^{n_0^-})`` and later intervals are images of the first
    under ``t -> t^{1+a}`` (``mode='power'``) or ``t -> psi(t)``
    (``mode='psi'``). Entries that overflow a double are ``inf``.
    """

    log_lower: tuple
    log_upper: tuple
    growth: float
    mode: str

    def __len__(self):
        return len(self.log_lower)

    def interval(self, k):
        def to_int(v):
            return math.floor(math.exp(v) + 1e-9) if v < 700 else math.inf

        return to_int(self.log_lower[k]), to_int(self.log_upper[k])

    @property
    def intervals(self):
        return [self.interval(k) for k in range(len(self))]

    def overlaps(self):
        return all(self.log_lower[k + 1] < self.log_upper[k] for k in range(len(self) - 1))


def _log_psi_of_log(profile, log_t):
    # log psi(t) = log t + log(1/iota(t)) / 2 with t = e^{log_t}
    if log_t > 700:
        return math.inf
    return log_t + 0.5 * float(profile.mesf.log_inv(math.exp(log_t)))


def scale_schedule(n0, steps, growth=DEFAULT_GROWTH, mode="power", profile=None):
    """Up to ``steps`` overlapping intervals of scales.

    The first two intervals overlap only when the image of ``n0`` stays below
    ``e^{n0}``; otherwise ``n0`` is too small and the call is rejected. The
    schedule stops early once an endpoint no longer fits in a double.
    """
    if n0 < 3 or steps < 1:
        raise InvalidInputError("need n0 >= 3 and at least one interval")
    if mode not in ("power", "psi"):
        raise InvalidInputError("mode must be 'power' or 'psi'")
    if mode == "psi" and profile is None:
        raise InvalidInputError("psi schedules need a profile")
    lo, hi = [math.log(n0)], [float(math.floor(n0))]   # log of e^{n0} is n0
    for _ in range(steps - 1):
        if mode == "power":
            nlo, nhi = (1 + growth) * lo[-1], (1 + growth) * hi[-1]
        else:
            nlo, nhi = _log_psi_of_log(profile, lo[-1]), _log_psi_of_log(profile, hi[-1])
        if len(lo) == 1 and not nlo < hi[0]:
            raise InvalidInputError(
                f"n0={n0} is too small: the next interval starts at e^{nlo:.3g} >= e^{n0}, so they do not overlap"
            )
        if not math.isfinite(nhi):
            break
        lo.append(nlo)
        hi.append(nhi)
    return ScaleSchedule(tuple(lo), tuple(hi), growth, mode)


def power_scales(n0, steps, growth=DEFAULT_GROWTH):
    """Integer scales ``n_{k+1} = ceil(n_k^{1+a})``, strictly increasing."""
    out = [int(n0)]
    for _ in range(steps):
        out.append(max(out[-1] + 1, math.ceil(out[-1] ** (1 + growth) - 1e-9)))
    return out


# --------------------------------------------------------------------------
# budgets


def update_budget(state, n1):
    """``eta1 = C n0/n1`` and ``theta1 = theta0 + 4 eta0 + C n0/n1``."""
    step = state.C * state.n / n1
    return replace(state, n=int(n1), eta=step, theta=state.theta + 4 * state.eta + step)


def propagate_budget(state, scales):
    """States after stepping through ``scales[1:]`` (no gate checks)."""
    out = [state]
    for n1 in scales[1:]:
        out.append(update_budget(out[-1], n1))
    return out


def theta_budget_bound(theta0, eta0, C, scales):
    """``theta0 + 4 eta0 + 5 C sum_k n_k/n_{k+1}``, the telescoped bound on ``theta_K``."""
    ratios = [a / b for a, b in zip(scales[:-1], scales[1:])]
    return theta0 + 4 * eta0 + 5 * C * math.fsum(ratios)


def estimate_step_constant(B, system, n0, samples, seed, workers=1):
    """Twice the empirical L^2 norm of ``(1/n0) log||B^{(n0)}(x)||``."""
    vals = segment_log_norms([B], system, [(0, n0)], samples, seed, workers)[:, 0, 0] / n0
    if np.any(~np.isfinite(vals)):
        raise InvalidInputError("log-norm samples are not finite; the L^2 bound is undefined")
    return 2.0 * float(np.sqrt(np.mean(vals ** 2)))


# --------------------------------------------------------------------------
# scale division


@dataclass(frozen=True)
class Sandwich:
    lower: float
    upper: float
    n: int
    r: int
    lam_lower_scale: float     # Lambda^{(n n0)}
    lam_upper_scale: float     # Lambda^{((n+1) n0)}
    std_error: float
    correction: float

    def contains(self, value, sigma=0.0, z=3.0):
        return self.lower - z * sigma <= value <= self.upper + z * sigma


def sandwich_bounds(lam_nn0, lam_n1n0, n0, n1, C):
    """``[Lambda^{((n+1)n0)} - 2C n0/n1, Lambda^{(n n0)} + 2C n0/n1]``."""
    corr = 2 * C * n0 / n1
    return lam_n1n0 - corr, lam_nn0 + corr


def scale_sandwich(A, system, n0, n1, C, samples=10_000, seed=0, estimates=None, r=None, workers=1):
    """Bounds on ``Lambda^{(n1)}`` from the two multiples of ``n0`` around it.

    ``n1 = n n0 + r`` with ``0 <= r <= n0``; by default ``r = n1 mod n0``.
    ``estimates`` may map scales to known ``Lambda`` values; missing ones
    are estimated on common orbits.
    """
    if n0 < 1 or n1 < n0:
        raise InvalidInputError("need 1 <= n0 <= n1")
    if r is None:
        n, r = divmod(n1, n0)
    else:
        if not 0 <= r <= n0 or (n1 - r) % n0:
            raise InvalidInputError(f"remainder r={r} is not admissible for n1={n1}, n0={n0}")
        n = (n1 - r) // n0
    if n < 1:
        raise InvalidInputError("n1 must contain at least one block of length n0")
    estimates = dict(estimates or {})
    lo_scale, hi_scale = n * n0, (n + 1) * n0
    err = 0.0
    missing = [s for s in (lo_scale, hi_scale) if s not in estimates]
    if missing:
        vals = segment_log_norms([A], system, [(0, s) for s in missing], samples, seed, workers)[:, 0, :]
        for j, s in enumerate(missing):
            m, e, _ = mean_and_error(vals[:, j] / s)
            estimates[s] = m
            err = max(err, e)
    lower, upper = sandwich_bounds(estimates[lo_scale], estimates[hi_scale], n0, n1, C)
    return Sandwich(lower, upper, n, r, estimates[lo_scale], estimates[hi_scale], err, 2 * C * n0 / n1)


# --------------------------------------------------------------------------
# angle lemma


@dataclass(frozen=True)
class AngleCheck:
    violation: float
    ci_radius: float
    log_threshold: float
    predicted: float            # 3 iota_n: the constant is carried, not absorbed
    proximity: tuple            # InequalityCheck per m_i
    samples: int


def angle_bound_check(B, system, m1, m2, eta, n, profile, samples=10_000, seed=0, workers=1):
    """Fraction of phases where the norm ratio falls below ``e^{-(m1+m2)(eta + 2 eps_n)}``.

    The ratio is ``||B^{(m1+m2)}(x)|| / (||B^{(m2)}(T^{m1}x)|| ||B^{(m1)}(x)||)``.
    First ``|Lambda^{(m1+m2)} - Lambda^{(mi)}| < eta`` is checked on an
    independent seed; a refuted check raises :class:`GateError`.
    """
    from .ldt import wilson_radius

    if min(m1, m2) < n or n < profile.t_min:
        raise InvalidInputError("need m1, m2 >= n >= t_min")
    if not eta >= 0:
        raise InvalidInputError("eta must be >= 0")
    m = m1 + m2
    pre = segment_log_norms([B], system, [(0, m), (0, m1), (0, m2)], samples,
                            derive_seed(seed, 1), workers)[:, 0, :]
    full = pre[:, 0] / m
    checks = []
    for j, mi in ((1, m1), (2, m2)):
        with np.errstate(invalid="ignore"):
            d = full - pre[:, j] / mi
        mean, err, neg = mean_and_error(d)
        if neg or np.isnan(mean):
            mean, err = float("nan"), 0.0
        checks.append(less_than(abs(mean), eta, err))
    if any(c.verdict is Verdict.FAILS for c in checks):
        raise GateError("angle-proximity", "|Lambda^{(m1+m2)} - Lambda^{(mi)}| < eta is refuted",
                        checks=[(c.measured, c.bound, c.sigma) for c in checks])
    vals = segment_log_norms([B], system, [(0, m), (m1, m), (0, m1)], samples, seed, workers)[:, 0, :]
    with np.errstate(invalid="ignore"):
        log_ratio = vals[:, 0] - vals[:, 1] - vals[:, 2]
    thr = -m * (eta + 2 * float(profile.eps(n)))
    bad = ~(log_ratio > thr)
    p = float(np.mean(bad))
    return AngleCheck(p, wilson_radius(p, samples), thr, 3 * float(profile.iota(n)), tuple(checks), int(samples))


# --------------------------------------------------------------------------
# the inductive step


@dataclass(frozen=True)
class StepMeasurements:
    n0: int
    n1: int
    lam_n0: float
    lam_2n0: float
    lam_n1: float
    triple: float               # Lambda^{(n1)} + Lambda^{(n0)} - 2 Lambda^{(2 n0)}
    triple_error: float
    drift: float                # Lambda^{(n0)} - Lambda^{(2 n0)}
    drift_error: float
    ref_gap: float = None       # |Lambda^{(n0)}(B) - Lambda^{(n0)}(A)|
    ref_gap_error: float = 0.0
    samples: int = 0
    lam_n1_error: float = 0.0


def measure_step(B, system, n0, n1, samples, seed, reference=None, workers=1):
    """Lambda at ``n0``, ``2 n0`` and ``n1`` on common orbits, with errors of the combinations."""
    cocycles = [B] if reference is None else [B, reference]
    vals = segment_log_norms(cocycles, system, [(0, n0), (0, 2 * n0), (0, n1)], samples, seed, workers)
    b = vals[:, 0, :] / np.array([n0, 2 * n0, n1])
    l0, l0_err, _ = mean_and_error(b[:, 0])
    l2, _, _ = mean_and_error(b[:, 1])
    l1, l1_err, _ = mean_and_error(b[:, 2])
    with np.errstate(invalid="ignore"):
        triple, triple_err, _ = mean_and_error(b[:, 2] + b[:, 0] - 2 * b[:, 1])
        drift, drift_err, _ = mean_and_error(b[:, 0] - b[:, 1])
    ref_gap, ref_err = None, 0.0
    if reference is not None:
        with np.errstate(invalid="ignore"):
            g, ref_err, _ = mean_and_error(b[:, 0] - vals[:, 1, 0] / n0)
        ref_gap = abs(g)
    return StepMeasurements(int(n0), int(n1), l0, l2, l1, triple, triple_err, drift, drift_err,
                            ref_gap, ref_err, int(samples), l1_err)


@dataclass(frozen=True)
class StepResult:
    state: InductiveState
    previous: InductiveState
    bound: float                # C n0 / n1
    triple: object              # InequalityCheck on |triple| < C n0/n1
    hypothesis_eta: object      # InequalityCheck on Lambda^{(n0)} - Lambda^{(2n0)} < eta0
    hypothesis_theta: object    # InequalityCheck on |Lambda^{(n0)}(B) - Lambda^{(n0)}(A)| < theta0
    lam_n1: float = None


def inductive_step(state, measurements, profile, growth=DEFAULT_GROWTH):
    """One step from ``state.n = n0`` to ``measurements.n1``.

    Raises :class:`GateError` if ``4 eta0 + 2 theta0 >= kappa - 12 eps`` and
    :class:`InvalidInputError` if ``n1`` is outside the scale window.
    """
    m = measurements
    if m.n0 != state.n:
        raise InvalidInputError(f"measurements are at n0={m.n0}, state is at n={state.n}")
    check_gate(state)
    lo, hi = scale_window(state.n, profile, growth)
    if not lo <= m.n1 <= hi:
        raise InvalidInputError(f"n1={m.n1} is outside the scale window [{lo}, {hi}]")
    bound = state.C * state.n / m.n1
    triple = less_than(abs(m.triple), bound, m.triple_error)
    hyp_eta = less_than(m.drift, state.eta, m.drift_error)
    hyp_theta = None
    if m.ref_gap is not None:
        hyp_theta = less_than(m.ref_gap, state.theta, m.ref_gap_error)
    return StepResult(update_budget(state, m.n1), state, bound, triple, hyp_eta, hyp_theta, m.lam_n1)


def initial_state(B, system, n0, epsilon, kappa, C, samples, seed, reference=None, workers=1):
    """``eta0``, ``theta0`` set to the measured quantities plus three standard errors."""
    m = measure_step(B, system, n0, 2 * n0, samples, seed, reference, workers)
    eta0 = max(0.0, m.drift + 3 * m.drift_error)
    theta0 = 0.0 if m.ref_gap is None else m.ref_gap + 3 * m.ref_gap_error
    return InductiveState(int(n0), eta0, theta0, float(epsilon), float(kappa), float(C))


# --------------------------------------------------------------------------
# blockwise avalanche estimate


def blockwise_ap_log_norm(B, system, x, n0, n):
    """AP prediction of ``log||B^{(n n0)}(x)||`` from blocks of length ``n0``."""
    if n < 2 or n0 < 1:
        raise InvalidInputError("need n >= 2 blocks of length n0 >= 1")
    B.check_system(system)
    logs, units = [], []
    for i in range(n):
        l, U = iterate(B, advance(system, x, i * n0), n0)
        logs.append(l)
        units.append(U)
    if any(l == -np.inf for l in logs):
        return -np.inf
    pairs = []
    for i in range(1, n):
        s = linalg.op_norm(units[i] @ units[i - 1])
        if s == 0:
            return -np.inf
        pairs.append(logs[i] + logs[i - 1] + math.log(s))
    return avalanche.ap_predict_log_norm(pairs, logs[1:-1])


@dataclass(frozen=True)
class BlockwiseBatch:
    direct: np.ndarray          # log||B^{(n n0)}(x)||
    predicted: np.ndarray
    epsilon: np.ndarray         # min angle ratio over consecutive blocks
    kappa: np.ndarray           # max 1/gr over blocks
    roundoff: np.ndarray
    n: int
    n0: int

    @property
    def defect(self):
        return np.abs(self.predicted - self.direct)

    def hypotheses_ok(self, c_gate=avalanche.DEFAULT_C_GATE):
        with np.errstate(invalid="ignore"):
            return (self.epsilon > 0) & (self.epsilon < 1) & (self.kappa <= c_gate * self.epsilon ** 2)

    def bound(self, C_AP=avalanche.DEFAULT_C_AP):
        with np.errstate(divide="ignore", invalid="ignore"):
            return avalanche.ap_bound(self.n, self.kappa, self.epsilon, C_AP)

    def within_bound(self, C_AP=avalanche.DEFAULT_C_AP):
        return self.defect <= self.bound(C_AP) + self.roundoff


def _blockwise_chunk(B, W, system, n0, n, rng, size):
    """Block log-norms, unit block matrices, pair log-norms and the direct product."""
    m = B.dim
    orbit = system.orbit(rng, size)
    eye = np.broadcast_to(np.eye(m), (size, m, m))
    P, P_log = eye.copy(), np.zeros(size)
    single = np.empty((size, n))
    wedge = np.empty((size, n))
    pair = np.empty((size, n - 1))
    prev_unit = None
    fb, fw = evaluator(B, system), evaluator(W, system)
    for i in range(n):
        Q, Q_log = eye.copy(), np.zeros(size)
        R = np.broadcast_to(np.eye(W.dim), (size, W.dim, W.dim)).copy()
        R_log = np.zeros(size)
        for _ in range(n0):
            pts = next(orbit)
            g = fb(pts)
            Q = np.matmul(g, Q)
            P = np.matmul(g, P)
            R = np.matmul(fw(pts), R)
            for M, logs in ((Q, Q_log), (P, P_log), (R, R_log)):
                _renormalize(M, logs)
        s = linalg.op_norm(Q)
        with np.errstate(divide="ignore"):
            single[:, i] = Q_log + np.log(s)
            wedge[:, i] = R_log + np.log(linalg.op_norm(R))
        unit = Q / np.where(s > 0, s, 1.0)[:, None, None]
        if prev_unit is not None:
            with np.errstate(divide="ignore"):
                pair[:, i - 1] = single[:, i] + single[:, i - 1] + np.log(
                    linalg.op_norm(np.matmul(unit, prev_unit)))
        prev_unit = unit
    with np.errstate(divide="ignore"):
        direct = P_log + np.log(linalg.op_norm(P))
    return np.concatenate([single, wedge, pair, direct[:, None]], axis=1)


def blockwise_ap_batch(B, system, n0, n, samples, seed, workers=1):
    """Blockwise AP prediction against direct iteration on sampled phases.

    Pair norms come from products of the unit-norm blocks. Block gaps use
    ``log gr(g) = 2 log||g|| - log||wedge_2 g||`` with the exterior product
    iterated alongside, which stays accurate when ``gr`` exceeds the
    resolution of a direct singular value decomposition.
    """
    if n < 2 or n0 < 1:
        raise InvalidInputError("need n >= 2 blocks of length n0 >= 1")
    if B.dim < 2:
        raise InvalidInputError("blockwise AP needs dimension >= 2")
    B.check_system(system)
    W = exterior(B, 2)
    vals = map_chunks(lambda rng, size: _blockwise_chunk(B, W, system, n0, n, rng, size),
                      samples, seed, workers)
    single, wedge = vals[:, :n], vals[:, n:2 * n]
    pair, direct = vals[:, 2 * n:3 * n - 1], vals[:, -1]
    with np.errstate(invalid="ignore"):
        pred = pair.sum(axis=1) - single[:, 1:-1].sum(axis=1)
        log_ratio = pair - single[:, 1:] - single[:, :-1]
        eps = np.exp(log_ratio.min(axis=1))
        kappa = np.exp((wedge - 2 * single).max(axis=1))
    mags = np.abs(pair).sum(axis=1) + np.abs(single).sum(axis=1) + np.abs(direct)
    return BlockwiseBatch(direct, pred, eps * (1 - 1e-9), kappa * (1 + 1e-9),
                          avalanche.roundoff_floor(mags), int(n), int(n0))


# --------------------------------------------------------------------------
# gap lemma


@dataclass(frozen=True)
class GapProbe:
    threshold: float            # kappa - 2 theta - 3 eps
    violation: float
    ci_radius: float
    gap: float                  # Lambda_1^{(n)} - Lambda_2^{(n)}
    gap_error: float
    gap_bound: float            # threshold * (1 - iota_n)
    gap_check: object
    proximity: object = None
    predicted: float = None     # iota_n


def gap_lower_bound_probe(B, system, n, theta, epsilon, kappa, samples=10_000, seed=0,
                          reference=None, profile=None, workers=1):
    """Phases where ``(1/n) log gr(B^{(n)}(x)) <= kappa - 2 theta - 3 eps`` and the integrated gap.

    With a ``reference`` cocycle the hypothesis
    ``|Lambda^{(n)}(B) - Lambda^{(n)}(A)| < theta`` is checked first on an
    independent seed. An infinite ratio counts as satisfying the bound.
    """
    from .ldt import wilson_radius

    if B.dim < 2:
        raise InvalidInputError("gap ratio needs dimension >= 2")
    proximity = None
    if reference is not None:
        v = segment_log_norms([B, reference], system, [(0, n)], samples, derive_seed(seed, 1), workers)
        with np.errstate(invalid="ignore"):
            d, err, neg = mean_and_error((v[:, 0, 0] - v[:, 1, 0]) / n)
        proximity = less_than(abs(d) if not neg else np.nan, theta, err)
        if proximity.verdict is Verdict.FAILS:
            raise GateError("theta-proximity", "|Lambda^{(n)}(B) - Lambda^{(n)}(A)| < theta is refuted",
                            measured=proximity.measured, bound=theta, sigma=err)
    vals = segment_log_norms([B, exterior(B, 2)], system, [(0, n)], samples, seed, workers)[:, :, 0]
    with np.errstate(invalid="ignore"):
        log_gr = (2 * vals[:, 0] - vals[:, 1]) / n
    # wedge_2 product vanished while B^{(n)} did not: infinite ratio
    log_gr = np.where(np.isneginf(vals[:, 1]) & np.isfinite(vals[:, 0]), np.inf, log_gr)
    thr = float(kappa - 2 * theta - 3 * epsilon)
    bad = ~(log_gr > thr)
    p = float(np.mean(bad))
    iota_n = float(profile.iota(n)) if profile is not None else 0.0
    if np.any(np.isinf(log_gr)):
        gap, gap_err = np.inf, 0.0
    else:
        gap, gap_err, _ = mean_and_error(log_gr)
    bound = thr * (1 - iota_n)
    return GapProbe(thr, p, wilson_radius(p, samples), gap, gap_err, bound,
                    greater_than(gap, bound, gap_err), proximity,
                    iota_n if profile is not None else None)


# --------------------------------------------------------------------------
# campaign


@dataclass(frozen=True)
class CampaignRow:
    k: int
    n: int
    eta: float
    theta: float
    lam: float
    lam_error: float
    bound: float = None
    measured: float = None
    sigma: float = None
    verdict: str = ""


@dataclass
class Campaign:
    rows: list = field(default_factory=list)
    rejected: GateError = None


def run_campaign(B, system, n0, steps, epsilon, kappa, C, profile, samples, seed,
                 reference=None, growth=DEFAULT_GROWTH, scales=None, workers=1):
    """Sequential inductive steps along ``scales`` (default ``power_scales``).

    Stops at the first gate rejection, which is recorded on the result.
    """
    scales = list(scales) if scales is not None else power_scales(n0, steps, growth)
    state = initial_state(B, system, scales[0], epsilon, kappa, C, samples,
                          derive_seed(seed, 0), reference, workers)
    base = finite_scale_le(B, system, scales[0], 1, samples, derive_seed(seed, 0), workers)
    out = Campaign([CampaignRow(0, state.n, state.eta, state.theta, base.value, base.std_error)])
    for k in range(1, len(scales)):
        try:
            check_gate(state)
        except GateError as e:
            out.rejected = e
            break
        m = measure_step(B, system, state.n, scales[k], samples, derive_seed(seed, k), reference, workers)
        res = inductive_step(state, m, profile, growth)
        t = res.triple
        out.rows.append(CampaignRow(k, res.state.n, res.state.eta, res.state.theta, m.lam_n1,
                                    m.lam_n1_error, t.bound, t.measured, t.sigma, t.verdict.value))
        state = res.state
    return out
