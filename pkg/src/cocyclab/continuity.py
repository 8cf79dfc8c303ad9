"""Empirical checks of the continuity statements for Lyapunov exponents.

Every probe compares a Monte Carlo measurement against a bound computed
from a deviation profile and returns rows with the measured value, its
standard error, the bound and a three-valued verdict. The top exponent
``L1`` is a limit; it is replaced by ``Lambda^{(N)}`` at a large scale
``N`` (exact for constant cocycles), and the proxy is labelled as such.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .cocycle import Constant, Perturbed, distance, exterior, finite_scale_le_exact
from .errors import CapacityError, GateError, InvalidInputError
from .ldt import next_scale, phi, prev_scale, psi, wilson_radius
from .montecarlo import derive_seed, mean_and_error, segment_log_norms
from .verdicts import at_most, less_than

MAX_EXTERIOR_DIM = 500
PROXY_SCALE_CAP = 10**6
PROXY_FACTOR = 100


@dataclass(frozen=True)
class ContinuityRow:
    x: float                    # scale n or perturbation size h
    measured: float
    sigma: float
    bound: float
    verdict: str
    label: str = ""


@dataclass
class ContinuityReport:
    kind: str
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def grid(self):
        return [r.x for r in self.rows]

    def verdicts(self, label=None):
        return [r.verdict for r in self.rows if label is None or r.label == label]


def _row(x, check, label=""):
    return ContinuityRow(float(x), check.measured, check.sigma, check.bound, check.verdict.value, label)


# --------------------------------------------------------------------------
# L1 proxies


@dataclass(frozen=True)
class L1Proxy:
    value: float
    std_error: float
    scale: int                  # 0 when exact
    exact: bool
    bias: float = 0.0           # Lambda^{(N/2)} - Lambda^{(N)}, a size estimate of the proxy bias


def constant_matrix(A):
    """The matrix of a cocycle that does not depend on the phase, else None."""
    if isinstance(A, Constant):
        return A.matrix
    if isinstance(A, Perturbed):
        a, e = constant_matrix(A.base), constant_matrix(A.direction)
        if a is not None and e is not None:
            return a + A.h * e
    return None


def exact_l1(M):
    """``L1`` of a constant cocycle: log of the spectral radius."""
    rho = float(np.max(np.abs(np.linalg.eigvals(np.asarray(M, dtype=float)))))
    return math.log(rho) if rho > 0 else -math.inf


def l1_proxy(A, system, scale, samples=10_000, seed=0, workers=1):
    """``L1(A)`` exactly for constant cocycles, else ``Lambda^{(scale)}`` with a bias estimate."""
    M = constant_matrix(A)
    if M is not None:
        return L1Proxy(exact_l1(M), 0.0, 0, True)
    scale = int(scale)
    half = max(1, scale // 2)
    vals = segment_log_norms([A], system, [(0, half), (0, scale)], samples, seed, workers)[:, 0, :]
    v, err, _ = mean_and_error(vals[:, 1] / scale)
    with np.errstate(invalid="ignore"):
        bias, _, _ = mean_and_error(vals[:, 0] / half - vals[:, 1] / scale)
    return L1Proxy(v, err, scale, False, bias)


def proxy_scale(largest_n):
    return int(min(PROXY_SCALE_CAP, PROXY_FACTOR * largest_n))


# --------------------------------------------------------------------------
# finite-scale continuity


def finite_scale_continuity_probe(A, B1, B2, system, n, profile, C1, samples=10_000, seed=0,
                                  delta0=None, p=2, workers=1):
    """Check ``|Lambda^{(n)}(B1) - Lambda^{(n)}(B2)| < iota_n^{1/2}``.

    Preconditions: ``dist(B1, B2) < e^{-C1 n}`` and, when ``delta0`` is
    given, both cocycles within ``delta0`` of ``A``. Both exponents are
    estimated on the same orbits, so the error is that of the difference.
    """
    d = distance(B1, B2, p, system)
    if not d < math.exp(-C1 * n):
        raise GateError("distance", f"dist(B1, B2) = {d!r} is not below e^(-C1 n) = {math.exp(-C1 * n)!r}",
                        distance=d, limit=math.exp(-C1 * n))
    if delta0 is not None:
        for name, B in (("B1", B1), ("B2", B2)):
            dA = distance(B, A, p, system)
            if not dA < delta0:
                raise GateError("delta0", f"dist({name}, A) = {dA!r} is not below delta0 = {delta0!r}",
                                distance=dA, limit=delta0)
    vals = segment_log_norms([B1, B2], system, [(0, n)], samples, seed, workers)[:, :, 0] / n
    with np.errstate(invalid="ignore"):
        diff = vals[:, 0] - vals[:, 1]
    # identical -inf samples contribute no difference
    diff = np.where(np.isneginf(vals[:, 0]) & np.isneginf(vals[:, 1]), 0.0, diff)
    m, err, _ = mean_and_error(diff)
    return _row(n, less_than(abs(m), math.sqrt(float(profile.iota(n))), err), "finite-scale")


def continuity_scan(A, E, system, n_grid, profile, C1, samples=10_000, seed=0, p=2, workers=1):
    """:func:`finite_scale_continuity_probe` for ``B1 = A``, ``B2 = A + h E``.

    ``h`` is the largest ``e^{-C1 n} / 2^j`` with ``dist(A, B2) < e^{-C1 n} / 2``.
    """
    rep = ContinuityReport("finite-scale")
    for i, n in enumerate(sorted(int(v) for v in n_grid)):
        limit = math.exp(-C1 * n)
        h = limit
        B2 = Perturbed(A, E, h)
        while not distance(A, B2, p, system) < limit / 2:
            h /= 2
            B2 = Perturbed(A, E, h)
        row = finite_scale_continuity_probe(A, A, B2, system, n, profile, C1, samples,
                                            derive_seed(seed, i), p=p, workers=workers)
        rep.rows.append(row)
        rep.notes.setdefault("h", []).append(h)
    return rep


# --------------------------------------------------------------------------
# upper semicontinuity


@dataclass(frozen=True)
class USCEstimate:
    n: int
    violation: float
    ci_radius: float
    threshold: float
    mode: str
    predicted: float = None     # iota_n when a profile is given
    l1: L1Proxy = None


def usc_probe(A, B, system, n, level, mode="finite", samples=10_000, seed=0, delta=None,
              l1=None, profile=None, workers=1):
    """Fraction of phases with ``(1/n) log||B^{(n)}(x)||`` above the upper bound.

    ``mode='finite'``: the bound is ``L1(A) + level``; ``mode='neg_inf'``
    (``L1(A) = -inf``): the bound is ``-level``. ``l1`` may be a number or
    an :class:`L1Proxy`; by default the proxy of :func:`l1_proxy` is used.
    """
    if mode not in ("finite", "neg_inf"):
        raise InvalidInputError("mode must be 'finite' or 'neg_inf'")
    if delta is not None:
        d = distance(A, B, np.inf, system)
        if not d < delta:
            raise GateError("delta", f"dist(B, A) = {d!r} is not below delta = {delta!r}",
                            distance=d, limit=delta)
    proxy = None
    if mode == "finite":
        if l1 is None:
            l1 = l1_proxy(A, system, proxy_scale(n), samples, derive_seed(seed, 1), workers)
        proxy = l1 if isinstance(l1, L1Proxy) else L1Proxy(float(l1), 0.0, 0, True)
        thr = proxy.value + level
    else:
        thr = -level
    vals = segment_log_norms([B], system, [(0, n)], samples, seed, workers)[:, 0, 0] / n
    p = float(np.mean(vals > thr))
    pred = float(profile.iota(n)) if profile is not None else None
    return USCEstimate(int(n), p, wilson_radius(p, samples), thr, mode, pred, proxy)


# --------------------------------------------------------------------------
# speed of convergence


def _phi_clamped(profile, n):
    return phi(profile, max(float(n), float(psi(profile, profile.t_min))))


def speed_probe(B, system, profile, n_grid, C, samples=10_000, seed=0, n_max=None,
                proxy_samples=None, workers=1):
    """Check, per scale ``n``:

    * ``Lambda^{(n)} - L1 < C phi(n)/n`` (label ``speed``), with ``L1``
      proxied at ``n_max`` (default ``min(10^6, 100 max n)``);
    * ``|Lambda^{(n++)} + Lambda^{(n)} - 2 Lambda^{(2n)}| < C n/n++``
      (label ``step``). If ``n++`` exceeds ``n_max`` it is truncated to
      ``n_max`` (and at least ``2n + 1``) and the row is flagged.
    """
    grid = sorted(int(v) for v in n_grid)
    if not grid or grid[0] < profile.t_min:
        raise InvalidInputError("scales must be at least the profile threshold")
    n_max = int(n_max or proxy_scale(grid[-1]))
    proxy = l1_proxy(B, system, n_max, proxy_samples or samples, derive_seed(seed, 10**6), workers)
    rep = ContinuityReport("speed", notes={"l1_proxy": proxy, "truncated": [], "iota_prev_sqrt": []})
    for i, n in enumerate(grid):
        try:
            npp = next_scale(profile, n)
        except CapacityError:
            npp = math.inf
        n1 = npp
        if npp > n_max:
            n1 = max(n_max, 2 * n + 1)
            rep.notes["truncated"].append(n)
        segs = [(0, n), (0, 2 * n), (0, n1)]
        vals = segment_log_norms([B], system, segs, samples, derive_seed(seed, i), workers)[:, 0, :]
        lam = vals / np.array([n, 2 * n, n1])
        m, err, _ = mean_and_error(lam[:, 0])
        bound = C * _phi_clamped(profile, n) / n
        rep.rows.append(_row(n, less_than(m - proxy.value, bound, math.hypot(err, proxy.std_error)), "speed"))
        with np.errstate(invalid="ignore"):
            t, terr, _ = mean_and_error(lam[:, 2] + lam[:, 0] - 2 * lam[:, 1])
        rep.rows.append(_row(n, less_than(abs(t), C * n / n1, terr), "step"))
        rep.notes["iota_prev_sqrt"].append(math.sqrt(float(profile.iota(prev_scale(profile, n)))))
    return rep


# --------------------------------------------------------------------------
# modulus of continuity


def omega(h, profile, c, p=2.0):
    """``omega(h) = iota(c log(1/h))^{1 - 1/p}``; ``omega(0) = 0``.

    Below the profile threshold (``c log(1/h) < t_min``) the profile says
    nothing and ``omega`` is 1.
    """
    if not p > 1:
        raise InvalidInputError("p must be > 1")
    h = float(h)
    if h < 0:
        raise InvalidInputError("h must be >= 0")
    if h == 0:
        return 0.0
    if h >= 1:
        return 1.0
    t = c * math.log(1.0 / h)
    if t < profile.t_min:
        return 1.0
    return math.exp(-(1 - 1 / p) * float(profile.mesf.log_inv(t)))


def modulus_scan(A, E, system, h_grid, profile, c=None, C1=1.0, p=2.0, scale=None,
                 samples=10_000, seed=0, workers=1):
    """``|L1(A + hE) - L1(A)|`` against ``omega(h)`` over ``h_grid``.

    ``c`` defaults to ``1/(2 C1)``. Constant families are computed exactly;
    others use ``Lambda^{(scale)}`` on common orbits for every ``h``.
    The notes hold the log-log slope of the differences (empirical Holder
    exponent) over positive ``h`` with a nonzero difference.
    """
    if c is None:
        c = 1.0 / (2.0 * C1)
    hs = sorted(float(h) for h in h_grid)
    if any(h < 0 for h in hs):
        raise InvalidInputError("h must be >= 0")
    exact = constant_matrix(A) is not None and constant_matrix(E) is not None
    rep = ContinuityReport("modulus", notes={"c": c, "p": p, "exact": exact})
    if exact:
        base = exact_l1(constant_matrix(A))
        diffs = [(abs(exact_l1(constant_matrix(A) + h * constant_matrix(E)) - base), 0.0) for h in hs]
    else:
        scale = int(scale or 1000)
        rep.notes["scale"] = scale
        cocycles = [A] + [Perturbed(A, E, h) for h in hs]
        vals = segment_log_norms(cocycles, system, [(0, scale)], samples, seed, workers)[:, :, 0] / scale
        diffs = []
        for j in range(len(hs)):
            with np.errstate(invalid="ignore"):
                m, err, _ = mean_and_error(vals[:, j + 1] - vals[:, 0])
            diffs.append((abs(m), err))
    for h, (d, err) in zip(hs, diffs):
        rep.rows.append(_row(h, at_most(d, omega(h, profile, c, p), err), "modulus"))
    pos = [(h, d) for h, (d, _) in zip(hs, diffs) if h > 0 and d > 0]
    if len(pos) >= 2:
        x = np.log([h for h, _ in pos])
        y = np.log([d for _, d in pos])
        rep.notes["holder_slope"] = float(np.polyfit(x, y, 1)[0])
    return rep


# --------------------------------------------------------------------------
# full spectrum


@dataclass(frozen=True)
class Spectrum:
    n: int
    values: tuple               # Lambda_k^{(n)}, k = 1..m
    errors: tuple
    blocks: tuple               # Lambda_1^{(n)}(wedge_k A) = Lambda_1 + ... + Lambda_k
    block_errors: tuple
    samples: int = 0


def _check_exterior_dims(m):
    for k in range(1, m + 1):
        if linalg.exterior_dim(m, k) > MAX_EXTERIOR_DIM:
            raise CapacityError(f"exterior power of order {k} has dimension "
                                f"{linalg.exterior_dim(m, k)} > {MAX_EXTERIOR_DIM}")


def le_spectrum(A, system, n, samples=10_000, seed=0, workers=1):
    """All finite-scale exponents via the top exponent of successive exterior powers."""
    m = A.dim
    _check_exterior_dims(m)
    cocycles = [exterior(A, k) for k in range(1, m + 1)]
    vals = segment_log_norms(cocycles, system, [(0, n)], samples, seed, workers)[:, :, 0] / n
    blocks, berrs, values, errs = [], [], [], []
    prev = np.zeros(vals.shape[0])
    for k in range(m):
        b, be, _ = mean_and_error(vals[:, k])
        blocks.append(b)
        berrs.append(be)
        with np.errstate(invalid="ignore"):
            d = vals[:, k] - prev
        d = np.where(np.isnan(d), -np.inf, d)
        v, e, _ = mean_and_error(d)
        values.append(v)
        errs.append(e)
        prev = vals[:, k]
    return Spectrum(int(n), tuple(values), tuple(errs), tuple(blocks), tuple(berrs), int(samples))


def le_spectrum_exact(A, system, n):
    """Exact spectrum by word enumeration (symbol-indexed cocycles over shifts)."""
    _check_exterior_dims(A.dim)
    values = tuple(finite_scale_le_exact(A, system, n, k) for k in range(1, A.dim + 1))
    blocks = tuple(np.cumsum(values))
    return Spectrum(int(n), values, (0.0,) * len(values), tuple(float(b) for b in blocks),
                    (0.0,) * len(values))
