"""Deviation profiles, scale maps and empirical large-deviation probes.

A profile pairs a deviation size function ``eps(t)`` with a deviation-set
measure function ``iota(t)``. The measure functions decay like exponentials
or sub-exponentials; everything is evaluated through ``log(1/iota(t))`` so
that large scales do not underflow.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import finite_scale_le, log_sv_samples
from .dynamics import birkhoff_batch
from .errors import CapacityError, InvalidInputError
from .montecarlo import derive_seed, map_chunks

T_MIN = 3.0
CI_Z = 3.0


# --------------------------------------------------------------------------
# deviation size functions


@dataclass(frozen=True)
class ConstantDeviation:
    eps0: float

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.eps0)[()]

    def to_config(self):
        return {"type": "constant", "eps0": self.eps0}


@dataclass(frozen=True)
class PowerDeviation:
    a: float

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** (-self.a)

    def to_config(self):
        return {"type": "power", "a": self.a}


# --------------------------------------------------------------------------
# deviation-set measure functions


@dataclass(frozen=True)
class Exponential:
    """``iota(t) = exp(-c t)``."""

    c: float

    def log_inv(self, t):
        return self.c * np.asarray(t, dtype=float)

    def __call__(self, t):
        return np.exp(-self.log_inv(t))

    def to_config(self):
        return {"type": "exponential", "c": self.c}


@dataclass(frozen=True)
class SubExpPower:
    """``iota(t) = exp(-c t^b)``, ``0 < b < 1``."""

    c: float
    b: float

    def __post_init__(self):
        if not 0 < self.b < 1:
            raise InvalidInputError("sub-exponential power needs 0 < b < 1")

    def log_inv(self, t):
        return self.c * np.asarray(t, dtype=float) ** self.b

    def __call__(self, t):
        return np.exp(-self.log_inv(t))

    def to_config(self):
        return {"type": "subexp_power", "c": self.c, "b": self.b}


@dataclass(frozen=True)
class SubExpLog:
    """``iota(t) = exp(-c t / (log t)^b)``, ``0 < b < 1``; needs ``t > 1``."""

    c: float
    b: float

    def __post_init__(self):
        if not 0 < self.b < 1:
            raise InvalidInputError("sub-exponential log class needs 0 < b < 1")

    def log_inv(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 1):
            raise InvalidInputError("SubExpLog is only defined for t > 1")
        return self.c * t / np.log(t) ** self.b

    def __call__(self, t):
        return np.exp(-self.log_inv(t))

    def to_config(self):
        return {"type": "subexp_log", "c": self.c, "b": self.b}


# --------------------------------------------------------------------------
# profiles and scale maps


@dataclass(frozen=True)
class DeviationProfile:
    devf: object
    mesf: object
    t_min: float = T_MIN

    def __post_init__(self):
        if self.t_min < T_MIN:
            raise InvalidInputError(f"t_min must be >= {T_MIN}")

    def eps(self, t):
        return self.devf(t)

    def iota(self, t):
        return self.mesf(t)

    def to_config(self):
        return {"devf": self.devf.to_config(), "mesf": self.mesf.to_config(), "t_min": self.t_min}


@dataclass(frozen=True)
class LDTParameter:
    n0: int
    profile: DeviationProfile = field(repr=False)

    def __post_init__(self):
        if self.n0 < self.profile.t_min:
            raise InvalidInputError("n0 must be at least the profile threshold t_min")


def _check_domain(profile, t):
    if np.any(np.asarray(t) < profile.t_min):
        raise InvalidInputError(f"t={t!r} is below the profile threshold {profile.t_min}")


def log_psi(profile, t):
    """``log psi(t) = log t + log(1/iota(t)) / 2``."""
    _check_domain(profile, t)
    t = np.asarray(t, dtype=float)
    return (np.log(t) + 0.5 * profile.mesf.log_inv(t))[()]


def psi(profile, t):
    """``psi(t) = t * iota(t)^{-1/2}``; may be ``inf`` when it overflows."""
    with np.errstate(over="ignore"):
        return np.exp(log_psi(profile, t))[()]


def phi(profile, s, rtol=1e-13):
    """Inverse of :func:`psi` on ``[psi(t_min), inf)``, by bisection."""
    s = float(s)
    if not s > 0:
        raise InvalidInputError("phi needs a positive argument")
    target = math.log(s)
    lo = profile.t_min
    f_lo = float(log_psi(profile, lo))
    if target < f_lo * (1 - 1e-15) - 1e-15:
        raise InvalidInputError(f"s={s!r} is below psi(t_min)")
    if target <= f_lo:
        return lo
    hi = 2.0 * lo
    while float(log_psi(profile, hi)) < target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise CapacityError("phi bracket overflowed")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if float(log_psi(profile, mid)) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def next_scale(profile, n):
    """``n++ = floor(n * iota(n)^{-1/2})``, at least ``n + 1``.

    The floor can equal ``n`` when ``iota`` decays so slowly that the jump
    is below one; the next integer is used then.
    """
    lp = float(log_psi(profile, n))
    if lp > 700:
        raise CapacityError(f"next scale after {n} overflows (log = {lp:.1f})")
    return max(int(math.floor(math.exp(lp))), int(n) + 1)


def prev_scale(profile, n):
    """``n-- = floor(phi(n))``; scales below ``psi(t_min)`` map to ``t_min``."""
    s = max(float(n), float(psi(profile, profile.t_min)))
    return int(math.floor(phi(profile, s)))


# --------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class Admissibility:
    devf_nonincreasing: bool
    mesf_decreasing: bool
    growth_sandwich: bool
    phi_doubling: bool
    max_phi_ratio: float

    @property
    def ok(self):
        return self.devf_nonincreasing and self.mesf_decreasing and self.growth_sandwich and self.phi_doubling


def admissibility(profile, t_max=1e6, points=200):
    """Grid checks of the structural assumptions on a profile.

    * ``eps`` non-increasing and ``iota`` strictly decreasing on the grid;
    * ``log t <~ log(1/iota(t)) <~ t``: the ratio to ``log t`` does not
      decay and the ratio to ``t`` does not grow across the grid;
    * ``phi(2s)/phi(s) < 2`` for ``s`` on a geometric grid up to ``t_max``.
    """
    t = np.geomspace(profile.t_min, t_max, points)
    eps = np.asarray(profile.eps(t), dtype=float)
    li = np.asarray(profile.mesf.log_inv(t), dtype=float)
    devf_ok = bool(np.all(np.diff(eps) <= 0))
    mesf_ok = bool(np.all(np.diff(li) > 0) and li[0] > 0)
    lower = li / np.log(t)
    upper = li / t
    sandwich = bool(np.all(lower > 0) and lower[-1] >= lower[0] * (1 - 1e-12)
                    and upper[-1] <= upper[0] * (1 + 1e-12))
    s0 = float(psi(profile, profile.t_min))
    ratios = []
    if mesf_ok and s0 < t_max / 2:
        for s in np.geomspace(s0, t_max / 2, points):
            ratios.append(phi(profile, 2 * s) / phi(profile, s))
    max_ratio = max(ratios) if ratios else float("nan")
    doubling = bool(ratios) and max_ratio < 2
    return Admissibility(devf_ok, mesf_ok, sandwich, doubling, max_ratio)


# --------------------------------------------------------------------------
# empirical probes


@dataclass(frozen=True)
class LDTEstimate:
    n: int
    measure: float
    ci_radius: float
    deviation: float
    mean: float
    samples: int
    neg_inf: int = 0


def wilson_radius(p_hat, samples, z=CI_Z):
    """Half-width of the Wilson score interval."""
    n = float(samples)
    return z / (1 + z * z / n) * math.sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n))


def _deviation_at(deviation, n):
    return float(deviation(n)) if callable(deviation) else float(deviation)


def empirical_base_ldt(system, xi, n, samples, seed, deviation, mean=None, workers=1):
    """Fraction of phases whose Birkhoff average misses the mean by more than ``deviation``.

    ``deviation`` is a number or a deviation size function of ``n``. Without
    an exact ``mean`` (and none known to the observable), it is estimated
    from ten times as many independent samples first.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if mean is None:
        mean = xi.mean(system)
    if mean is None:
        ref = map_chunks(lambda rng, size: birkhoff_batch(system, xi, n, rng, size),
                         10 * samples, derive_seed(seed, 1), workers)
        mean = float(ref.mean())
    dev = _deviation_at(deviation, n)
    avgs = map_chunks(lambda rng, size: birkhoff_batch(system, xi, n, rng, size), samples, seed, workers)
    p = float(np.mean(np.abs(avgs - mean) > dev))
    return LDTEstimate(int(n), p, wilson_radius(p, samples), dev, float(mean), int(samples))


def empirical_fiber_ldt(A, system, n, samples, seed, deviation, lam=None, workers=1):
    """Fraction of phases with ``|(1/n) log||A^{(n)}(x)|| - Lambda^{(n)}| > deviation``.

    ``Lambda^{(n)}`` is estimated with ten times the sample count on an
    independent seed unless given. ``-inf`` samples count as violations.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if lam is None:
        lam = finite_scale_le(A, system, n, 1, 10 * samples, derive_seed(seed, 1), workers).value
    dev = _deviation_at(deviation, n)
    vals = log_sv_samples(A, system, [n], samples, seed, workers=workers)[:, 0] / n
    neg = int(np.sum(np.isneginf(vals)))
    with np.errstate(invalid="ignore"):
        bad = ~(np.abs(vals - lam) <= dev)
    p = float(np.mean(bad))
    return LDTEstimate(int(n), p, wilson_radius(p, samples), dev, float(lam), int(samples), neg)


@dataclass(frozen=True)
class MesfFit:
    mesf: Exponential
    r_squared: float
    slope: float
    intercept: float
    corrected: tuple = ()

    @property
    def c(self):
        return self.mesf.c


def fit_mesf(estimates, samples=None):
    """Least-squares fit of ``log(measure)`` against ``n``; returns ``Exponential(-slope)``.

    ``estimates`` holds ``(n, measure)`` pairs or :class:`LDTEstimate`
    values. Zero measures are replaced by ``1 / (2 samples)`` and their
    indices reported in ``corrected``.
    """
    pts = [(e.n, e.measure) if isinstance(e, LDTEstimate) else tuple(e) for e in estimates]
    if samples is None:
        found = [e.samples for e in estimates if isinstance(e, LDTEstimate)]
        samples = min(found) if found else None
    if len(pts) < 4:
        raise InvalidInputError("need at least four scales to fit")
    n = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if np.any(v < 0) or np.any(v > 1):
        raise InvalidInputError("measures must lie in [0, 1]")
    corrected = tuple(int(i) for i in np.nonzero(v == 0)[0])
    if corrected:
        if samples is None:
            raise InvalidInputError("zero measures need the sample count for the continuity correction")
        v = np.where(v == 0, 1.0 / (2 * samples), v)
    y = np.log(v)
    slope, intercept = np.polyfit(n, y, 1)
    resid = y - (slope * n + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-24 else 0.0)
    return MesfFit(Exponential(float(-slope)), r2, float(slope), float(intercept), corrected)
