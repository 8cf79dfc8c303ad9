"""Ergodic base systems: Bernoulli and Markov shifts, torus translations.

Two access paths exist. The single-phase API (``sample_phase``, ``advance``,
``birkhoff_average``) works with immutable :class:`ShiftPhase` /
:class:`TorusPhase` values. Monte Carlo code instead pulls whole batches of
orbits from :meth:`orbit`, a generator yielding the points ``T^j x`` for
``j = 0, 1, 2, ...`` across a batch of independently sampled phases. Because
the generator draws one step at a time, the first ``n`` points of an orbit do
not depend on how long it is eventually iterated.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

PROB_TOL = 1e-12


def _as_prob_vector(p, name="p"):
    v = np.asarray(p, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has negative or non-finite entries")
    if abs(v.sum() - 1.0) > PROB_TOL:
        raise InvalidInputError(f"{name} sums to {float(v.sum())!r}, not 1")
    return v


def _cumulative(p):
    c = np.cumsum(p)
    c[-1] = 1.0
    return c


def _pick(cum, u):
    # index of the first cumulative bin exceeding u
    return np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)


class _Shift:
    """Shared behaviour of the one-sided shifts on a finite alphabet."""

    kind = "shift"

    @property
    def k(self):
        return len(self.initial)

    def orbit(self, rng, size):
        u = rng.random(size)
        x = _pick(self._cum_initial, u)
        while True:
            yield x
            x = self._next(x, rng.random(size))

    def word_measure(self, words):
        """Measure of the cylinders given by the rows of ``words``."""
        words = np.atleast_2d(np.asarray(words, dtype=np.intp))
        w = self.initial[words[:, 0]]
        for j in range(1, words.shape[1]):
            w = w * self._transition_prob(words[:, j - 1], words[:, j])
        return w


@dataclass(frozen=True)
class BernoulliShift(_Shift):
    """Full shift on ``k`` symbols with product measure ``p^N``."""

    p: tuple
    _cum_initial: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = _as_prob_vector(self.p)
        object.__setattr__(self, "p", tuple(float(t) for t in v))
        object.__setattr__(self, "_cum_initial", _cumulative(v))

    @property
    def initial(self):
        return np.asarray(self.p)

    stationary = initial

    def _next(self, x, u):
        return _pick(self._cum_initial, u)

    def _transition_prob(self, a, b):
        return self.initial[b]

    def to_config(self):
        return {"type": "bernoulli", "p": list(self.p)}


@dataclass(frozen=True)
class MarkovShift(_Shift):
    """Markov shift with stochastic matrix ``P`` started from its stationary law."""

    P: tuple
    pi: tuple = field(init=False)
    _cum_rows: np.ndarray = field(init=False, repr=False, compare=False)
    _cum_initial: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidInputError("transition matrix must be square")
        for i, row in enumerate(P):
            _as_prob_vector(row, name=f"P[{i}]")
        pi = stationary_vector(P)
        object.__setattr__(self, "P", tuple(tuple(float(t) for t in row) for row in P))
        object.__setattr__(self, "pi", tuple(float(t) for t in pi))
        object.__setattr__(self, "_cum_rows", np.array([_cumulative(r) for r in P]))
        object.__setattr__(self, "_cum_initial", _cumulative(pi))

    @property
    def initial(self):
        return np.asarray(self.pi)

    stationary = initial

    def _next(self, x, u):
        cum = self._cum_rows[x]
        return np.minimum((u[:, None] >= cum).sum(axis=1), self.k - 1)

    def _transition_prob(self, a, b):
        return np.asarray(self.P)[a, b]

    def to_config(self):
        return {"type": "markov", "P": [list(r) for r in self.P]}


def stationary_vector(P):
    """Stationary probability vector of a stochastic matrix, checked to 1e-10."""
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    lhs = np.vstack([P.T - np.eye(k), np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ P - pi)) > 1e-10:
        raise InvalidInputError("could not find a stationary vector (is P irreducible?)")
    return pi


@dataclass(frozen=True)
class TorusTranslation:
    """Translation ``x -> x + alpha (mod 1)`` on the d-torus with Lebesgue measure."""

    alpha: tuple
    kind = "torus"

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if a.ndim != 1 or a.size < 1:
            raise InvalidInputError("alpha must be a non-empty vector")
        if np.any(a < 0) or np.any(a >= 1) or not np.all(np.isfinite(a)):
            raise InvalidInputError("each frequency must lie in [0, 1)")
        object.__setattr__(self, "alpha", tuple(float(t) for t in a))

    @property
    def dim(self):
        return len(self.alpha)

    def orbit(self, rng, size):
        a = np.asarray(self.alpha)
        x = rng.random((size, self.dim))
        while True:
            yield x
            x = np.mod(x + a, 1.0)

    def to_config(self):
        return {"type": "torus", "alpha": list(self.alpha), "dim": self.dim}


# --------------------------------------------------------------------------
# single phases


class SymbolStream:
    """Lazily materialized symbol sequence of one shift phase.

    The sequence is a deterministic function of ``(system, seed)``; it is
    extended in blocks on demand, so reading a position twice always gives
    the same symbol.
    """

    block = 256

    def __init__(self, system, seed):
        self.system = system
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._symbols = np.empty(0, dtype=np.intp)

    def _extend(self, upto):
        chunks = [self._symbols]
        have = self._symbols.size
        sysm = self.system
        while have <= upto:
            u = self._rng.random(self.block)
            out = np.empty(self.block, dtype=np.intp)
            start = 0
            if have == 0:
                out[0] = _pick(sysm._cum_initial, u[:1])[0]
                start = 1
                prev = out[0]
            else:
                prev = chunks[-1][-1]
            for i in range(start, self.block):
                prev = sysm._next(np.array([prev]), u[i:i + 1])[0]
                out[i] = prev
            chunks.append(out)
            have += self.block
        self._symbols = np.concatenate(chunks)

    def __getitem__(self, j):
        if j >= self._symbols.size:
            self._extend(j)
        return int(self._symbols[j])

    def window(self, start, length):
        if start + length > self._symbols.size:
            self._extend(start + length)
        return self._symbols[start:start + length].copy()


@dataclass(frozen=True)
class ShiftPhase:
    stream: SymbolStream = field(repr=False)
    offset: int = 0

    def symbol(self, j=0):
        return self.stream[self.offset + j]

    def symbols(self, length):
        return self.stream.window(self.offset, length)


@dataclass(frozen=True)
class TorusPhase:
    point: tuple
    system: TorusTranslation = field(default=None, repr=False, compare=False)


def sample_phase(system, rng_seed):
    """A phase distributed according to the system's invariant measure."""
    if system.kind == "shift":
        return ShiftPhase(SymbolStream(system, rng_seed), 0)
    rng = np.random.default_rng(rng_seed)
    return TorusPhase(tuple(float(t) for t in rng.random(system.dim)), system)


def advance(system, x, steps):
    """``T^steps x``; the dynamics are one-sided so ``steps`` must be >= 0."""
    if steps < 0:
        raise InvalidInputError("cannot advance a one-sided system backwards")
    if system.kind == "shift":
        return ShiftPhase(x.stream, x.offset + int(steps))
    p = np.mod(np.asarray(x.point) + steps * np.asarray(system.alpha), 1.0)
    return TorusPhase(tuple(float(t) for t in p), system)


# --------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class CylinderIndicator:
    """Indicator of the cylinder ``{x : x_0 ... x_{L-1} = word}``."""

    word: tuple
    bound = 1.0

    @property
    def window(self):
        return len(self.word)

    def batch(self, symbols):
        # symbols: (size, window) int array
        return np.all(symbols == np.asarray(self.word), axis=1).astype(float)

    def mean(self, system):
        return float(system.word_measure([self.word])[0])


@dataclass(frozen=True)
class BoxIndicator:
    """Indicator of the half-open box ``prod [lower_i, upper_i)`` on the torus."""

    lower: tuple
    upper: tuple
    bound = 1.0
    window = 1

    def batch(self, points):
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.all((points >= lo) & (points < hi), axis=1).astype(float)

    def mean(self, system):
        lo = np.clip(np.asarray(self.lower, dtype=float), 0, 1)
        hi = np.clip(np.asarray(self.upper, dtype=float), 0, 1)
        return float(np.prod(np.clip(hi - lo, 0, None)))


@dataclass(frozen=True)
class FunctionObservable:
    """User-supplied bounded observable.

    ``func`` maps a batch of points to values: for shifts it receives an
    ``(size, window)`` array of symbols, for tori an ``(size, d)`` array.
    ``bound`` is the declared sup norm and is enforced on every evaluation.
    """

    func: object
    bound: float
    window: int = 1
    exact_mean: float = None

    def batch(self, points):
        v = np.asarray(self.func(points), dtype=float)
        if np.any(np.abs(v) > self.bound):
            raise InvalidInputError("observable exceeded its declared bound")
        return v

    def mean(self, system):
        return self.exact_mean


def constant_observable(c=1.0):
    return FunctionObservable(lambda pts: np.full(len(pts), float(c)), bound=abs(c), exact_mean=c)


def observe(system, xi, x):
    """Value of the observable at a single phase."""
    if system.kind == "shift":
        pts = x.symbols(xi.window)[None, :]
    else:
        pts = np.asarray(x.point, dtype=float)[None, :]
    return float(xi.batch(pts)[0])


def birkhoff_average(system, xi, x, n):
    """``(1/n) sum_{j<n} xi(T^j x)`` at a single phase."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if system.kind == "shift":
        s = x.symbols(n + xi.window - 1)
        wins = np.lib.stride_tricks.sliding_window_view(s, xi.window)
        return float(xi.batch(wins).mean())
    pts = np.mod(np.asarray(x.point)[None, :] + np.arange(n)[:, None] * np.asarray(system.alpha), 1.0)
    return float(xi.batch(pts).mean())


def birkhoff_batch(system, xi, n, rng, size):
    """Birkhoff averages at ``size`` freshly sampled phases."""
    orbit = system.orbit(rng, size)
    total = np.zeros(size)
    if system.kind == "shift":
        L = xi.window
        buf = [next(orbit) for _ in range(L)]
        for j in range(n):
            total += xi.batch(np.stack(buf, axis=1))
            if j + 1 < n:
                buf = buf[1:] + [next(orbit)]
    else:
        for j in range(n):
            total += xi.batch(next(orbit))
    return total / n
