"""Linear cocycles over the base systems and their finite-scale exponents.

A cocycle maps a phase to an ``m x m`` matrix ``A(x)``; its iterates are
``A^{(n)}(x) = A(T^{n-1}x) ... A(Tx) A(x)``. Products are accumulated with a
rescale after every step, keeping the log of the discarded scale, so scales
in the millions neither overflow nor underflow.
"""
from dataclasses import dataclass
from math import comb, log

import numpy as np

from . import linalg
from .dynamics import ShiftPhase, TorusPhase
from .errors import CapacityError, InvalidInputError
from .montecarlo import mean_and_error, segment_log_norms

KAPPA_CAP = 50.0
EXACT_WORD_LIMIT = 2 * 10**7
TORUS_GRID_POINTS = 10**4


class Cocycle:
    """Common interface. Subclasses implement ``batch`` and ``symbol_matrices``."""

    dim: int

    def batch(self, points):
        """Matrices at a batch of points: symbols ``(S,)`` or torus points ``(S, d)``."""
        raise NotImplementedError

    def symbol_matrices(self):
        """``(k, m, m)`` array if A(x) depends only on the current symbol, else None."""
        return None

    def check_system(self, system):
        pass

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True, eq=False)
class Constant(Cocycle):
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", linalg.as_square(self.matrix))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def batch(self, points):
        return np.broadcast_to(self.matrix, (len(points), self.dim, self.dim))

    def symbol_matrices(self):
        return self.matrix[None]

    def to_config(self):
        return {"type": "constant", "matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class LocallyConstant(Cocycle):
    """``A(x) = M[x_0]`` over a shift on ``len(matrices)`` symbols."""

    matrices: np.ndarray

    def __post_init__(self):
        mats = linalg.as_square(self.matrices, allow_stack=True)
        if mats.ndim != 3:
            raise InvalidInputError("expected a list of square matrices")
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self):
        return self.matrices.shape[1]

    def batch(self, points):
        return self.matrices[points]

    def symbol_matrices(self):
        return self.matrices

    def check_system(self, system):
        if system.kind != "shift" or system.k != len(self.matrices):
            raise InvalidInputError(
                f"locally constant cocycle with {len(self.matrices)} matrices needs a shift on as many symbols"
            )

    def to_config(self):
        return {"type": "locally_constant", "matrices": self.matrices.tolist()}


@dataclass(frozen=True, eq=False)
class TorusFunction(Cocycle):
    """Entrywise trigonometric polynomials of the torus point.

    ``entries[i][j]`` is a list of terms ``(k, a, b)`` standing for
    ``a cos(2 pi k.x) + b sin(2 pi k.x)`` with integer frequency vector ``k``.
    """

    entries: list
    torus_dim: int

    def __post_init__(self):
        m = len(self.entries)
        if m < 1 or any(len(row) != m for row in self.entries):
            raise InvalidInputError("entries must form a square table")
        rows, cols, freqs, cos_c, sin_c = [], [], [], [], []
        for i, row in enumerate(self.entries):
            for j, terms in enumerate(row):
                for term in terms:
                    k, a, b = term
                    k = np.atleast_1d(np.asarray(k, dtype=float))
                    if k.size != self.torus_dim:
                        raise InvalidInputError("frequency vector has the wrong dimension")
                    rows.append(i)
                    cols.append(j)
                    freqs.append(k)
                    cos_c.append(float(a))
                    sin_c.append(float(b))
        object.__setattr__(self, "_rows", np.array(rows, dtype=np.intp))
        object.__setattr__(self, "_cols", np.array(cols, dtype=np.intp))
        object.__setattr__(self, "_freqs", np.array(freqs).reshape(-1, self.torus_dim))
        object.__setattr__(self, "_cos", np.array(cos_c))
        object.__setattr__(self, "_sin", np.array(sin_c))

    @property
    def dim(self):
        return len(self.entries)

    def batch(self, points):
        pts = np.atleast_2d(points)
        theta = 2 * np.pi * pts @ self._freqs.T            # (S, T)
        vals = np.cos(theta) * self._cos + np.sin(theta) * self._sin
        out = np.zeros((len(pts), self.dim, self.dim))
        np.add.at(out, (slice(None), self._rows, self._cols), vals)
        return out

    def check_system(self, system):
        if system.kind != "torus" or system.dim != self.torus_dim:
            raise InvalidInputError(f"cocycle needs a translation on the {self.torus_dim}-torus")

    def to_config(self):
        return {
            "type": "torus_function",
            "torus_dim": self.torus_dim,
            "entries": [[[[list(np.atleast_1d(k)), a, b] for k, a, b in terms] for terms in row]
                        for row in self.entries],
        }


@dataclass(frozen=True, eq=False)
class Perturbed(Cocycle):
    """Pointwise ``base + h * direction``."""

    base: Cocycle
    direction: Cocycle
    h: float

    def __post_init__(self):
        if not self.h >= 0:
            raise InvalidInputError("perturbation magnitude must be >= 0")
        if self.base.dim != self.direction.dim:
            raise InvalidInputError("base and direction have different dimensions")

    @property
    def dim(self):
        return self.base.dim

    def batch(self, points):
        if self.h == 0:
            return self.base.batch(points)
        return self.base.batch(points) + self.h * self.direction.batch(points)

    def symbol_matrices(self):
        a, e = self.base.symbol_matrices(), self.direction.symbol_matrices()
        if a is None or e is None:
            return None
        return a + self.h * e

    def check_system(self, system):
        self.base.check_system(system)
        self.direction.check_system(system)

    def to_config(self):
        return {"type": "perturbed", "base": self.base.to_config(),
                "direction": self.direction.to_config(), "h": self.h}


@dataclass(frozen=True, eq=False)
class ExteriorPower(Cocycle):
    """The cocycle ``x -> wedge_k A(x)``."""

    base: Cocycle
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.base.dim:
            raise InvalidInputError(f"exterior order must be in [1, {self.base.dim}]")

    @property
    def dim(self):
        return comb(self.base.dim, self.k)

    def batch(self, points):
        return linalg._exterior_power(np.asarray(self.base.batch(points)), self.k)

    def symbol_matrices(self):
        mats = self.base.symbol_matrices()
        return None if mats is None else linalg._exterior_power(mats, self.k)

    def check_system(self, system):
        self.base.check_system(system)

    def to_config(self):
        return {"type": "exterior_power", "base": self.base.to_config(), "k": self.k}


def exterior(A, k):
    return A if k == 1 else ExteriorPower(A, k)


# --------------------------------------------------------------------------
# single-phase operations


def _phase_point(x):
    if isinstance(x, ShiftPhase):
        return np.array([x.symbol(0)])
    if isinstance(x, TorusPhase):
        return np.asarray(x.point, dtype=float)[None, :]
    raise InvalidInputError(f"not a phase: {x!r}")


def _phase_system(x):
    return x.stream.system if isinstance(x, ShiftPhase) else x.system


def evaluate(A, x):
    """The matrix ``A(x)``."""
    system = _phase_system(x)
    if system is not None:
        A.check_system(system)
    return np.array(A.batch(_phase_point(x))[0])


def iterate(A, x, n):
    """``(log ||A^{(n)}(x)||, A^{(n)}(x) / ||A^{(n)}(x)||)``.

    A vanishing product returns ``-inf`` and a zero matrix.
    """
    from .dynamics import advance

    if n < 1:
        raise InvalidInputError("n must be >= 1")
    system = _phase_system(x)
    P = np.eye(A.dim)
    total = 0.0
    for j in range(n):
        P = evaluate(A, advance(system, x, j)) @ P
        f = np.linalg.norm(P)
        if f == 0:
            return -np.inf, np.zeros_like(P)
        total += log(f)
        P /= f
    s1 = linalg.op_norm(P)
    return total + log(s1), P / s1


# --------------------------------------------------------------------------
# finite-scale exponents


@dataclass(frozen=True)
class FiniteScaleLE:
    n: int
    k: int
    value: float
    std_error: float
    samples: int
    seed: int = None
    neg_inf: int = 0

    @property
    def is_neg_inf(self):
        return self.value == -np.inf


def log_sv_samples(A, system, scales, samples, seed, k=1, workers=1):
    """Per-sample ``log s_k(A^{(n)}(x))`` for each ``n`` in ``scales``.

    ``log s_k = log||wedge_k P|| - log||wedge_{k-1} P||``; both products run
    along the same orbits. Shape ``(samples, len(scales))``.
    """
    A.check_system(system)
    if not 1 <= k <= A.dim:
        raise InvalidInputError(f"k must be in [1, {A.dim}]")
    segs = [(0, int(n)) for n in scales]
    if k == 1:
        return segment_log_norms([A], system, segs, samples, seed, workers)[:, 0, :]
    out = segment_log_norms([exterior(A, k), exterior(A, k - 1)], system, segs, samples, seed, workers)
    with np.errstate(invalid="ignore"):
        diff = out[:, 0, :] - out[:, 1, :]
    # -inf - (-inf): both exterior products vanish, so s_k = 0 as well
    return np.where(np.isnan(diff), -np.inf, diff)


def finite_scale_le(A, system, n, k=1, samples=10_000, seed=0, workers=1):
    """Monte Carlo estimate of ``Lambda_k^{(n)} = E (1/n) log s_k(A^{(n)}(x))``."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    vals = log_sv_samples(A, system, [n], samples, seed, k=k, workers=workers)[:, 0] / n
    mean, err, neg = mean_and_error(vals)
    return FiniteScaleLE(int(n), int(k), mean, err, int(samples), seed, neg)


def _word_batches(alphabet, n, batch=1 << 16):
    total = alphabet ** n
    powers = alphabet ** np.arange(n, dtype=np.int64)
    for start in range(0, total, batch):
        idx = np.arange(start, min(start + batch, total), dtype=np.int64)
        yield (idx[:, None] // powers) % alphabet      # column j = symbol at time j


def finite_scale_le_exact(A, system, n, k=1):
    """Exact ``Lambda_k^{(n)}`` by enumerating every word of length ``n``.

    Requires a symbol-indexed cocycle over a Bernoulli or Markov shift.
    """
    mats = A.symbol_matrices()
    if system.kind != "shift" or mats is None:
        raise InvalidInputError("exact enumeration needs a symbol-indexed cocycle over a shift")
    if len(mats) == 1:
        mats = np.broadcast_to(mats, (system.k,) + mats.shape[1:])
    A.check_system(system)
    if not 1 <= k <= A.dim:
        raise InvalidInputError(f"k must be in [1, {A.dim}]")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if system.k ** n > EXACT_WORD_LIMIT:
        raise CapacityError(f"{system.k}^{n} words exceed the enumeration limit {EXACT_WORD_LIMIT}")

    def log_norm_products(M, words):
        P = np.broadcast_to(np.eye(M.shape[1]), (len(words),) + M.shape[1:]).copy()
        logs = np.zeros(len(words))
        for j in range(n):
            P = np.matmul(M[words[:, j]], P)
            f = np.sqrt(np.einsum("sij,sij->s", P, P))
            with np.errstate(divide="ignore"):
                logs += np.log(f)
            P /= np.where(f > 0, f, 1.0)[:, None, None]
        with np.errstate(divide="ignore"):
            return logs + np.log(np.linalg.svd(P, compute_uv=False)[:, 0])

    upper = linalg._exterior_power(np.asarray(mats), k) if k > 1 else np.asarray(mats)
    lower = linalg._exterior_power(np.asarray(mats), k - 1) if k > 2 else np.asarray(mats)
    total = 0.0
    for words in _word_batches(system.k, n):
        w = system.word_measure(words)
        keep = w > 0
        if not np.any(keep):
            continue
        words, w = words[keep], w[keep]
        vals = log_norm_products(upper, words)
        if k > 1:
            with np.errstate(invalid="ignore"):
                vals = vals - log_norm_products(lower, words)
            vals = np.where(np.isnan(vals), -np.inf, vals)
        if np.any(np.isneginf(vals)):
            return -np.inf
        total += float(np.dot(w, vals))
    return total / n


@dataclass(frozen=True)
class SpectralGapEstimate:
    kappa: float
    kappa_cap: float = KAPPA_CAP
    lambda1: FiniteScaleLE = None
    lambda2: FiniteScaleLE = None
    capped: bool = False


def spectral_gap(A, system, n, samples=10_000, seed=0, kappa_cap=KAPPA_CAP, workers=1):
    """Finite-scale estimate of ``kappa = L1 - L2``, capped when ``L2 = -inf``."""
    if A.dim < 2:
        raise InvalidInputError("spectral gap needs dimension >= 2")
    l1 = finite_scale_le(A, system, n, 1, samples, seed, workers)
    l2 = finite_scale_le(A, system, n, 2, samples, seed, workers)
    if l2.is_neg_inf or l1.value - l2.value > kappa_cap:
        return SpectralGapEstimate(kappa_cap, kappa_cap, l1, l2, True)
    return SpectralGapEstimate(l1.value - l2.value, kappa_cap, l1, l2, False)


# --------------------------------------------------------------------------
# distances


def _evaluation_grid(A, B, system):
    """Points and weights on which sup / L^p norms are evaluated.

    Symbol-indexed cocycles are exact on the support of the one-symbol
    marginal; torus cocycles use a fixed low-discrepancy grid.
    """
    if A.symbol_matrices() is not None and B.symbol_matrices() is not None:
        if system is None or system.kind != "shift":
            if len(A.symbol_matrices()) == 1 and len(B.symbol_matrices()) == 1:
                return np.array([0]), np.array([1.0])
            raise InvalidInputError("a shift system is needed to compare these cocycles")
        w = np.asarray(system.stationary)
        pts = np.nonzero(w > 0)[0]
        return pts, w[pts] / w[pts].sum()
    if system is None or system.kind != "torus":
        raise InvalidInputError("a torus system is needed to compare these cocycles")
    from scipy.stats import qmc

    pts = qmc.Halton(d=system.dim, scramble=False).random(TORUS_GRID_POINTS)
    return pts, np.full(len(pts), 1.0 / len(pts))


def _gather(A, pts):
    mats = A.symbol_matrices()
    if mats is not None and np.issubdtype(np.asarray(pts).dtype, np.integer):
        return mats[np.minimum(pts, len(mats) - 1)]
    return np.asarray(A.batch(pts))


def sup_norm(A, system=None):
    """Sup of ``||A(x)||`` over the evaluation grid (essential sup check)."""
    pts, _ = _evaluation_grid(A, A, system)
    return float(linalg.op_norm(_gather(A, pts)).max())


def distance(A, B, p=np.inf, system=None):
    """``||A - B||_sup + ||log||A^{-1}|| - log||B^{-1}|| ||_{L^p}``.

    For ``p = inf`` only the sup term is used. If either cocycle is singular
    somewhere on the grid the log term is undefined and dropped.
    """
    if A.dim != B.dim:
        raise InvalidInputError("cocycles have different dimensions")
    if not p > 1:
        raise InvalidInputError("p must lie in (1, inf]")
    if system is not None:
        A.check_system(system)
        B.check_system(system)
    pts, w = _evaluation_grid(A, B, system)
    a, b = _gather(A, pts), _gather(B, pts)
    sup = float(linalg.op_norm(a - b).max())
    if p == np.inf:
        return sup
    sa = np.linalg.svd(a, compute_uv=False)[:, -1]
    sb = np.linalg.svd(b, compute_uv=False)[:, -1]
    if np.any(sa <= 0) or np.any(sb <= 0):
        return sup
    # ||g^{-1}|| = 1 / s_m(g)
    diff = np.abs(np.log(sb) - np.log(sa))
    return sup + float(np.dot(w, diff ** p) ** (1.0 / p))
