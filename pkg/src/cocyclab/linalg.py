"""Small dense matrix primitives.

Everything here accepts a single ``(m, m)`` array or a stack ``(..., m, m)``
and is a pure function of its arguments.
"""
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .errors import InvalidInputError

# s2 below this fraction of s1 counts as an exact zero for gap_ratio
RANK_TOL = 1e-12


def as_square(g, allow_stack=False):
    """Validate ``g`` as a finite real square matrix (or stack of them)."""
    a = np.asarray(g, dtype=float)
    if a.ndim < 2 or (a.ndim > 2 and not allow_stack):
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[-1] != a.shape[-2] or a.shape[-1] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def singular_values(g):
    """All singular values of ``g`` in non-increasing order."""
    a = as_square(g, allow_stack=True)
    return np.linalg.svd(a, compute_uv=False)


def op_norm(g):
    """Operator (spectral) norm, i.e. the largest singular value."""
    a = as_square(g, allow_stack=True)
    return np.linalg.svd(a, compute_uv=False)[..., 0]


@lru_cache(maxsize=None)
def subsets(m, k):
    """Lexicographically ordered k-subsets of range(m), as an int array."""
    return np.array(list(combinations(range(m), k)), dtype=np.intp).reshape(-1, k)


def exterior_dim(m, k):
    return comb(m, k)


def exterior_power(g, k):
    """Matrix of k x k minors of ``g`` in the lexicographic subset basis.

    Entry ``(I, J)`` is ``det g[I, J]``. Works on stacks; the result for a
    stack of shape ``(..., m, m)`` has shape ``(..., C(m,k), C(m,k))``.
    """
    a = as_square(g, allow_stack=True)
    m = a.shape[-1]
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= m:
        raise InvalidInputError(f"exterior power order must satisfy 1 <= k <= {m}, got {k}")
    return _exterior_power(a, int(k))


def _exterior_power(a, k):
    # unchecked path, used inside hot loops
    m = a.shape[-1]
    if k == 1:
        return a.copy()
    if k == m:
        return np.linalg.det(a)[..., None, None]
    idx = subsets(m, k)
    rows = a[..., idx, :]                   # (..., C, k, m)
    sub = np.swapaxes(rows[..., idx], -3, -2)   # (..., C, C, k, k)
    return np.linalg.det(sub)


def gap_ratio(g):
    """Ratio s1/s2 of the two largest singular values, in [1, inf].

    Returns ``inf`` when s2 is numerically zero (s2 <= 1e-12 * s1).
    """
    a = as_square(g, allow_stack=True)
    if a.shape[-1] < 2:
        raise InvalidInputError("gap ratio needs dimension >= 2")
    s = np.linalg.svd(a, compute_uv=False)
    s1, s2 = s[..., 0], s[..., 1]
    degenerate = s2 <= RANK_TOL * s1
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(degenerate, np.inf, s1 / np.where(degenerate, 1.0, s2))
    return out[()] if out.ndim == 0 else out


def log_norm(g):
    """Natural log of the operator norm; ``-inf`` for the zero matrix."""
    with np.errstate(divide="ignore"):
        return np.log(op_norm(g))
