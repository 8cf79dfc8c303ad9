"""Shared test cocycles and independent oracles."""
import itertools

import mpmath
import numpy as np

from cocyclab.avalanche import rotation
from cocyclab.cocycle import LocallyConstant, Perturbed
from cocyclab.dynamics import BernoulliShift

FAIR = BernoulliShift((0.5, 0.5))


def hyperbolic_cocycle(angle=0.15):
    """``diag(2, 1/2) R(+-angle)`` over a fair coin; gap close to log 4."""
    D = np.diag([2.0, 0.5])
    return LocallyConstant(np.array([D @ rotation(angle), D @ rotation(-angle)]))


def e11_direction(k=2):
    E = np.zeros((k, 2, 2))
    E[:, 0, 0] = 1.0
    return LocallyConstant(E)


def perturbed_hyperbolic(h=1e-3, angle=0.15):
    return Perturbed(hyperbolic_cocycle(angle), e11_direction(), h)


def charpoly_singular_values(g):
    """Singular values from the characteristic polynomial of g^T g (Faddeev-LeVerrier)."""
    S = np.asarray(g, dtype=float).T @ np.asarray(g, dtype=float)
    m = S.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(S)
    for k in range(1, m + 1):
        M = S @ M + coeffs[-1] * np.eye(m)
        coeffs.append(-np.trace(S @ M) / k)
    roots = np.roots(coeffs).real
    return np.sqrt(np.sort(np.clip(roots, 0, None))[::-1])


def leibniz_det(a):
    """Determinant by the permutation expansion."""
    a = np.asarray(a, dtype=float)
    k = a.shape[0]
    total = 0.0
    for perm in itertools.permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        prod = 1.0
        for i in range(k):
            prod *= a[i, perm[i]]
        total += (-1) ** inv * prod
    return total


def minor_matrix(g, k):
    """k x k minors of g in lexicographic order of row and column subsets."""
    m = g.shape[0]
    subs = list(itertools.combinations(range(m), k))
    return np.array([[leibniz_det(g[np.ix_(r, c)]) for c in subs] for r in subs])


def mp_log_norm_product(mats, dps=50):
    """log of the operator norm of mats[-1] ... mats[0] in extended precision."""
    with mpmath.workdps(dps):
        P = mpmath.eye(mats[0].shape[0])
        for g in mats:
            P = mpmath.matrix(g.tolist()) * P
        s = mpmath.svd_r(P, compute_uv=False)
        return float(mpmath.log(max(s)))


def mp_ap_defect(chain, dps=60):
    """Avalanche defect computed from the raw product in extended precision."""
    with mpmath.workdps(dps):
        mats = [mpmath.matrix(g.tolist()) for g in chain]

        def lognorm(M):
            return mpmath.log(max(mpmath.svd_r(M, compute_uv=False)))

        P = mats[0]
        for g in mats[1:]:
            P = g * P
        total = lognorm(P)
        total += mpmath.fsum(lognorm(g) for g in mats[1:-1])
        total -= mpmath.fsum(lognorm(mats[i] * mats[i - 1]) for i in range(1, len(mats)))
        return float(abs(total))


def fluctuating_cocycle():
    """Hyperbolic cocycle whose finite-scale log-norms fluctuate visibly at eps = 0.05."""
    return hyperbolic_cocycle(0.6)


def fitted_profile(A, system=FAIR, eps=0.05, grid=(10, 20, 30, 40), samples=5000, seed=3):
    """Exponential deviation profile fitted to the fiber deviation sets of A."""
    from cocyclab import ldt

    ests = [ldt.empirical_fiber_ldt(A, system, n, samples, seed, eps) for n in grid]
    fit = ldt.fit_mesf(ests)
    return ldt.DeviationProfile(ldt.ConstantDeviation(eps), fit.mesf), fit
