import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from cocyclab import cocycle as cc
from cocyclab import dynamics as dyn
from cocyclab import ldt
from cocyclab.errors import CapacityError, InvalidInputError
from helpers import FAIR, fluctuating_cocycle

EXP1 = ldt.DeviationProfile(ldt.ConstantDeviation(0.1), ldt.Exponential(1.0))
FIRST = dyn.CylinderIndicator((0,))


def profiles():
    out = []
    for c in (0.01, 0.5, 2.0):
        out.append(ldt.DeviationProfile(ldt.PowerDeviation(0.1), ldt.Exponential(c)))
        for b in (0.3, 0.5, 0.8):
            out.append(ldt.DeviationProfile(ldt.ConstantDeviation(0.1), ldt.SubExpPower(c, b)))
            out.append(ldt.DeviationProfile(ldt.ConstantDeviation(0.1), ldt.SubExpLog(c, b)))
    return out


PROFILES = profiles()


def binomial_tail(n, p, eps):
    """P(|Bin(n, p)/n - p| > eps) computed exactly."""
    k = np.arange(n + 1)
    mask = np.abs(k / n - p) > eps + 1e-12
    return float(binom.pmf(k[mask], n, p).sum())


# --------------------------------------------------------------------------
# profiles


def test_profile_threshold():
    with pytest.raises(InvalidInputError):
        ldt.DeviationProfile(ldt.ConstantDeviation(0.1), ldt.Exponential(1.0), t_min=2.0)
    with pytest.raises(InvalidInputError):
        ldt.LDTParameter(2, EXP1)
    assert ldt.LDTParameter(3, EXP1).n0 == 3


@pytest.mark.parametrize("b", [0.0, 1.0, 1.5])
def test_subexp_exponent_range(b):
    with pytest.raises(InvalidInputError):
        ldt.SubExpPower(1.0, b)
    with pytest.raises(InvalidInputError):
        ldt.SubExpLog(1.0, b)


def test_subexp_log_needs_t_above_one():
    with pytest.raises(InvalidInputError):
        ldt.SubExpLog(1.0, 0.5).log_inv(1.0)


def test_measure_functions_closed_forms():
    t = 7.5
    assert ldt.Exponential(0.3)(t) == pytest.approx(math.exp(-2.25))
    assert ldt.SubExpPower(0.3, 0.5)(t) == pytest.approx(math.exp(-0.3 * t ** 0.5))
    assert ldt.SubExpLog(0.3, 0.5)(t) == pytest.approx(math.exp(-0.3 * t / math.log(t) ** 0.5))
    assert ldt.PowerDeviation(0.5)(4.0) == 0.5


@pytest.mark.parametrize("profile", PROFILES, ids=lambda p: repr(p.mesf))
def test_builtin_classes_are_admissible(profile):
    adm = ldt.admissibility(profile)
    assert adm.ok, adm
    assert adm.max_phi_ratio < 2


def test_growing_deviation_is_not_admissible():
    p = ldt.DeviationProfile(ldt.PowerDeviation(-0.5), ldt.Exponential(1.0))
    assert not ldt.admissibility(p).devf_nonincreasing


# --------------------------------------------------------------------------
# psi / phi


def test_psi_exponential_closed_form():
    for t in (3.0, 10.0, 50.0):
        assert ldt.psi(EXP1, t) == pytest.approx(t * math.exp(t / 2), rel=1e-14)


def test_psi_below_domain():
    with pytest.raises(InvalidInputError):
        ldt.psi(EXP1, 2.9)


@pytest.mark.parametrize("profile", PROFILES, ids=lambda p: repr(p.mesf))
def test_psi_exceeds_t_and_is_increasing(profile):
    t = np.arange(3.0, 1001.0)
    lp = ldt.log_psi(profile, t)
    assert np.all(lp > np.log(t))
    assert np.all(np.diff(lp) > 0)


def test_phi_at_domain_start():
    assert ldt.phi(EXP1, 3 * math.exp(1.5)) == pytest.approx(3.0, abs=1e-8)


def test_phi_below_range():
    with pytest.raises(InvalidInputError):
        ldt.phi(EXP1, 10.0)


@pytest.mark.parametrize("profile", PROFILES, ids=lambda p: repr(p.mesf))
def test_phi_inverts_psi(profile):
    for t in np.geomspace(3, 1e3, 25):
        if ldt.log_psi(profile, t) > 700:
            break
        assert ldt.phi(profile, ldt.psi(profile, t)) == pytest.approx(t, rel=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PROFILES), st.floats(0.0, 1.0))
def test_psi_of_phi_is_identity(profile, u):
    s0 = float(ldt.psi(profile, profile.t_min))
    s = s0 * (1e6 / s0) ** u if s0 < 1e6 else s0 * (1 + u)
    assert ldt.psi(profile, ldt.phi(profile, s)) == pytest.approx(s, rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(PROFILES), st.floats(1.0, 1e3), st.floats(1.0001, 10.0))
def test_phi_increasing(profile, a, r):
    s0 = float(ldt.psi(profile, profile.t_min))
    assert ldt.phi(profile, s0 * a * r) > ldt.phi(profile, s0 * a)


@pytest.mark.parametrize("profile", PROFILES[:4], ids=lambda p: repr(p.mesf))
def test_phi_doubling_grid(profile):
    s0 = float(ldt.psi(profile, profile.t_min))
    for s in np.geomspace(s0, 1e6, 40):
        assert ldt.phi(profile, 2 * s) / ldt.phi(profile, s) < 2


# --------------------------------------------------------------------------
# scales


def test_next_scale_closed_form():
    p = ldt.DeviationProfile(ldt.ConstantDeviation(0.1), ldt.Exponential(2.0))
    assert ldt.next_scale(p, 10) == math.floor(10 * math.exp(10))


def test_next_scale_slow_decay_still_grows():
    p = ldt.DeviationProfile(ldt.ConstantDeviation(0.1), ldt.Exponential(0.01))
    assert math.floor(ldt.psi(p, 3)) == 3
    assert ldt.next_scale(p, 3) == 4


def test_next_scale_overflow_guard():
    with pytest.raises(CapacityError):
        ldt.next_scale(EXP1, 5000)


@pytest.mark.parametrize("profile", PROFILES, ids=lambda p: repr(p.mesf))
def test_scale_round_trip(profile):
    for n in list(range(3, 60)) + [100, 250, 600]:
        nn = ldt.next_scale(profile, n)
        assert nn > n
        assert abs(ldt.prev_scale(profile, nn) - n) <= 1


def test_prev_scale_clamps_small_scales():
    assert ldt.prev_scale(EXP1, 5) == 3


# --------------------------------------------------------------------------
# base probe


def test_impossible_deviation_has_measure_zero():
    est = ldt.empirical_base_ldt(FAIR, FIRST, 20, 2000, 0, deviation=2.5)
    assert est.measure == 0.0


def test_constant_observable_has_measure_zero():
    est = ldt.empirical_base_ldt(FAIR, dyn.constant_observable(0.7), 20, 2000, 0, deviation=1e-6)
    assert est.measure == 0.0


@pytest.mark.parametrize("n", [50, 100, 200, 400, 800])
def test_base_probe_below_hoeffding_and_matches_binomial(n):
    eps = 0.1
    est = ldt.empirical_base_ldt(FAIR, FIRST, n, 20_000, n, deviation=eps)
    assert est.measure <= 2 * math.exp(-2 * n * eps ** 2)
    assert abs(est.measure - binomial_tail(n, 0.5, eps)) <= est.ci_radius


def test_base_probe_with_estimated_mean():
    xi = dyn.FunctionObservable(lambda s: s[:, 0].astype(float), bound=1.0)
    # 0.11 sits between lattice points k/50, so a slightly-off mean does not matter
    est = ldt.empirical_base_ldt(FAIR, xi, 50, 4000, 1, deviation=0.11)
    assert est.mean == pytest.approx(0.5, abs=0.01)
    assert abs(est.measure - binomial_tail(50, 0.5, 0.11)) <= est.ci_radius


def test_base_probe_monotone_in_deviation():
    vals = [ldt.empirical_base_ldt(FAIR, FIRST, 60, 5000, 9, deviation=e).measure
            for e in (0.02, 0.05, 0.1, 0.15, 0.2)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_base_probe_accepts_deviation_function():
    est = ldt.empirical_base_ldt(FAIR, FIRST, 64, 1000, 0, deviation=ldt.PowerDeviation(0.5))
    assert est.deviation == pytest.approx(0.125)


# --------------------------------------------------------------------------
# fiber probe


def test_constant_cocycle_has_no_fiber_deviation():
    A = cc.Constant(np.array([[2.0, 1.0], [0.0, 0.5]]))
    est = ldt.empirical_fiber_ldt(A, FAIR, 30, 2000, 0, deviation=1e-9)
    assert est.measure == 0.0


def test_scalar_fiber_probe_reduces_to_base_probe():
    system = dyn.BernoulliShift((0.3, 0.7))
    a = np.array([3.0, 0.5])
    A = cc.LocallyConstant(a.reshape(2, 1, 1))
    xi = dyn.FunctionObservable(lambda s: np.log(np.abs(a[s[:, 0]])), bound=2.0)
    mean = 0.3 * math.log(3) + 0.7 * math.log(0.5)
    for n in (10, 40):
        base = ldt.empirical_base_ldt(system, xi, n, 20_000, 7, 0.3, mean=mean)
        fiber = ldt.empirical_fiber_ldt(A, system, n, 20_000, 7, 0.3, lam=mean)
        assert fiber.measure == base.measure


def test_fiber_neg_inf_samples_are_violations():
    M = np.array([[[0.0, 1.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]])
    est = ldt.empirical_fiber_ldt(cc.LocallyConstant(M), FAIR, 3, 2000, 0, 0.1, lam=0.0)
    assert est.neg_inf > 0
    assert est.measure >= est.neg_inf / 2000


def test_fiber_decay_rate_is_positive():
    A = fluctuating_cocycle()
    ests = [ldt.empirical_fiber_ldt(A, FAIR, n, 10_000, 3, 0.05) for n in (10, 20, 40, 80)]
    fit = ldt.fit_mesf(ests)
    assert fit.c > 0 and not fit.corrected


# --------------------------------------------------------------------------
# fitting


def test_fit_exact_exponential():
    fit = ldt.fit_mesf([(n, math.exp(-0.3 * n)) for n in (5, 10, 20, 40, 80)])
    assert fit.c == pytest.approx(0.3, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_constant_data():
    assert ldt.fit_mesf([(n, 0.2) for n in (5, 10, 20, 40)]).c == pytest.approx(0.0, abs=1e-12)


def test_fit_needs_four_points():
    with pytest.raises(InvalidInputError):
        ldt.fit_mesf([(1, 0.5), (2, 0.25), (3, 0.125)])


def test_fit_continuity_correction():
    fit = ldt.fit_mesf([(10, 0.1), (20, 0.01), (40, 1e-3), (80, 0.0)], samples=1000)
    assert fit.corrected == (3,)
    with pytest.raises(InvalidInputError):
        ldt.fit_mesf([(10, 0.1), (20, 0.01), (40, 1e-3), (80, 0.0)])


def test_fit_of_bernoulli_tails_recovers_hoeffding_rate():
    ests = [ldt.empirical_base_ldt(FAIR, FIRST, n, 100_000, n, deviation=0.1) for n in (50, 100, 200, 400)]
    fit = ldt.fit_mesf(ests)
    assert abs(fit.c - 0.02) <= 0.3 * 0.02
