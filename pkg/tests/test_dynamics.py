import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cocyclab import dynamics as dyn
from cocyclab.errors import InvalidInputError


def test_degenerate_bernoulli_is_constant_stream():
    x = dyn.sample_phase(dyn.BernoulliShift((1.0, 0.0)), 123)
    assert x.symbols(500).tolist() == [0] * 500


def test_torus_phase_in_unit_cube():
    for seed in range(20):
        x = dyn.sample_phase(dyn.TorusTranslation((0.3,)), seed)
        assert 0.0 <= x.point[0] < 1.0


def test_first_symbol_frequency_matches_binomial_bound():
    system = dyn.BernoulliShift((0.3, 0.7))
    n = 100_000
    first = next(system.orbit(np.random.default_rng(4), n))
    freq = np.mean(first == 0)
    assert abs(freq - 0.3) <= 3 * np.sqrt(0.21 / n)


def test_sample_phase_is_deterministic():
    system = dyn.BernoulliShift((0.5, 0.25, 0.25))
    a = dyn.sample_phase(system, 99).symbols(1000)
    b = dyn.sample_phase(system, 99).symbols(1000)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("p", [(0.5, 0.6), (-0.1, 1.1), (np.nan, 1.0), ()])
def test_bad_probability_vectors(p):
    with pytest.raises(InvalidInputError):
        dyn.BernoulliShift(p)


def test_bad_frequencies():
    with pytest.raises(InvalidInputError):
        dyn.TorusTranslation((1.0,))
    with pytest.raises(InvalidInputError):
        dyn.TorusTranslation((-0.1, 0.2))


# --------------------------------------------------------------------------
# advance


def test_advance_torus_one_step():
    system = dyn.TorusTranslation((0.5,))
    x = dyn.TorusPhase((0.75,), system)
    assert dyn.advance(system, x, 1).point == pytest.approx((0.25,))


def test_advance_torus_two_steps_two_dims():
    system = dyn.TorusTranslation((0.3, 0.4))
    x = dyn.TorusPhase((0.9, 0.9), system)
    np.testing.assert_allclose(dyn.advance(system, x, 2).point, (0.5, 0.7), atol=1e-15)


def test_advance_zero_is_identity():
    torus = dyn.TorusTranslation((0.37,))
    x = dyn.sample_phase(torus, 1)
    assert dyn.advance(torus, x, 0) == x
    shift = dyn.BernoulliShift((0.5, 0.5))
    y = dyn.sample_phase(shift, 1)
    assert dyn.advance(shift, y, 0).symbols(50).tolist() == y.symbols(50).tolist()


def test_negative_steps_rejected():
    system = dyn.BernoulliShift((0.5, 0.5))
    with pytest.raises(InvalidInputError):
        dyn.advance(system, dyn.sample_phase(system, 0), -1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 600), st.integers(0, 600))
def test_advance_shifts_symbols(seed, steps, j):
    system = dyn.MarkovShift(((0.9, 0.1), (0.4, 0.6)))
    x = dyn.sample_phase(system, seed)
    assert dyn.advance(system, x, steps).symbol(j) == x.symbol(j + steps)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.lists(st.integers(0, 2000), min_size=2, max_size=20))
def test_lazy_extension_is_stable(seed, positions):
    system = dyn.BernoulliShift((0.2, 0.3, 0.5))
    x = dyn.sample_phase(system, seed)
    first = [x.symbol(j) for j in positions]
    y = dyn.advance(system, x, 17)
    _ = y.symbol(max(positions))
    assert [x.symbol(j) for j in positions] == first


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.999999), st.floats(0, 0.999999), st.integers(0, 10**6))
def test_torus_coordinates_stay_in_range(alpha, x0, steps):
    system = dyn.TorusTranslation((alpha,))
    y = dyn.advance(system, dyn.TorusPhase((x0,), system), steps)
    assert 0.0 <= y.point[0] < 1.0


# --------------------------------------------------------------------------
# Birkhoff averages


def test_constant_observable_average_is_one():
    system = dyn.BernoulliShift((0.3, 0.7))
    xi = dyn.constant_observable(1.0)
    for n in (1, 7, 100):
        assert dyn.birkhoff_average(system, xi, dyn.sample_phase(system, n), n) == 1.0


def test_torus_half_interval_average():
    system = dyn.TorusTranslation((0.5,))
    xi = dyn.BoxIndicator((0.0,), (0.5,))
    x = dyn.TorusPhase((0.1,), system)
    assert dyn.birkhoff_average(system, xi, x, 2) == 0.5


def test_cylinder_average_matches_clt_bound():
    system = dyn.BernoulliShift((0.3, 0.7))
    xi = dyn.CylinderIndicator((0,))
    n, phases = 10_000, 100
    vals = [dyn.birkhoff_average(system, xi, dyn.sample_phase(system, s), n) for s in range(phases)]
    sigma = np.sqrt(0.21 / (n * phases))
    assert abs(np.mean(vals) - 0.3) <= 3 * sigma


def test_birkhoff_batch_agrees_with_its_own_orbit():
    system = dyn.BernoulliShift((0.5, 0.5))
    xi = dyn.CylinderIndicator((0, 1))
    a = dyn.birkhoff_batch(system, xi, 50, np.random.default_rng(3), 200)
    b = dyn.birkhoff_batch(system, xi, 50, np.random.default_rng(3), 200)
    np.testing.assert_array_equal(a, b)
    assert abs(a.mean() - 0.25) < 0.05


def test_birkhoff_requires_positive_n():
    system = dyn.TorusTranslation((0.1,))
    with pytest.raises(InvalidInputError):
        dyn.birkhoff_average(system, dyn.constant_observable(), dyn.sample_phase(system, 0), 0)


def test_function_observable_bound_enforced():
    system = dyn.TorusTranslation((0.1,))
    xi = dyn.FunctionObservable(lambda p: 2 * p[:, 0], bound=1.0)
    x = dyn.TorusPhase((0.9,), system)
    with pytest.raises(InvalidInputError):
        dyn.observe(system, xi, x)


# --------------------------------------------------------------------------
# Markov shifts


def test_stationary_vector():
    P = np.array([[0.9, 0.1], [0.4, 0.6]])
    system = dyn.MarkovShift(P)
    pi = np.asarray(system.pi)
    np.testing.assert_allclose(pi @ P, pi, atol=1e-10)
    np.testing.assert_allclose(pi, [0.8, 0.2], atol=1e-12)


def test_markov_transition_frequencies_converge():
    P = np.array([[0.5, 0.3, 0.2], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]])
    system = dyn.MarkovShift(P)
    n = 100_000
    x = dyn.sample_phase(system, 2024).symbols(n + 1)
    counts = np.zeros((3, 3))
    np.add.at(counts, (x[:-1], x[1:]), 1)
    est = counts / counts.sum(axis=1, keepdims=True)
    assert np.max(np.abs(est - P)) < 5 / np.sqrt(n)


def test_markov_batch_orbit_transitions():
    P = np.array([[0.2, 0.8], [0.7, 0.3]])
    system = dyn.MarkovShift(P)
    orbit = system.orbit(np.random.default_rng(0), 100_000)
    a, b = next(orbit), next(orbit)
    for i in range(2):
        assert abs(np.mean(b[a == i] == 1) - P[i, 1]) < 5 / np.sqrt(100_000)


def test_markov_word_measure():
    P = np.array([[0.9, 0.1], [0.4, 0.6]])
    system = dyn.MarkovShift(P)
    assert system.word_measure([[0, 1, 1]])[0] == pytest.approx(0.8 * 0.1 * 0.6)


def test_reducible_chain_still_gets_a_stationary_vector():
    system = dyn.MarkovShift(((1.0, 0.0), (0.0, 1.0)))
    assert sum(system.pi) == pytest.approx(1.0)


def test_non_stochastic_rows_rejected():
    with pytest.raises(InvalidInputError):
        dyn.MarkovShift(((0.5, 0.4), (0.0, 1.0)))


def test_orbit_prefix_does_not_depend_on_length():
    system = dyn.BernoulliShift((0.5, 0.5))
    o1 = system.orbit(np.random.default_rng(5), 10)
    o2 = system.orbit(np.random.default_rng(5), 10)
    short = [next(o1) for _ in range(5)]
    long = [next(o2) for _ in range(50)]
    for a, b in zip(short, long):
        np.testing.assert_array_equal(a, b)
