import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cocyclab import linalg
from cocyclab.errors import InvalidInputError
from helpers import charpoly_singular_values, minor_matrix


def square(m):
    return arrays(np.float64, (m, m), elements=st.floats(-10, 10, allow_nan=False, width=64))


dims = st.integers(min_value=2, max_value=5)


@st.composite
def pair(draw):
    m = draw(dims)
    return draw(square(m)), draw(square(m))


# --------------------------------------------------------------------------
# singular values and norms


def test_singular_values_of_diagonal():
    np.testing.assert_allclose(linalg.singular_values(np.diag([3.0, 1.0])), [3.0, 1.0])


def test_singular_values_of_identity():
    np.testing.assert_allclose(linalg.singular_values(np.eye(4)), np.ones(4))


def test_singular_values_match_characteristic_polynomial():
    g = np.random.default_rng(7).normal(size=(3, 3))
    np.testing.assert_allclose(linalg.singular_values(g), charpoly_singular_values(g), rtol=1e-10)


def test_singular_values_match_extended_precision():
    g = np.random.default_rng(8).normal(size=(4, 4))
    with mpmath.workdps(40):
        ref = sorted((float(s) for s in mpmath.svd_r(mpmath.matrix(g.tolist()), compute_uv=False)),
                     reverse=True)
    np.testing.assert_allclose(linalg.singular_values(g), ref, rtol=1e-13)


def test_singular_values_are_sorted_and_multiply_to_det():
    g = np.random.default_rng(9).normal(size=(5, 5))
    s = linalg.singular_values(g)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    assert np.prod(s) == pytest.approx(abs(np.linalg.det(g)), rel=1e-12)


def test_op_norm_basic():
    assert linalg.op_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    assert linalg.op_norm(np.zeros((3, 3))) == 0.0


def test_op_norm_matches_unit_circle_sweep():
    g = np.random.default_rng(10).normal(size=(2, 2))
    t = np.linspace(0, np.pi, 200_001)
    v = np.stack([np.cos(t), np.sin(t)])
    sweep = np.max(np.linalg.norm(g @ v, axis=0))
    assert linalg.op_norm(g) == pytest.approx(sweep, rel=1e-9)


@pytest.mark.parametrize("bad", [np.array([[1.0, np.nan], [0, 1]]), np.array([[np.inf]]),
                                 np.ones((2, 3)), np.ones(3)])
def test_invalid_matrices_rejected(bad):
    with pytest.raises(InvalidInputError):
        linalg.singular_values(bad)
    with pytest.raises(InvalidInputError):
        linalg.op_norm(bad)


@settings(max_examples=200, deadline=None)
@given(pair())
def test_submultiplicativity(gh):
    g, h = gh
    lhs = linalg.op_norm(g @ h)
    rhs = linalg.op_norm(g) * linalg.op_norm(h)
    assert lhs <= rhs * (1 + 1e-10) + 1e-300


# --------------------------------------------------------------------------
# exterior powers


def test_top_exterior_power_is_determinant():
    g = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_allclose(linalg.exterior_power(g, 2), [[-2.0]])


def test_exterior_power_of_diagonal():
    a, b, c = 2.0, 3.0, 5.0
    np.testing.assert_allclose(linalg.exterior_power(np.diag([a, b, c]), 2), np.diag([a * b, a * c, b * c]))


def test_exterior_power_first_order_is_copy():
    g = np.random.default_rng(0).normal(size=(3, 3))
    w = linalg.exterior_power(g, 1)
    np.testing.assert_array_equal(w, g)
    assert w is not g


@pytest.mark.parametrize("m,k", [(3, 2), (4, 2), (4, 3), (5, 2), (5, 3)])
def test_exterior_power_entries_are_minors(m, k):
    g = np.random.default_rng(m * 10 + k).normal(size=(m, m))
    np.testing.assert_allclose(linalg.exterior_power(g, k), minor_matrix(g, k), rtol=1e-10, atol=1e-12)


def test_exterior_power_multiplicative_against_minor_oracle():
    rng = np.random.default_rng(11)
    g, h = rng.normal(size=(2, 4, 4))
    np.testing.assert_allclose(minor_matrix(g @ h, 2), minor_matrix(g, 2) @ minor_matrix(h, 2),
                               rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(linalg.exterior_power(g @ h, 2), minor_matrix(g @ h, 2), rtol=1e-9, atol=1e-12)


def test_exterior_power_stacks():
    g = np.random.default_rng(12).normal(size=(6, 3, 3))
    w = linalg.exterior_power(g, 2)
    assert w.shape == (6, 3, 3)
    for i in range(6):
        np.testing.assert_allclose(w[i], linalg.exterior_power(g[i], 2))


@pytest.mark.parametrize("k", [0, 4, -1, 1.5])
def test_exterior_power_order_out_of_range(k):
    with pytest.raises(InvalidInputError):
        linalg.exterior_power(np.eye(3), k)


def test_subsets_are_lexicographic():
    assert linalg.subsets(4, 2).tolist() == [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]
    assert linalg.exterior_dim(5, 2) == 10


@settings(max_examples=200, deadline=None)
@given(pair(), st.integers(1, 5))
def test_exterior_power_multiplicativity(gh, k):
    g, h = gh
    k = min(k, g.shape[0])
    lhs = linalg.exterior_power(g @ h, k)
    wg, wh = linalg.exterior_power(g, k), linalg.exterior_power(h, k)
    rhs = wg @ wh
    # cancellation error scales with the factors, not with the product
    scale = max(1.0, np.abs(wg).max() * np.abs(wh).max() * wg.shape[0])
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


@settings(max_examples=200, deadline=None)
@given(dims.flatmap(square))
def test_wedge_two_norm_is_product_of_top_singular_values(g):
    s = linalg.singular_values(g)
    w = linalg.op_norm(linalg.exterior_power(g, 2))
    assert w == pytest.approx(s[0] * s[1], rel=1e-9, abs=1e-12 * max(1.0, s[0]) ** 2)


# --------------------------------------------------------------------------
# gap ratio


def test_gap_ratio_diagonal_both_formulas():
    g = np.diag([3.0, 1.0])
    assert linalg.gap_ratio(g) == pytest.approx(3.0)
    assert linalg.op_norm(g) ** 2 / linalg.op_norm(linalg.exterior_power(g, 2)) == pytest.approx(3.0)


def test_gap_ratio_identity():
    assert linalg.gap_ratio(np.eye(3)) == pytest.approx(1.0)


def test_gap_ratio_rank_one_is_infinite():
    v = np.array([1.0, 2.0, -1.0])
    assert linalg.gap_ratio(np.outer(v, v)) == np.inf


def test_gap_ratio_needs_two_dimensions():
    with pytest.raises(InvalidInputError):
        linalg.gap_ratio(np.array([[2.0]]))


@settings(max_examples=200, deadline=None)
@given(dims.flatmap(square))
def test_gap_ratio_equals_norm_formula(g):
    s = linalg.singular_values(g)
    if s[1] <= 1e-12 * s[0] or s[1] < 1e-6:
        return
    wedge = linalg.op_norm(linalg.exterior_power(g, 2))
    assert linalg.gap_ratio(g) == pytest.approx(linalg.op_norm(g) ** 2 / wedge, rel=1e-9)


def test_log_norm_of_zero_is_minus_infinity():
    assert linalg.log_norm(np.zeros((2, 2))) == -np.inf
    assert linalg.log_norm(np.diag([np.e, 1.0])) == pytest.approx(1.0)
