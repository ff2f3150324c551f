import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sps

from _oracles import e1_quad, i1_quad, i2_quad
from cdfsched.special import (
    exp_int_E1,
    integral_I1,
    integral_I1_seq,
    integral_I2,
    integral_I2_seq,
    mpfr_context,
    scaled_expn_seq,
)


@pytest.mark.parametrize("x", [1e-8, 1e-3, 0.3, 1.0, 1.0001, 2.5, 10.0, 50.0, 300.0])
def test_e1_against_mpmath(x):
    np.testing.assert_allclose(exp_int_E1(x), float(mpmath.e1(x)), rtol=1e-14)


def test_e1_against_quadrature_and_scipy():
    for x in [0.05, 0.7, 3.0, 20.0]:
        np.testing.assert_allclose(exp_int_E1(x), e1_quad(x), rtol=1e-12)
        np.testing.assert_allclose(exp_int_E1(x), sps.exp1(x), rtol=1e-14)


def test_e1_rejects_nonpositive():
    with pytest.raises(ValueError):
        exp_int_E1(0.0)


def test_scaled_expn_matches_scipy():
    for z in [0.2, 1.0, 3.7, 25.0, 140.0]:
        s = scaled_expn_seq(z, 30)
        ref = [math.exp(z) * sps.expn(n, z) for n in range(1, 31)]
        np.testing.assert_allclose(s, ref, rtol=1e-13)


def test_i2_gamma_one_is_shifted_e1():
    a, b = 0.7, 2.3
    np.testing.assert_allclose(integral_I2(a, b, 1), math.exp(a * b) * sps.exp1(a * b), rtol=1e-14)


def test_i1_at_beta_one_equals_i2_next_order():
    # 1/((1+x)(1+x)^g) = 1/(1+x)^(g+1)
    for g in (1, 3, 9):
        np.testing.assert_allclose(integral_I1(1.3, 1.0, g), integral_I2(1.3, 1.0, g + 1), rtol=1e-13)


def test_sequences_agree_with_single_orders():
    a, b = 2.0, 0.4
    s1 = integral_I1_seq(a, b, 12)
    s2 = integral_I2_seq(a, b, 12)
    for g in (1, 5, 12):
        assert s1[g - 1] == integral_I1(a, b, g)
        assert s2[g - 1] == integral_I2(a, b, g)


def test_mpfr_context_agrees_with_float():
    with mpfr_context(200) as ctx:
        v = integral_I1(ctx.mpf(0.3), ctx.mpf(7.5), 15, ctx)
    np.testing.assert_allclose(float(v), integral_I1(0.3, 7.5, 15), rtol=1e-12)
    np.testing.assert_allclose(float(v), i1_quad(0.3, 7.5, 15), rtol=1e-11)


def test_bad_arguments():
    with pytest.raises(ValueError):
        integral_I2(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        integral_I1(1.0, 1.0, 0)
    with pytest.raises(ValueError):
        integral_I1(1.0, 1.0, 1.5)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.01, 20.0),
    st.floats(0.05, 50.0),
    st.integers(1, 40),
)
def test_i1_i2_property_against_quadrature(alpha, beta, gamma):
    np.testing.assert_allclose(integral_I2(alpha, beta, gamma), i2_quad(alpha, beta, gamma), rtol=1e-9)
    np.testing.assert_allclose(integral_I1(alpha, beta, gamma), i1_quad(alpha, beta, gamma), rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 20.0), st.floats(0.05, 50.0), st.integers(2, 30))
def test_i1_recurrence_identity(alpha, beta, gamma):
    # (beta - 1) I1(g) = I1(g-1) - I2(g)
    lhs = (beta - 1.0) * integral_I1(alpha, beta, gamma)
    rhs = integral_I1(alpha, beta, gamma - 1) - integral_I2(alpha, beta, gamma)
    scale = max(abs(integral_I1(alpha, beta, gamma - 1)), abs(integral_I2(alpha, beta, gamma)))
    assert abs(lhs - rhs) <= 1e-12 * scale
