import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from genhilbert import analytic as A
from genhilbert import measure as M
from genhilbert import operator as O

MEASURES = {
    "lebesgue": M.lebesgue(),
    "beta=2": M.PowerLogDensity(beta=2.0),
    "beta=3": M.PowerLogDensity(beta=3.0),
    "gamma=-2": M.PowerLogDensity(1.0, 1.0, -2.0),
    "atom": M.atoms((0.5, 1.0)),
}
INPUTS = {
    "1": A.constant(1.0),
    "z": A.monomial(1),
    "power(0.5,2)": A.test_function_power(0.5, 2.0),
    "power(0.9,2)": A.test_function_power(0.9, 2.0),
}


@pytest.fixture(scope="module")
def ops():
    return {k: O.HankelOperator(m) for k, m in MEASURES.items()}


# --- Hankel matrix and coefficient route ------------------------------------------------

def test_hilbert_matrix(ops):
    np.testing.assert_array_equal(O.hankel_matrix(ops["lebesgue"], 2), [[1, 0.5], [0.5, 1 / 3]])
    H = O.hankel_matrix(ops["lebesgue"], 8)
    i = np.arange(8)
    np.testing.assert_array_equal(H, 1.0 / (i[:, None] + i[None, :] + 1))


def test_zero_and_rank_one_matrices():
    assert not O.hankel_matrix(O.HankelOperator(M.zero(), 8), 5).any()
    t0, c = 0.7, 2.0
    H = O.hankel_matrix(O.HankelOperator(M.atoms((t0, c)), 8), 6)
    v = t0 ** np.arange(6)
    np.testing.assert_allclose(H, c * np.outer(v, v), rtol=1e-15)
    assert np.linalg.matrix_rank(H, tol=1e-12) == 1


def test_matrix_size_limit():
    with pytest.raises(ValueError):
        O.hankel_matrix(O.HankelOperator(M.lebesgue(), 4), 6)


@pytest.mark.parametrize("name", list(MEASURES))
def test_hankel_psd(ops, name):
    assert np.linalg.eigvalsh(O.hankel_matrix(ops[name], 64)).min() >= -1e-9


def test_apply_coeff_examples(ops):
    b = O.apply_coeff(ops["lebesgue"], A.constant(1.0))
    np.testing.assert_allclose(b.coeffs, 1.0 / np.arange(1, len(b.coeffs) + 1), rtol=1e-15)
    zero = O.apply_coeff(ops["beta=2"], A.polynomial([0.0]))
    assert not zero.coeffs.any()


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.floats(0.05, 0.95), st.floats(0.1, 4))
def test_rank_one_image(coeffs, t0, c):
    op = O.HankelOperator(M.atoms((t0, c)), 64)
    f = A.polynomial(coeffs)
    b = O.apply_coeff(op, f).coeffs
    want = c * f.series_eval(t0) * t0 ** np.arange(65)
    np.testing.assert_allclose(b, want, rtol=1e-12, atol=1e-14 * np.abs(want).max())


def test_apply_coeff_refuses_divergent_input(ops):
    with pytest.raises(O.OperatorUndefined, match="not defined"):
        O.apply_coeff(ops["lebesgue"], A.geometric())


def test_apply_coeff_certifies_slowly_decaying_input(ops):
    # 1/(1-z): tail ~ 1/N^2 ~ 6e-8 under beta=3, ~ 1/N^3 under beta=4
    with pytest.raises(O.OperatorUndefined):
        O.apply_coeff(ops["beta=3"], A.geometric())
    b = O.apply_coeff(O.HankelOperator(M.PowerLogDensity(beta=4.0)), A.geometric())
    assert np.max(b.err) < 1e-8


# --- integral route ----------------------------------------------------------

def test_apply_integral_examples():
    leb = M.lebesgue()
    assert O.apply_integral(leb, A.constant(1), 0.0).value == pytest.approx(1.0, rel=1e-14)
    assert O.apply_integral(leb, A.constant(1), 0.5).value == pytest.approx(2 * math.log(2), rel=1e-12)
    f = A.test_function_power(0.3, 2.0)
    z = 0.4 - 0.3j
    got = O.apply_integral(M.atoms((0.6, 2.0)), f, z).value
    assert got == pytest.approx(2.0 * f.eval(0.6) / (1 - 0.6 * z), rel=1e-14)


def test_apply_integral_matches_mpmath():
    mpmath.mp.dps = 25
    f = A.test_function_power(0.9, 2.0)
    z = 0.7 + 0.2j
    g = lambda t: (1 - 0.81) / (1 - 0.9 * t) ** 2 / (1 - t * z) * (1 - t) ** 1.5 * mpmath.log(mpmath.e / (1 - t)) ** -1
    want = complex(mpmath.quad(g, [0, 0.5, 0.9, 0.99, 1]))
    got = O.apply_integral(M.PowerLogDensity(1.0, 2.5, -1.0), f, z).value
    assert abs(got - want) < 1e-11


def test_integral_guard():
    with pytest.raises(O.OperatorUndefined):
        O.apply_integral(M.lebesgue(), A.geometric(), 0.3)
    with pytest.raises(O.OperatorUndefined):
        O.integral_guard(M.PowerLogDensity(beta=1.0), A.constant(1.0), alpha=2.0)
    O.integral_guard(M.PowerLogDensity(beta=2.0), A.constant(1.0), alpha=2.0)
    with pytest.raises(ValueError):
        O.apply_integral(M.lebesgue(), A.constant(1), 1.0)


def test_measure_rule_image_matches_adaptive():
    m = M.PowerLogDensity(1.0, 0.5, -2.0)
    f = A.test_function_power(0.99, 2.0)
    image = O.IntegralImage(m, f)
    z = np.array([0.0, 0.5, -0.9, 0.99 * np.exp(0.3j), 1 - 2.0**-30])
    want = O.apply_integral(m, f, z).value
    np.testing.assert_allclose(image.eval(z), want, rtol=1e-11)


# --- dual-route agreement and pairing -----------------------------------------

@pytest.mark.parametrize("mname", list(MEASURES))
@pytest.mark.parametrize("fname", list(INPUTS))
def test_route_agreement(ops, mname, fname):
    r = O.agreement_residual(ops[mname], INPUTS[fname])
    assert r.value < 1e-8 and r.ok


@pytest.mark.parametrize("mname", list(MEASURES))
@pytest.mark.parametrize("r", [0.5, 0.9, 0.99])
def test_pairing_identity(mname, r):
    g = np.arange(1, 10) * (1 - 0.3j) / 9
    for f in (A.constant(1.0), A.test_function_power(0.9, 2.0)):
        assert O.pairing_residual(MEASURES[mname], f, g, r).value < 1e-8


def test_pairing_examples():
    leb = M.lebesgue()
    assert O.pairing_residual(leb, A.constant(1), [1.0], 0.9).value < 1e-14
    # rhs int 0.5 t dt = 0.25
    rhs = M.integrate(leb, lambda t, s: 0.5 * t).value
    assert rhs == pytest.approx(0.25)
    assert O.pairing_residual(leb, A.constant(1), [0.0, 1.0], 0.5).value < 1e-14
    res = O.pairing_residual(M.PowerLogDensity(beta=3.0), A.test_function_power(0.9, 2), [1, 1], 0.9)
    assert res.value < 1e-8


# --- witnesses and brackets ------------------------------------------------------

def test_witness_examples():
    w = O.witness_lower_bound(M.atoms((0.5, 1.0)), "power", 0.1, 2.0)
    assert w.bound == 0.0 and 0 < w.value < np.inf
    w = O.witness_lower_bound(M.PowerLogDensity(beta=2.0), "power", 0.1, 2.0)
    assert w.bound == pytest.approx(1 / (2 * math.e * 1.9**2), rel=1e-12)
    assert w.value >= w.bound


def test_power_witness_matches_brute_force_bloch():
    m = M.PowerLogDensity(beta=2.0)
    f = A.test_function_power(0.9, 2.0)
    brute = A.bloch_seminorm(O.IntegralImage(m, f), 1.0, A.BlochGrid(30, 256, 32)).value
    w = O.witness_lower_bound(m, "power", 0.1, 2.0).value
    assert w == pytest.approx(brute, rel=1e-6)


def test_real_axis_is_extremal():
    m = M.PowerLogDensity(1.0, 1.5, -1.0)
    image = O.IntegralImage(m, A.test_function_power(0.95, 2.0))
    r = 1 - np.geomspace(0.5, 1e-6, 40)
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    z = r[:, None] * np.exp(1j * th[None, :])
    ratio = np.abs(image.deriv(z)) / image.deriv(r).real[:, None]
    assert ratio.max() <= 1 + 1e-12


@pytest.mark.parametrize("j", range(2, 11))
def test_power_witness_inequality(j):
    m = M.PowerLogDensity(beta=2.0)
    w = O.witness_lower_bound(m, "power", 2.0**-j, 2.0)
    lam = 1 - 2.0**-j
    assert w.value >= 1 / (2 * math.e * (1 + lam) ** 2) - 1e-6


def test_log_witness_vanishes_for_log_squared_density():
    ws = O.log_witnesses(M.PowerLogDensity(1.0, 1.0, -2.0), O.default_lambda_deltas("log"))
    v = np.array([w.value for w in ws])
    assert v[-8:].max() < 0.05 * v.max()
    assert all(w.value >= w.bound - 1e-6 for w in ws)


def test_essnorm_formula_examples():
    assert O.essnorm_formula(M.atoms((0.5, 3.0)), "power", 2.0).value == 0.0
    f = O.essnorm_formula(M.PowerLogDensity(beta=2.0), "power", 2.0)
    np.testing.assert_allclose(f.ratios, 0.5, rtol=1e-14)
    g = O.essnorm_formula(M.PowerLogDensity(1.0, 1.0, -2.0), "log")
    assert g.trend == "vanishing"
    with pytest.raises(O.HypothesisViolation):
        O.essnorm_formula(M.lebesgue(), "log")


def test_brackets():
    b = O.essnorm_bracket(M.PowerLogDensity(beta=2.0), "power", 2.0)
    assert b.formula_value == pytest.approx(0.5, rel=1e-14)
    assert 1 / (8 * math.e) <= b.lower_witness and 0.5 < b.ratio < 2
    assert not b.collapsed
    b3 = O.essnorm_bracket(M.PowerLogDensity(beta=3.0), "power", 2.0)
    assert b3.collapsed
    ba = O.essnorm_bracket(M.atoms((0.5, 1.0)), "power", 2.0)
    assert ba.collapsed and ba.formula_value == 0.0
    rec = b.to_record()
    assert set(rec) == {"mode", "alpha", "lower_witness", "formula_value", "ratio", "grid"}


def test_witness_independent_of_truncation():
    # witnesses come from the integral route; the coefficient route agrees
    m = M.PowerLogDensity(beta=2.0)
    f = A.test_function_power(0.75, 2.0)
    w = O.witness_lower_bound(m, "power", 0.25, 2.0).value
    vals = []
    for N in (256, 1024):
        img = O.apply_coeff(O.HankelOperator(m, N), A.test_function_power(0.75, 2.0, N))
        vals.append(A.bloch_seminorm(img, 1.0, A.BlochGrid(depth=6)).value)
    assert vals[0] <= vals[1] * (1 + 1e-12)
    assert vals[1] <= w * (1 + 1e-9)
