import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from genhilbert import analytic as A

disk = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                 st.floats(0, 0.999), st.floats(0, 2 * math.pi))


# --- evaluation ----------------------------------------------------------------

def test_eval_examples():
    assert A.constant(1).eval(0.5) == 1
    leb_image = A.PowerSeries(1.0 / np.arange(1, 4098), A.Growth(1.0, 1.0))
    assert leb_image.eval(0.5) == pytest.approx(-math.log(0.5) / 0.5, rel=1e-14)
    f = A.test_function_power(0.0, 2.0)
    np.testing.assert_allclose(f.eval(np.array([0, 0.5, 0.9j])), 1.0)


def test_eval_rejects_boundary_and_uncertifiable():
    with pytest.raises(ValueError):
        A.constant(1).eval(1.0)
    short = A.PowerSeries(np.ones(20), A.Growth(1.0, 1.0))
    with pytest.raises(A.TruncationError):
        short.eval(0.9)


@pytest.mark.parametrize("f", [
    A.test_function_power(0.7, 2.5), A.test_function_power(0.95, 1.5),
    A.test_function_log(0.6), A.geometric(), A.log_kernel(),
], ids=lambda f: f.closed_form.name)
def test_series_matches_closed_form(f):
    z = 0.9 * np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    bound = f.remainder_bound(0.9)
    scale = np.max(np.abs(f.eval(z)))
    assert np.max(np.abs(f.series_eval(z) - f.eval(z))) <= bound + 1e-13 * scale


def test_power_family_coefficients():
    lam = 0.8
    f = A.test_function_power(lam, 2.0, 50)
    k = np.arange(51)
    np.testing.assert_allclose(f.coeffs, (1 - lam**2) * (k + 1) * lam**k, rtol=1e-13)
    g = A.test_function_power(0.6, 2.7, 40)
    want = [(1 - 0.36) * float(mpmath.binomial(n + 1.7, n)) * 0.6**n for n in range(41)]
    np.testing.assert_allclose(g.coeffs, want, rtol=1e-12)
    assert f.eval(lam) == pytest.approx((1 - lam**2) ** (1 - 2.0), rel=1e-14)


@pytest.mark.parametrize("lam,alpha", [(0.5, 1.5), (0.9, 2.0), (0.99, 3.0), (0.9, 0.5)])
def test_growth_tag_is_a_certificate(lam, alpha):
    f = A.test_function_power(lam, alpha)
    g = f.growth
    k = np.arange(1, f.degree + 1, dtype=float)
    env = g.C * k ** (g.alpha - 1) * g.rate**k
    assert np.all(np.abs(f.coeffs[1:]) <= env * (1 + 1e-12))


def test_log_family_coefficients_oracle():
    lam = 0.7
    f = A.test_function_log(lam, 200)
    beta = 1 / math.log(math.e / (1 - lam**2))
    # (1 + L)^2 with L = -log(1 - w): coefficient 2 (1 + H_{k-1}) / k
    k = np.arange(1, 201)
    H_prev = np.r_[0.0, np.cumsum(1.0 / k[:-1])]
    np.testing.assert_allclose(f.coeffs[1:], beta * 2 * (1 + H_prev) / k * lam**k, rtol=1e-12)
    assert f.coeffs[0] == pytest.approx(beta)
    assert f.eval(lam) == pytest.approx(math.log(math.e / (1 - lam**2)), rel=1e-14)
    assert f.eval(0) == pytest.approx(beta)


@pytest.mark.parametrize("bad", [lambda: A.test_function_power(1.0, 2), lambda: A.test_function_log(0.0),
                                 lambda: A.test_function_log(1.0), lambda: A.test_function_power(0.5, 0)])
def test_family_parameter_validation(bad):
    with pytest.raises(ValueError):
        bad()


def test_delta_parametrisation_beyond_double_precision():
    d = 2.0**-80
    f = A.test_function_power(None, 2.0, delta=d)
    x = 1 - 2.0**-30
    want = d * (2 - d) / (2.0**-30 + d * x) ** 2
    assert f.eval(x) == pytest.approx(want, rel=1e-14)


# --- Mobius ------------------------------------------------------------------------

def test_mobius_examples():
    assert A.mobius(0.5, 0.5) == 0
    assert A.mobius(0, 0.3 + 0.2j) == -(0.3 + 0.2j)
    assert A.mobius(0.5, 0) == 0.5


@given(disk, disk)
def test_mobius_involution(a, z):
    # conditioning of phi_a grows like 1/(1-|a|)^2 near the boundary
    tol = 1e-14 * max(1.0, 4.0 / (1 - abs(a)) ** 2)
    assert abs(A.mobius(a, A.mobius(a, z)) - z) < tol


@given(st.floats(0, 0.9), st.floats(0, 2 * math.pi), disk)
def test_mobius_involution_interior(r, t, z):
    a = r * complex(math.cos(t), math.sin(t))
    assert abs(A.mobius(a, A.mobius(a, z)) - z) < 1e-14


# --- norms ---------------------------------------------------------------------------

def test_bloch_examples():
    est = A.bloch_seminorm(A.monomial(1), 1.0)
    assert est.value == 1.0 and est.argmax == 0 and est.converged
    est = A.bloch_seminorm(A.log_kernel(), 1.0)
    assert est.value == pytest.approx(2.0, abs=1e-8) and est.value <= 2.0


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_power_family_uniformly_bounded_in_bloch_alpha(alpha):
    vals = [A.bloch_seminorm(A.test_function_power(l, alpha), alpha).value
            for l in (0.9, 0.99, 0.999)]
    # exact sup is alpha lam (1-lam^2)/(1-lam^2)^... <= a constant depending on alpha only
    assert max(vals) <= 2 ** (alpha + 1) * alpha
    assert max(vals) / min(vals) < 1.5


def test_log_family_uniformly_bounded_in_bloch():
    vals = [A.bloch_seminorm(A.test_function_log(l), 1.0).value for l in (0.9, 0.99, 0.999)]
    assert max(vals) < 4.0


def test_bloch_refinement_monotone():
    f = A.test_function_power(0.97, 2.0)
    g = A.BlochGrid()
    assert A.bloch_seminorm(f, 2.0, g.refine()).value >= A.bloch_seminorm(f, 2.0, g).value
    assert A.bloch_seminorm(f, 2.0, g).value >= A.bloch_seminorm(f, 2.0, g.coarsen()).value


def test_h2_examples():
    assert A.h2_norm(A.polynomial([1, 1])).value == pytest.approx(math.sqrt(2), rel=1e-15)
    assert A.h2_norm(A.polynomial([0.0])).value == 0
    f = A.PowerSeries(np.r_[0.0, 1.0 / np.arange(1, 1025)])
    want = math.sqrt(sum(1.0 / k**2 for k in range(1, 1025)))
    assert A.h2_norm(f).value == pytest.approx(want, rel=1e-14)


def test_h2_sampled_matches_coefficients():
    f = A.test_function_power(0.6, 2.0)
    assert A.h2_norm(f, "sample").value == pytest.approx(A.h2_norm(f).value, rel=1e-3)


def test_bmoa_examples():
    assert A.bmoa_norm(A.constant(2.5)).value == 2.5
    assert A.bmoa_norm(A.constant(-1.5 + 2j)).value == abs(-1.5 + 2j)
    assert A.bmoa_norm(A.monomial(1)).value == pytest.approx(1.0, abs=1e-3)


def test_bmoa_log_family_bounded():
    vals = [A.bmoa_norm(A.test_function_log(l), samples=4096).value for l in (0.9, 0.99)]
    assert max(vals) < 4.0


# --- coefficient tests ------------------------------------------------------------

def test_coeff_bloch_examples():
    n = np.arange(4097)
    r = A.coeff_bloch_test(1.0 / (n + 1))
    assert r.bounded and r.sup < 1
    assert not A.coeff_bloch_test(1.0 / np.sqrt(n + 1)).bounded
    with pytest.raises(ValueError):
        A.coeff_bloch_test(np.array([1.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        A.coeff_bloch_test(np.array([1.0, -1.0, -2.0]))


def test_block_seminorm_examples():
    assert A.dyadic_block_seminorm(A.geometric(), 2.0).value == pytest.approx(0.5, abs=1e-12)
    assert A.dyadic_block_seminorm(np.zeros(100), 2.0).value == 0
    k = np.arange(4097.0)
    assert not A.dyadic_block_seminorm(np.maximum(k, 1) ** 1.0, 2.0).bounded


def test_multiplier_examples():
    k = np.arange(1, 8193, dtype=float)
    lam = np.r_[0.0, (1 / k**2) * k]
    assert A.multiplier_l2inf_to_l1_check(lam).finite
    assert A.multiplier_l2inf_to_l1_check(np.r_[0.0, 1 / k]).finite
    assert not A.multiplier_l2inf_to_l1_check(np.r_[0.0, 1 / np.sqrt(k)]).finite


@given(st.floats(0.3, 0.995), st.sampled_from([1.5, 2.0, 3.0]))
def test_block_lemma_with_explicit_constant(lam, alpha):
    # the Cauchy estimate at r = 1 - 2^-n gives the universal constant 16
    f = A.test_function_power(lam, alpha)
    assert A.dyadic_block_seminorm(f, alpha).value <= 16 * A.bloch_seminorm(f, alpha).value


def test_growth_envelope_examples():
    assert A.growth_envelope_check(A.constant(1), 0.5) == (1.0, True)
    g = A.growth_envelope_check(A.geometric(), 2.0)
    assert g.passed and g.C <= 2.0
    vals = [A.growth_envelope_check(A.test_function_power(l, 2.0), 2.0).C for l in (0.9, 0.99)]
    assert max(vals) <= 4.0


def test_csv_round_trip(tmp_path):
    f = A.polynomial([1.0, 2 - 1j, 0.1])
    p = tmp_path / "f.csv"
    A.dump_csv(f, p)
    assert p.read_text().splitlines()[0] == "index,re,im"
    np.testing.assert_array_equal(A.load_csv(p).coeffs, f.coeffs)


def test_block_convention_skips_first_coefficient():
    assert A.dyadic_block_seminorm(A.monomial(1), 2.0).value == 0.0
    assert A.dyadic_block_seminorm(A.monomial(2), 2.0).value > 0.0
