"""The generalized Hilbert operator of a measure on [0, 1).

Two routes are implemented and kept independent:

* coefficient route: ``b_n = sum_k mu_{n+k} a_k`` from a cached moment table
  (a Hankel matrix-vector product), with a certified truncation tail;
* integral route: ``I(f)(z) = int f(t) / (1 - t z) dmu(t)`` by quadrature.

Witnesses for essential-norm lower bounds are evaluated on the positive real
axis.  For ``f >= 0`` on [0, 1) every Taylor coefficient of ``I(f)'`` is
nonnegative, so ``|I(f)'(z)| <= I(f)'(|z|)`` and the Bloch-type supremum is
attained along the real axis.  Points are parametrized by ``delta = 1 - lam``
and ``eps = 1 - x`` so that grids can approach 1 far past double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import measure as M
from .analytic import DEFAULT_N, Growth, PowerSeries, log2_scale
from .verdicts import TRAILING_WINDOW, dyadic_deltas, judge, log_inv

COEFF_TAIL_TOL = 1e-8
INTEGRAL_RTOL = 1e-11
PAIRING_SAMPLES = 4096
POWER_LAMBDA_DEPTH = 40
LOG_LAMBDA_DEPTH = 256


class CertificationError(RuntimeError):
    """A numerical bound needed for a certified answer could not be met."""


class OperatorUndefined(CertificationError):
    """The operator is not defined on the input at this truncation."""


class HypothesisViolation(ValueError):
    """A theorem's hypothesis fails, so the quantity it defines is meaningless."""


# --------------------------------------------------------------------------
# operator and coefficient route
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HankelOperator:
    measure: object
    trunc: int = DEFAULT_N
    moments: M.MomentTable = field(init=False)

    def __post_init__(self):
        if self.trunc < 0:
            raise ValueError("truncation degree must be >= 0")
        object.__setattr__(self, "moments", M.moment_table(self.measure, 2 * self.trunc))


def _measure_of(x):
    return x.measure if isinstance(x, HankelOperator) else x


def hankel_matrix(op: HankelOperator, size: int) -> np.ndarray:
    return op.moments.hankel(size)


def _moment_tail(op: HankelOperator, f: PowerSeries, n0: int) -> float:
    """Bound on ``sum_{k>n0} mu_{n+k} |a_k|`` uniform in ``n >= 0``."""
    g = f.growth
    if g is None or g.C == 0.0:
        return 0.0
    mu = op.moments.values
    N2 = len(mu) - 1
    first = mu[min(n0 + 1, N2)]
    if first == 0.0:
        return 0.0
    # moments are nonincreasing, so mu_{n+k} <= mu_{n0+1} for k > n0
    best = first * g.tail_bound(n0, 1.0)
    # power-law envelope mu_k <= A k^-p fitted on the upper half of the table
    lo = max(n0, N2 // 2, 1)
    ks = np.arange(lo, N2 + 1, dtype=float)
    seg = mu[lo:]
    if g.rate >= 1.0 and np.all(seg > 0) and len(seg) > 1:
        p = math.log(seg[0] / seg[-1]) / math.log(ks[-1] / ks[0])
        A = float(np.max(seg * ks ** p))
        q = p - g.alpha + 1.0
        if q > 1.0:
            start = max(n0, 1)
            best = min(best, A * g.C * start ** (1.0 - q) / (q - 1.0))
    return best


def apply_coeff(op: HankelOperator, f: PowerSeries, tol: float = COEFF_TAIL_TOL) -> PowerSeries:
    """Coefficients ``b_0..b_N`` of the image, with per-coefficient error bounds."""
    N = op.trunc
    a = np.asarray(f.coeffs)
    if len(a) > N + 1:
        if f.growth is None and np.any(a[N + 1:] != 0):
            raise ValueError("polynomial degree exceeds operator truncation")
        a = a[: N + 1]
    n0 = len(a) - 1
    tail = _moment_tail(op, f, n0)
    if not tail <= tol:
        raise OperatorUndefined(
            f"operator not defined on input at this truncation "
            f"(tail bound {tail:.3e} > {tol:g})"
        )
    mu = op.moments.values
    full = np.convolve(mu, a[::-1])
    b = full[n0: n0 + N + 1]
    absum = np.convolve(mu, np.abs(a)[::-1])[n0: n0 + N + 1]
    err = tail + 4e-16 * (n0 + 1) * absum + op.moments.err[: N + 1] * np.sum(np.abs(a))
    B0 = float(absum[0] + tail)
    return PowerSeries(b, Growth(1.0, B0, 1.0), err=err)


# --------------------------------------------------------------------------
# integral route
# --------------------------------------------------------------------------

def integral_guard(m, f: PowerSeries, alpha: float | None = None) -> None:
    """Check that ``f``'s growth class keeps the kernel integral finite.

    A series of bounded coefficients-times-rate (``rate < 1``) or a
    polynomial is bounded on [0, 1), so only finiteness of ``mu`` matters.
    Otherwise ``alpha`` defaults to ``growth.alpha + 1`` (the Bloch-type
    class of ``sum k^(alpha-1) z^k``) and the test is integrability of
    ``(1-t)^(1-alpha)``, or of ``log(e/(1-t))`` when ``alpha == 1``.
    """
    if alpha is None:
        g = f.growth
        if f.closed_form is None and (g is None or g.rate < 1.0):
            return
        if f.closed_form is not None and g is not None and g.rate < 1.0:
            return
        if f.closed_form is not None and f.closed_form.name == "constant":
            return
        alpha = (g.alpha if g is not None else 1.0) + 1.0
    try:
        if alpha > 1:
            M.transform_weight(m, 1.0 - alpha, 0.0)
        elif alpha == 1:
            M.transform_weight(m, 0.0, 1.0)
    except ValueError as exc:
        raise OperatorUndefined(f"kernel integral diverges for alpha={alpha:g}: {exc}") from exc


def _one_minus_tz(t, s, z):
    """``1 - t z`` as ``s + t (1 - z)``, exact near ``t = z = 1``."""
    return s + t * (1.0 - z)


def apply_integral(op, f: PowerSeries, z, *, alpha: float | None = None,
                   rtol: float = INTEGRAL_RTOL) -> M.QuadResult:
    """``int f(t) / (1 - t z) dmu(t)`` for a scalar or array of ``z``."""
    m = _measure_of(op)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise ValueError("evaluation point outside the open unit disk")
    integral_guard(m, f, alpha)
    zz = z.ravel()
    real = bool(np.all(zz.imag == 0)) and np.isrealobj(f.coeffs)

    def g(t, s):
        k = _one_minus_tz(t[:, None], s[:, None], zz[None, :].real if real else zz[None, :])
        return np.asarray(f.on_interval(t, s))[:, None] / k

    breaks = [-math.log(d) for d in np.unique(np.abs(1 - zz)) if 0 < d < 0.5]
    res = M.integrate(m, g, rtol=rtol, breaks=breaks[:64])
    value = np.asarray(res.value).reshape(z.shape)
    error = np.asarray(res.error).reshape(z.shape)
    return M.QuadResult(value[()], error[()])


@dataclass(frozen=True, eq=False)
class MeasureRule:
    """Fixed discretization ``sum_i w_i g(t_i)`` of ``int g dmu``.

    Densities get unit panels in ``u = -log(1-t)`` with a 24-point
    Gauss-Legendre rule per panel; every integrand used here (Cauchy-type
    kernels, the test families) has its complex singularities at distance
    at least ``pi/2`` from the real ``u`` axis, so this is accurate to
    rounding.  ``u`` stops once the remaining mass is negligible.
    """

    t: np.ndarray
    s: np.ndarray
    w: np.ndarray


def measure_rule(m, u_min_reach: float, weight_bound: float = 1.0,
                 tol: float = 1e-15, order: int = 24) -> MeasureRule:
    """Rule reaching at least ``u_min_reach``, with tail mass times
    ``weight_bound`` below ``tol`` times the total mass."""
    ts, ss, ws = [], [], []
    x, wx = leggauss(order)
    total = max(M.total_mass(m), 1e-300)
    for part in M._parts(m):
        if isinstance(part, M.AtomList):
            ts.append(part.t)
            ss.append(1.0 - part.t)
            ws.append(part.c)
            continue
        if part.scale == 0.0:
            continue
        U = max(math.ceil(u_min_reach) + 4, 8)
        while U < part.u_max:
            if M.tail_mass_delta(part, math.exp(-U)).value * weight_bound <= tol * total:
                break
            U *= 2
        U = min(U, part.u_max)
        edges = np.arange(0.0, U, 1.0)
        edges = np.append(edges, U) if edges[-1] < U else edges
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        u = ((lo + hi)[:, None] * 0.5 + half[:, None] * x[None, :]).ravel()
        wu = (half[:, None] * wx[None, :]).ravel()
        s = np.exp(-u)
        ts.append(-np.expm1(-u))
        ss.append(s)
        ws.append(wu * part.scale * np.exp(-part.beta * u) * (1.0 + u) ** part.gamma)
    if not ts:
        return MeasureRule(np.zeros(0), np.zeros(0), np.zeros(0))
    return MeasureRule(np.concatenate(ts), np.concatenate(ss), np.concatenate(ws))


def _sup_on_interval(f: PowerSeries) -> float:
    cf = f.closed_form
    if cf is not None:
        if cf.name == "constant":
            return abs(cf.params[0])
        if cf.name in ("power_family", "log2_family"):
            return float(abs(cf.on_interval(np.array([1.0]), np.array([0.0]))[0]))
        raise ValueError(f"{cf.name} is unbounded on [0, 1)")
    if f.growth is not None and f.growth.rate >= 1.0:
        raise ValueError("series is not known to be bounded on [0, 1)")
    return float(np.sum(np.abs(f.coeffs))) + (f.remainder_bound(1.0) if f.growth else 0.0)


@dataclass(frozen=True, eq=False)
class IntegralImage:
    """``I(f)`` evaluated through a fixed measure rule (bulk evaluation).

    ``depth`` bounds how close to 1 evaluation points may come:
    ``|1 - z| >= 2^-depth``.
    """

    measure: object
    f: PowerSeries
    depth: int = 40
    order: int = 24

    @cached_property
    def rule(self) -> MeasureRule:
        F = _sup_on_interval(self.f)
        return measure_rule(self.measure, self.depth * math.log(2),
                            weight_bound=F * 2.0 ** self.depth, order=self.order)

    @cached_property
    def _fw(self):
        r = self.rule
        return np.asarray(self.f.on_interval(r.t, r.s)) * r.w

    @property
    def nonneg_on_interval(self) -> bool:
        return self.f.nonneg_on_interval

    real_extremal = True

    def _sum(self, z, power):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= 1):
            raise ValueError("evaluation point outside the open unit disk")
        if z.size and np.min(np.abs(1 - z)) < 2.0 ** -self.depth * 0.999:
            raise ValueError("evaluation point closer to 1 than the rule supports")
        r = self.rule
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        fw = self._fw * (r.t if power == 2 else 1.0)
        step = max(1, 2 ** 22 // max(len(r.t), 1))
        for i in range(0, len(flat), step):
            zc = flat[i: i + step]
            k = r.s[None, :] + r.t[None, :] * (1.0 - zc[:, None])
            out[i: i + step] = (fw[None, :] / k ** power).sum(axis=1)
        return out.reshape(z.shape)[()]

    def eval(self, z):
        return self._sum(z, 1)

    def deriv(self, z):
        return self._sum(z, 2)


class Residual(NamedTuple):
    value: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.value <= self.bound


def default_z_grid() -> np.ndarray:
    ring = [r * np.exp(1j * np.pi * k / 4) for r in (0.5, 0.9) for k in range(8)]
    return np.array([0, 0.3, -0.3, 0.3j, *ring], dtype=complex)


def agreement_residual(op: HankelOperator, f: PowerSeries, z_grid=None,
                       floor: float = 1e-8) -> Residual:
    """Max discrepancy between the two routes on ``z_grid`` (default ``|z| <= 0.9``).

    ``bound`` is the larger of the combined certified error and ``floor``.
    """
    z = default_z_grid() if z_grid is None else np.asarray(z_grid, dtype=complex)
    image = apply_coeff(op, f)
    series = image.series_eval(z)
    tail = image.remainder_bound(float(np.max(np.abs(z))))
    rho = np.abs(z)
    coeff_err = float(np.max(np.sum(image.err[None, :] * rho[:, None] ** np.arange(len(image.err)),
                                    axis=1)))
    quad = apply_integral(op, f, z)
    diff = float(np.max(np.abs(series - quad.value)))
    bound = coeff_err + tail + float(np.max(quad.error))
    return Residual(diff, max(bound, floor))


def pairing_residual(op, f: PowerSeries, g, r: float,
                     samples: int = PAIRING_SAMPLES) -> Residual:
    """``|mean_theta I(f)(r e^it) conj(g(e^it)) - int f(t) conj(g(r t)) dmu|``."""
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    m = _measure_of(op)
    gc = np.asarray(g.coeffs if isinstance(g, PowerSeries) else g, dtype=complex)
    if len(gc) > samples // 2:
        raise ValueError("polynomial degree too large for the circle rule")
    theta = 2 * np.pi * np.arange(samples) / samples
    w = np.exp(1j * theta)
    image = IntegralImage(m, f, depth=max(12, math.ceil(-math.log2(1 - r)) + 2))
    lhs = np.mean(image.eval(r * w) * np.conj(np.polynomial.polynomial.polyval(w, gc)))

    def integrand(t, s):
        return np.asarray(f.on_interval(t, s)) * np.conj(np.polynomial.polynomial.polyval(r * t, gc))

    rhs = M.integrate(m, integrand, rtol=1e-13)
    return Residual(float(abs(lhs - rhs.value)), 1e-8)


# --------------------------------------------------------------------------
# witnesses
# --------------------------------------------------------------------------

class Witness(NamedTuple):
    delta: float
    value: float
    bound: float
    eps: float


def _power_interval(t, s, delta, alpha):
    return delta * (2.0 - delta) / (s + delta * t) ** alpha


def _real_deriv(m, fvals, eps, breaks):
    """``I(f)'(1 - eps)`` for an array ``eps``; ``fvals(t, s)`` gives ``f`` on [0, 1)."""
    eps = np.asarray(eps, dtype=float)

    def g(t, s):
        k = s[:, None] + t[:, None] * eps[None, :]
        return (t * fvals(t, s))[:, None] / (k * k)

    res = M.integrate(m, g, breaks=sorted(breaks), rtol=1e-10)
    return np.atleast_1d(res.value)


def _power_witness(m, delta, alpha, reach=24):
    """``sup_x (1 - x^2) I(f_lam)'(x)`` over ``x in [0, 1)`` for the power family."""
    f = lambda t, s: _power_interval(t, s, delta, alpha)
    top = math.ceil(-math.log2(delta)) + reach
    ks = np.arange(0, 2 * top + 1) / 2.0
    breaks = [-math.log(delta), top * math.log(2)]
    best_val, best_k = -1.0, 0.0
    for step in (0.5, 1 / 32, 1 / 512):
        if best_val >= 0:
            ks = best_k + step * np.arange(-16, 17)
            ks = ks[ks >= 0]
        eps = np.exp2(-ks)
        vals = eps * (2.0 - eps) * _real_deriv(m, f, eps, breaks)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_k = float(vals[i]), float(ks[i])
    return max(best_val, 0.0), 2.0 ** -best_k


def witness_lower_bound(op, mode: str, delta: float, alpha: float = 2.0) -> Witness:
    """Witness value at ``lam = 1 - delta`` and the matching closed-form lower bound.

    power: ``||I(f_lam)||_B`` (Bloch seminorm) for ``f_lam = (1-lam^2)/(1-lam z)^alpha``;
           bound ``mu([lam,1)) / (e (1-lam^2)^alpha)``.
    log:   ``(1-lam^2) I(f_lam)'(lam)`` for ``f_lam = beta_lam log^2(e/(1-lam z))``;
           bound ``log(e/(1-lam^2)) mu([lam,1)) / (1-lam^2)``.
    """
    m = _measure_of(op)
    if not 0.0 < delta < 1.0:
        raise ValueError("lambda = 1 - delta must lie in (0, 1)")
    one_minus_l2 = delta * (2.0 - delta)
    tail = M.tail_mass_delta(m, delta).value
    if mode == "power":
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        value, eps = _power_witness(m, delta, alpha)
        bound = tail / (math.e * one_minus_l2 ** alpha)
        return Witness(delta, value, bound, eps)
    if mode == "log":
        return log_witnesses(m, [delta])[0]
    raise ValueError(f"unknown mode {mode!r}")


def log_witnesses(op, deltas) -> list[Witness]:
    m = _measure_of(op)
    deltas = np.asarray(deltas, dtype=float)
    beta = np.array([log2_scale(d) for d in deltas])

    def g(t, s):
        lt = s[:, None] + deltas[None, :] * t[:, None]  # 1 - lam t
        L = 1.0 - np.log(lt)
        return t[:, None] * beta[None, :] * L * L / (lt * lt)

    breaks = sorted({-math.log(d) for d in deltas})
    vals = np.atleast_1d(M.integrate(m, g, breaks=breaks, rtol=1e-10).value)
    out = []
    for d, v in zip(deltas, vals):
        w = d * (2.0 - d)
        tail = M.tail_mass_delta(m, d).value
        out.append(Witness(float(d), float(w * v), float((1.0 - math.log(w)) * tail / w), float(d)))
    return out


# --------------------------------------------------------------------------
# essential norm
# --------------------------------------------------------------------------

class Formula(NamedTuple):
    value: float
    deltas: np.ndarray
    ratios: np.ndarray
    trend: str
    report: M.CarlesonReport


def _mode_params(mode, alpha):
    if mode == "power":
        if not alpha > 1:
            raise ValueError("power mode needs alpha > 1")
        return float(alpha), 0.0
    if mode == "log":
        return 1.0, 1.0
    raise ValueError(f"unknown mode {mode!r}")


def essnorm_formula(m, mode: str, alpha: float = 2.0, depth: int | None = None) -> Formula:
    """Trailing-window max of the tail ratio whose limsup gives the essential norm."""
    m = _measure_of(m)
    s, q = _mode_params(mode, alpha)
    rep = M.carleson_report(m, s, q, **({"depth": depth} if depth else {}))
    if not rep.verdict_bounded:
        raise HypothesisViolation(
            f"{'log-' if q else ''}Carleson ratio (s={s:g}, q={q:g}) is unbounded on the "
            f"grid (trailing max {rep.tail_limsup_estimate:.4g}, slope {rep.trend_slope:.3g})"
        )
    trend = "vanishing" if rep.verdict_vanishing else "converged"
    return Formula(rep.tail_limsup_estimate if not rep.verdict_vanishing else
                   rep.tail_limsup_estimate, rep.deltas, rep.ratios, trend, rep)


@dataclass(frozen=True, eq=False)
class EssNormBracket:
    mode: str
    alpha: float
    deltas: np.ndarray
    witnesses: np.ndarray
    bounds: np.ndarray
    lower_witness: float
    formula_value: float
    witness_vanishing: bool
    formula_vanishing: bool

    @property
    def lambda_grid(self) -> np.ndarray:
        return 1.0 - self.deltas

    @property
    def ratio(self) -> float:
        # both sides vanish when collapsed; the quotient is then rounding noise
        if self.collapsed or not self.formula_value > 0:
            return math.nan
        return self.lower_witness / self.formula_value

    @property
    def collapsed(self) -> bool:
        return self.witness_vanishing and self.formula_vanishing

    def to_record(self) -> dict:
        r = self.ratio
        return {
            "mode": self.mode,
            "alpha": self.alpha,
            "lower_witness": self.lower_witness,
            "formula_value": self.formula_value,
            "ratio": None if math.isnan(r) else r,
            "grid": [int(round(-math.log2(d))) for d in self.deltas],
        }


def default_lambda_deltas(mode: str) -> np.ndarray:
    return dyadic_deltas(2, POWER_LAMBDA_DEPTH if mode == "power" else LOG_LAMBDA_DEPTH)


def witness_sequence(op, mode: str, deltas, alpha: float = 2.0) -> list[Witness]:
    m = _measure_of(op)
    if mode == "log":
        return log_witnesses(m, deltas)
    return [witness_lower_bound(m, "power", float(d), alpha) for d in deltas]


def essnorm_bracket(op, mode: str, alpha: float = 2.0, deltas=None,
                    window: int = TRAILING_WINDOW) -> EssNormBracket:
    """Witness limsup (lower side) against the tail-ratio formula (upper side).

    Both sides are reported as trailing-window maxima along their grids,
    the finite-grid stand-in for a limsup.
    """
    m = _measure_of(op)
    alpha = 1.0 if mode == "log" else float(alpha)
    formula = essnorm_formula(m, mode, alpha)
    deltas = default_lambda_deltas(mode) if deltas is None else np.asarray(deltas, dtype=float)
    ws = witness_sequence(m, mode, deltas, alpha)
    values = np.array([w.value for w in ws])
    bounds = np.array([w.bound for w in ws])
    v = judge(values, log_inv(deltas), window=window)
    return EssNormBracket(
        mode=mode, alpha=alpha, deltas=deltas, witnesses=values, bounds=bounds,
        lower_witness=v.trailing_max, formula_value=formula.value,
        witness_vanishing=v.vanishing, formula_vanishing=formula.trend == "vanishing",
    )
