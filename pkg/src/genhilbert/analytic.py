"""Analytic functions on the unit disk as truncated power series.

A :class:`PowerSeries` carries its Taylor coefficients ``a_0..a_N`` plus,
optionally, a growth certificate ``|a_k| <= C k^(alpha-1) rate^k`` (used to
bound truncation remainders) and a closed form (used for evaluation near the
boundary).  A series with neither is an exact polynomial.

Norm estimates (Bloch-type, H^2, BMOA) are sups over explicit grids and are
reported with a ``converged`` flag comparing against a coarser nested grid.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P

from .verdicts import SLACK

DEFAULT_N = 4096
EVAL_TOL = 1e-10
CONVERGENCE_RTOL = 1e-3


class TruncationError(ValueError):
    """The truncated series cannot be certified at the requested point."""


@dataclass(frozen=True)
class Growth:
    """Certificate ``|a_k| <= C k^(alpha-1) rate^k`` for all ``k >= 1``."""

    alpha: float
    C: float
    rate: float = 1.0

    def tail_bound(self, n: int, rho: float) -> float:
        """Bound on ``sum_{k>n} C k^(alpha-1) (rate rho)^k``."""
        x = self.rate * rho
        if self.C == 0.0 or x == 0.0:
            return 0.0
        if x >= 1.0:
            return math.inf
        p = self.alpha - 1.0
        log_first = math.log(self.C) + p * math.log(n + 1) + (n + 1) * math.log(x)
        q = x * ((n + 2) / (n + 1)) ** max(p, 0.0)
        if q >= 1.0:
            return math.inf
        return math.exp(log_first) / (1.0 - q) if log_first > -745 else 0.0


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def _one_minus_lz(z, delta):
    # 1 - (1 - delta) z without cancellation near z = 1
    return (1.0 - z) + delta * z


def _pf_value(z, delta, alpha):
    return delta * (2.0 - delta) / _one_minus_lz(z, delta) ** alpha


def _pf_deriv(z, delta, alpha):
    lam = 1.0 - delta
    return alpha * lam * delta * (2.0 - delta) / _one_minus_lz(z, delta) ** (alpha + 1.0)


def _pf_interval(t, s, delta, alpha):
    return delta * (2.0 - delta) / (s + delta * t) ** alpha


def log2_scale(delta: float) -> float:
    """``beta_lambda = 1 / log(e / (1 - lambda^2))`` for ``lambda = 1 - delta``."""
    return 1.0 / (1.0 - math.log(delta * (2.0 - delta)))


def _l2_value(z, delta):
    L = 1.0 - np.log(_one_minus_lz(z, delta))
    return log2_scale(delta) * L * L


def _l2_deriv(z, delta):
    w = _one_minus_lz(z, delta)
    return 2.0 * log2_scale(delta) * (1.0 - np.log(w)) * (1.0 - delta) / w


def _l2_interval(t, s, delta):
    L = 1.0 - np.log(s + delta * t)
    return log2_scale(delta) * L * L


_FORMS = {
    # name: (value, derivative, value on [0,1) given (t, s=1-t), nonneg on [0,1))
    "constant": (lambda z, c: c + 0 * z, lambda z, c: 0 * z, lambda t, s, c: c + 0 * t, None),
    "geometric": (lambda z: 1 / (1 - z), lambda z: 1 / (1 - z) ** 2, lambda t, s: 1 / s, True),
    "log_kernel": (
        lambda z: 1 - np.log(1 - z), lambda z: 1 / (1 - z), lambda t, s: 1 - np.log(s), True,
    ),
    "power_family": (_pf_value, _pf_deriv, _pf_interval, True),
    "log2_family": (_l2_value, _l2_deriv, _l2_interval, True),
}


@dataclass(frozen=True)
class ClosedForm:
    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in _FORMS:
            raise ValueError(f"unknown closed form {self.name!r}")

    def value(self, z):
        return _FORMS[self.name][0](np.asarray(z), *self.params)

    def deriv(self, z):
        return _FORMS[self.name][1](np.asarray(z), *self.params)

    def on_interval(self, t, s):
        return _FORMS[self.name][2](np.asarray(t), np.asarray(s), *self.params)

    @property
    def nonneg_on_interval(self) -> bool:
        flag = _FORMS[self.name][3]
        if flag is None:  # constant
            c = self.params[0]
            return bool(np.isreal(c) and np.real(c) >= 0)
        return flag


# --------------------------------------------------------------------------
# power series
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PowerSeries:
    coeffs: np.ndarray
    growth: Growth | None = None
    closed_form: ClosedForm | None = None
    err: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs))
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_polynomial(self) -> bool:
        return self.growth is None and self.closed_form is None

    @property
    def nonneg_on_interval(self) -> bool:
        """True when ``f(t) >= 0`` for ``t in [0, 1)`` is known structurally."""
        if self.closed_form is not None:
            return self.closed_form.nonneg_on_interval
        c = self.coeffs
        return bool(np.all(np.imag(c) == 0) and np.all(np.real(c) >= 0))

    def remainder_bound(self, rho: float, derivative: bool = False) -> float:
        if self.growth is None:
            return 0.0
        g = self.growth
        if derivative:
            g = Growth(g.alpha + 1.0, g.C, g.rate)
        return g.tail_bound(self.degree, rho)

    def series_eval(self, z, derivative: bool = False):
        c = self.coeffs
        if derivative:
            c = c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(1)
        return P.polyval(np.asarray(z), c)

    def _check(self, z, derivative):
        z = np.asarray(z)
        rho = float(np.max(np.abs(z))) if z.size else 0.0
        if rho >= 1.0:
            raise ValueError("evaluation point outside the open unit disk")
        if self.closed_form is None:
            bound = self.remainder_bound(rho, derivative)
            if bound >= EVAL_TOL:
                raise TruncationError(
                    f"truncation remainder {bound:.3e} at |z|={rho} exceeds {EVAL_TOL:g}"
                )
        return z

    def eval(self, z):
        z = self._check(z, False)
        if self.closed_form is not None:
            return self.closed_form.value(z)
        return self.series_eval(z)

    def deriv(self, z):
        z = self._check(z, True)
        if self.closed_form is not None:
            return self.closed_form.deriv(z)
        return self.series_eval(z, derivative=True)

    def on_interval(self, t, s):
        """Values on ``[0, 1)``, with ``s = 1 - t`` supplied by the caller."""
        if self.closed_form is not None:
            return self.closed_form.on_interval(t, s)
        # t may round to 1.0; polynomials and rate < 1 series are fine there
        if self.remainder_bound(1.0) >= EVAL_TOL:
            return self.eval(t)
        return self.series_eval(t)


def eval(f: PowerSeries, z):
    return f.eval(z)


def polynomial(coeffs) -> PowerSeries:
    return PowerSeries(np.asarray(coeffs))


def constant(c: complex = 1.0) -> PowerSeries:
    return PowerSeries(np.array([c]), closed_form=ClosedForm("constant", (c,)))


def monomial(k: int, c: complex = 1.0) -> PowerSeries:
    a = np.zeros(k + 1, dtype=np.result_type(c, float))
    a[k] = c
    return PowerSeries(a)


def geometric(N: int = DEFAULT_N) -> PowerSeries:
    """``1 / (1 - z)``."""
    return PowerSeries(np.ones(N + 1), Growth(1.0, 1.0), ClosedForm("geometric"))


def log_kernel(N: int = DEFAULT_N) -> PowerSeries:
    """``log(e / (1 - z)) = 1 + sum z^k / k``."""
    a = np.ones(N + 1)
    a[1:] = 1.0 / np.arange(1, N + 1)
    return PowerSeries(a, Growth(1.0, 1.0), ClosedForm("log_kernel"))


def _binomial_series(alpha: float, N: int) -> np.ndarray:
    """``binom(k + alpha - 1, k)``, the coefficients of ``(1 - w)^-alpha``."""
    k = np.arange(1, N + 1, dtype=float)
    out = np.ones(N + 1)
    out[1:] = np.cumprod((k + alpha - 1.0) / k)
    return out


def test_function_power(lam: float | None, alpha: float, N: int = DEFAULT_N, *,
                        delta: float | None = None) -> PowerSeries:
    """``(1 - lam^2) / (1 - lam z)^alpha`` with exact binomial coefficients.

    Pass ``delta = 1 - lam`` instead of ``lam`` for points closer to 1 than
    double precision resolves.
    """
    delta = _delta(lam, delta, allow_zero_lam=True)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    lam = 1.0 - delta
    k = np.arange(N + 1, dtype=float)
    binom = _binomial_series(alpha, N)
    with np.errstate(under="ignore"):
        geo = lam ** k
    norm = delta * (2.0 - delta)
    a = norm * binom * geo
    if lam > 0:
        observed = float(np.max(binom[1:] / k[1:] ** (alpha - 1.0))) if N else 0.0
        C = norm * max(observed, 1.0 / math.gamma(alpha)) * (1 + 1e-12)
        growth = Growth(alpha, C, lam)
    else:
        growth = Growth(alpha, 0.0, 0.0)
    return PowerSeries(a, growth, ClosedForm("power_family", (delta, float(alpha))))


def test_function_log(lam: float | None, N: int = DEFAULT_N, *,
                      delta: float | None = None) -> PowerSeries:
    """``beta_lam log^2(e / (1 - lam z))``; coefficients by squaring ``1 + sum w^k/k``."""
    delta = _delta(lam, delta, allow_zero_lam=False)
    lam = 1.0 - delta
    ell = np.ones(N + 1)
    ell[1:] = 1.0 / np.arange(1, N + 1)
    sq = np.convolve(ell, ell)[: N + 1]
    beta = log2_scale(delta)
    with np.errstate(under="ignore"):
        a = beta * sq * lam ** np.arange(N + 1, dtype=float)
    return PowerSeries(a, Growth(1.0, 2.0 * beta, lam), ClosedForm("log2_family", (delta,)))


def _delta(lam, delta, allow_zero_lam):
    if (lam is None) == (delta is None):
        raise ValueError("give exactly one of lam and delta")
    if delta is None:
        lo = 0.0 if allow_zero_lam else 0.0
        if not (lo <= lam < 1.0) or (not allow_zero_lam and lam == 0.0):
            raise ValueError("lambda must lie in [0, 1)" if allow_zero_lam else "lambda must lie in (0, 1)")
        delta = 1.0 - lam
    if not (0.0 < delta <= 1.0) or (not allow_zero_lam and delta == 1.0):
        raise ValueError("delta = 1 - lambda out of range")
    return float(delta)


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------

def mobius(a: complex, z):
    """Disk automorphism ``(a - z) / (1 - conj(a) z)``."""
    return (a - np.asarray(z)) / (1.0 - np.conj(a) * np.asarray(z))


@dataclass(frozen=True)
class BlochGrid:
    depth: int = 30
    n_angles: int = 64
    per_octave: int = 8

    def refine(self) -> "BlochGrid":
        return BlochGrid(self.depth + 4, 2 * self.n_angles, 2 * self.per_octave)

    def coarsen(self) -> "BlochGrid":
        return BlochGrid(max(self.depth - 4, 1), max(self.n_angles // 2, 1),
                         max(self.per_octave // 2, 1))


@dataclass(frozen=True)
class NormEstimate:
    kind: str
    value: float
    grid: dict
    converged: bool
    argmax: complex | None = None


def _max_depth(f, depth):
    """Deepest radius level ``1 - 2^-j`` at which ``f'`` is certifiable."""
    if not isinstance(f, PowerSeries) or f.closed_form is not None:
        return depth
    j = depth
    while j > 0 and f.remainder_bound(1.0 - 2.0 ** -j, derivative=True) >= EVAL_TOL:
        j -= 1
    return j


def _bloch_points(grid: BlochGrid, depth: int, real_extremal: bool):
    """Points ``z`` with their ``1 - |z|^2`` computed without cancellation."""
    n_ang = 8 if real_extremal else grid.n_angles
    j = np.arange(1, depth + 1)
    d = np.ldexp(1.0, -j)
    theta = 2 * np.pi * np.arange(n_ang) / n_ang
    circ = ((1 - d)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    circ_w = np.repeat(d * (2 - d), n_ang)
    u = np.arange(depth * grid.per_octave + 1) * (math.log(2) / grid.per_octave)
    x = 1 - np.exp(-u)
    e = 1 - x  # exact, so the weight matches the evaluation point
    real = x.astype(complex)
    real_w = e * (2 - e)
    z = np.concatenate([[0j], circ, real])
    w = np.concatenate([[1.0], circ_w, real_w])
    return z, w


def _bloch_sup(f, alpha, grid, depth):
    z, w = _bloch_points(grid, depth, getattr(f, "nonneg_on_interval", False) and
                         getattr(f, "real_extremal", True))
    vals = w ** alpha * np.abs(f.deriv(z))
    i = int(np.argmax(vals))
    return float(vals[i]), complex(z[i])


def bloch_seminorm(f, alpha: float, grid: BlochGrid | None = None) -> NormEstimate:
    """``sup (1 - |z|^2)^alpha |f'(z)|`` over a nested radial/angular grid.

    Radii ``1 - 2^-j``, equispaced angles, and a dense sampling of the
    positive real axis (where every kernel built from a measure on [0,1)
    peaks).  Functions that are nonnegative on [0,1) and built from
    positive kernels only get spot-checked off the real axis.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    grid = grid or BlochGrid()
    depth = _max_depth(f, grid.depth)
    if depth == 0:
        raise TruncationError("series too short to evaluate f' on any grid radius")
    value, arg = _bloch_sup(f, alpha, grid, depth)
    coarse = grid.coarsen()
    c_value, _ = _bloch_sup(f, alpha, coarse, min(depth, coarse.depth))
    converged = abs(value - c_value) <= CONVERGENCE_RTOL * max(value, 1e-300)
    return NormEstimate(f"bloch_alpha({alpha:g})", value,
                        {"depth": depth, "n_angles": grid.n_angles,
                         "per_octave": grid.per_octave}, converged, arg)


def h2_norm(f: PowerSeries, method: str = "coeffs", rho: float = 1 - 2.0 ** -12,
            samples: int = 4096) -> NormEstimate:
    """H^2 norm: coefficient ``l^2`` norm, or circle mean at radius ``rho``."""
    if method == "coeffs":
        value = float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))
        tail = 0.0 if f.growth is None else f.growth.tail_bound(f.degree, 1.0)
        return NormEstimate("h2", value, {"method": "coeffs", "N": f.degree},
                            bool(tail < EVAL_TOL))
    if method != "sample":
        raise ValueError("method must be 'coeffs' or 'sample'")
    value = _circle_h2(f, 0.0, rho, samples, subtract=False)
    coarse = _circle_h2(f, 0.0, rho, samples // 2, subtract=False)
    return NormEstimate("h2", value, {"method": "sample", "rho": rho, "samples": samples},
                        abs(value - coarse) <= CONVERGENCE_RTOL * max(value, 1e-300))


def _circle_h2(f, a, rho, samples, subtract=True):
    w = rho * np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = f.eval(mobius(a, w) if a != 0 else w)
    if subtract:
        vals = vals - f.eval(np.asarray(a))
    return float(np.sqrt(np.mean(np.abs(vals) ** 2)))


def default_a_grid(depth: int = 20, spots: bool = True) -> np.ndarray:
    pts = [0.0] + [1.0 - 2.0 ** -j for j in range(1, depth + 1)]
    a = np.array(pts, dtype=complex)
    if spots:
        radii = np.array([0.5, 0.9, 0.99, 0.999])
        ang = np.pi / 4 * np.array([1, 3, 5, 7])
        a = np.concatenate([a, (radii[:, None] * np.exp(1j * ang)[None, :]).ravel()])
    return a


def bmoa_norm(f, a_grid=None, rho: float = 1 - 2.0 ** -12, samples: int = 16384) -> NormEstimate:
    """``|f(0)| + max_a ||f o phi_a - f(a)||_{H^2}`` by boundary sampling at ``rho``."""
    a_grid = default_a_grid() if a_grid is None else np.asarray(a_grid, dtype=complex)
    w = rho * np.exp(2j * np.pi * np.arange(samples) / samples)
    z = mobius(a_grid[:, None], w[None, :])
    vals = np.asarray(f.eval(z.ravel())).reshape(z.shape)
    centre = np.asarray(f.eval(a_grid))
    norms = np.sqrt(np.mean(np.abs(vals - centre[:, None]) ** 2, axis=1))
    f0 = abs(complex(np.asarray(f.eval(np.array([0.0])))[0]))
    i = int(np.argmax(norms))
    value = f0 + float(norms[i])
    real_part = np.abs(a_grid.imag) == 0
    coarse_mask = real_part & (np.abs(a_grid) <= 1 - 2.0 ** -16)
    coarse = f0 + float(norms[coarse_mask].max())
    return NormEstimate("bmoa", value, {"rho": rho, "samples": samples, "n_a": len(a_grid)},
                        abs(value - coarse) <= CONVERGENCE_RTOL * max(value, 1e-300),
                        complex(a_grid[i]))


# --------------------------------------------------------------------------
# coefficient tests
# --------------------------------------------------------------------------

class CoeffBlochResult(NamedTuple):
    sup: float
    bounded: bool
    running: np.ndarray


def coeff_bloch_test(f) -> CoeffBlochResult:
    """``sup_n n a_n`` for a nonincreasing nonnegative coefficient sequence."""
    a = np.asarray(f.coeffs if isinstance(f, PowerSeries) else f)
    if np.iscomplexobj(a):
        if np.any(a.imag != 0):
            raise ValueError("coefficients must be real")
        a = a.real
    a = a.astype(float)
    if np.any(a < 0):
        raise ValueError("coefficients must be nonnegative")
    if np.any(a[1:] > a[:-1] * (1 + 1e-9) + 1e-300):
        raise ValueError("coefficients must be nonincreasing")
    n = np.arange(len(a), dtype=float)
    running = np.maximum.accumulate(n * a)[1:]
    N = len(running)
    if N < 2:
        raise ValueError("need at least two coefficients beyond a_0")
    half = running[N // 2 - 1]
    bounded = bool(running[-1] <= (1 + SLACK) * half)
    return CoeffBlochResult(float(running[-1]), bounded, running)


def _blocks(x, first: int):
    """``(sum_{k=2^n+1}^{2^{n+1}} |x_k|^2)^(1/2)`` for ``n = first, ...``."""
    x = np.abs(np.asarray(x))
    out = []
    n = first
    while 2 ** (n + 1) < len(x):
        out.append(math.sqrt(float(np.sum(x[2 ** n + 1: 2 ** (n + 1) + 1] ** 2))))
        n += 1
    return np.array(out)


class BlockResult(NamedTuple):
    value: float
    blocks: np.ndarray
    bounded: bool


def dyadic_block_seminorm(coeffs, alpha: float) -> BlockResult:
    """``sup_n (sum_{k=2^n+1}^{2^{n+1}} |a_k / k^(alpha-1)|^2)^(1/2)``; ``k = 1`` is unblocked."""
    a = np.asarray(coeffs.coeffs if isinstance(coeffs, PowerSeries) else coeffs)
    k = np.arange(len(a), dtype=float)
    k[0] = 1.0
    b = _blocks(np.abs(a) / k ** (alpha - 1.0), 0)
    if len(b) == 0:
        return BlockResult(0.0, b, True)
    last, prev = b[-1], (b[:-1].max() if len(b) > 1 else b[-1])
    return BlockResult(float(b.max()), b, bool(last == 0 or last <= (1 + SLACK) * prev))


class MultiplierResult(NamedTuple):
    total: float
    terms: np.ndarray
    finite: bool


def multiplier_l2inf_to_l1_check(lam) -> MultiplierResult:
    """``sum_{n>=1} (sum_{k=2^n+1}^{2^{n+1}} |lam_k|^2)^(1/2)`` and a convergence verdict."""
    terms = _blocks(lam, 1)
    if len(terms) < 2:
        raise ValueError("sequence too short for two dyadic blocks")
    a, b = terms[-2], terms[-1]
    finite = bool(b == 0 or (a > 0 and b / a < 0.9))
    return MultiplierResult(float(terms.sum()), terms, finite)


class GrowthCheck(NamedTuple):
    C: float
    passed: bool


def _envelope(f, alpha, grid):
    z, w = _bloch_points(grid, grid.depth, False)
    if alpha > 1:
        weight = w ** (alpha - 1.0)
    elif alpha < 1:
        weight = np.ones_like(w)
    else:
        weight = 1.0 / (1.0 - np.log(np.where(w > 0, w, 1.0)))
    return float(np.max(np.abs(f.eval(z)) * weight))


def growth_envelope_check(f, alpha: float, grid: BlochGrid | None = None) -> GrowthCheck:
    """``sup |f(z)| (1-|z|^2)^(alpha-1)`` (``alpha > 1``) or ``sup |f|`` (``alpha < 1``).

    At ``alpha = 1`` the envelope is ``log(e / (1 - |z|^2))``.
    """
    grid = grid or BlochGrid()
    fine = _envelope(f, alpha, grid.refine())
    base = _envelope(f, alpha, grid)
    return GrowthCheck(fine, abs(fine - base) <= CONVERGENCE_RTOL * max(fine, 1e-300))


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def dump_csv(f: PowerSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for k, c in enumerate(np.asarray(f.coeffs, dtype=complex)):
            w.writerow([k, f"{c.real:.17g}", f"{c.imag:.17g}"])


def load_csv(path) -> PowerSeries:
    rows = list(csv.DictReader(Path(path).read_text().splitlines()))
    if not rows or set(rows[0]) != {"index", "re", "im"}:
        raise ValueError("expected columns index,re,im")
    n = max(int(r["index"]) for r in rows)
    a = np.zeros(n + 1, dtype=complex)
    for r in rows:
        a[int(r["index"])] = complex(float(r["re"]), float(r["im"]))
    if np.all(a.imag == 0):
        a = a.real
    return PowerSeries(a)
