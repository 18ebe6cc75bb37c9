"""Positive Borel measures on [0, 1): moments, tails, Carleson-type ratios.

Measures are parametric: power-log densities

    dmu(t) = c (1-t)^(beta-1) log^gamma(e/(1-t)) dt

optionally cut off at ``t <= cutoff``, finite atom lists, and flat mixtures.
Integrals against a density are computed after the substitution
``t = 1 - exp(-u)``, which turns the density into the smooth weight
``c exp(-beta u) (1+u)^gamma`` on ``u in (0, inf)``.

Integrands receive both ``t`` and ``s = 1 - t`` so that quantities such as
``1 - t x`` can be formed without cancellation when ``t`` is close to 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, NamedTuple, Union

import mpmath
import numpy as np

from . import quadrature
from .quadrature import QuadResult
from .verdicts import DEFAULT_DEPTH, TRAILING_WINDOW, dyadic_deltas, judge, log_inv

MOMENT_RTOL = 1e-12
QUAD_RTOL = 1e-10
CLOSED_FORM_RTOL = 1e-14


@dataclass(frozen=True)
class PowerLogDensity:
    scale: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0
    cutoff: float | None = None

    def __post_init__(self):
        for name in ("scale", "beta", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (np.isfinite(self.scale) and self.scale >= 0):
            raise ValueError("scale must be finite and >= 0")
        if self.cutoff is not None:
            object.__setattr__(self, "cutoff", float(self.cutoff))
            if not 0.0 < self.cutoff < 1.0:
                raise ValueError("cutoff must lie in (0, 1)")
        elif not _integrable(self.beta, self.gamma):
            raise ValueError(
                f"density with beta={self.beta}, gamma={self.gamma} has infinite mass"
            )

    @property
    def u_max(self) -> float:
        return np.inf if self.cutoff is None else -math.log1p(-self.cutoff)


@dataclass(frozen=True)
class AtomList:
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((float(t), float(c)) for t, c in self.atoms)
        for t, c in atoms:
            if not 0.0 <= t < 1.0:
                raise ValueError(f"atom location {t} outside [0, 1)")
            if not c > 0:
                raise ValueError(f"atom weight {c} must be positive")
        object.__setattr__(self, "atoms", atoms)

    @property
    def t(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms], dtype=float)

    @property
    def c(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms], dtype=float)


@dataclass(frozen=True)
class Mixture:
    components: tuple = field(default=())

    def __post_init__(self):
        flat = []
        for comp in self.components:
            if isinstance(comp, Mixture):
                flat.extend(comp.components)
            elif isinstance(comp, (PowerLogDensity, AtomList)):
                flat.append(comp)
            else:
                raise TypeError(f"not a measure: {comp!r}")
        object.__setattr__(self, "components", tuple(flat))


Measure = Union[PowerLogDensity, AtomList, Mixture]


def _integrable(beta: float, gamma: float) -> bool:
    # mass = int_0^inf exp(-beta u) (1+u)^gamma du
    return beta > 0 or (beta == 0 and gamma < -1)


def lebesgue() -> PowerLogDensity:
    return PowerLogDensity()


def zero() -> PowerLogDensity:
    return PowerLogDensity(scale=0.0)


def atoms(*pairs) -> AtomList:
    return AtomList(tuple(pairs))


def mixture(*components) -> Mixture:
    return Mixture(tuple(components))


def _parts(m: Measure):
    return m.components if isinstance(m, Mixture) else (m,)


# --------------------------------------------------------------------------
# integration against a measure
# --------------------------------------------------------------------------

def integrate(
    m: Measure,
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    tail_delta: float | None = None,
    breaks=(),
    rtol: float = QUAD_RTOL,
    atol: float = 0.0,
) -> QuadResult:
    """``int g(t) dmu(t)`` (over ``t >= 1 - tail_delta`` if given).

    ``g(t, s)`` gets node arrays ``t`` and ``s = 1 - t`` and returns either
    one value per node or a ``(nodes, m)`` array.  ``breaks`` are extra
    panel edges in the variable ``u = -log(1 - t)``.
    """
    value, error = None, None
    for part in _parts(m):
        if isinstance(part, AtomList):
            v, e = _atoms_integral(part, g, tail_delta)
        else:
            v, e = _density_integral(part, g, tail_delta, breaks, rtol, atol)
        if v is None:
            continue
        value = v if value is None else value + v
        error = e if error is None else error + e
    if value is None:
        probe = np.asarray(g(np.array([0.5]), np.array([0.5])))
        shape = probe.shape[1:]
        return QuadResult(np.zeros(shape, dtype=probe.dtype)[()], np.zeros(shape)[()])
    return QuadResult(value, error)


def _atoms_integral(part: AtomList, g, tail_delta):
    if not part.atoms:
        return None, None
    t, c = part.t, part.c
    s = 1.0 - t
    if tail_delta is not None:
        keep = s <= tail_delta
        t, s, c = t[keep], s[keep], c[keep]
        if len(t) == 0:
            return None, None
    vals = np.asarray(g(t, s))
    w = c.reshape((-1,) + (1,) * (vals.ndim - 1))
    total = np.sum(vals * w, axis=0)
    err = 4e-16 * len(t) * np.sum(np.abs(vals) * w, axis=0)
    return total, err


def _density_integral(part: PowerLogDensity, g, tail_delta, breaks, rtol, atol):
    if part.scale == 0.0:
        return None, None
    u_lo = 0.0 if tail_delta is None else -math.log(tail_delta)
    u_hi = part.u_max
    if u_lo >= u_hi:
        return None, None
    c, beta, gamma = part.scale, part.beta, part.gamma

    def integrand(u):
        t = -np.expm1(-u)
        s = np.exp(-u)
        w = c * np.exp(-beta * u) * (1.0 + u) ** gamma
        vals = np.asarray(g(t, s))
        return vals * w.reshape((-1,) + (1,) * (vals.ndim - 1))

    res = quadrature.integrate(
        integrand, u_lo, u_hi, breaks=[b for b in breaks if b > u_lo],
        panel_width=1.0, rtol=rtol, atol=atol,
    )
    return res.value, res.error


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------

class Estimate(NamedTuple):
    value: float
    err: float


@lru_cache(maxsize=64)
def _beta_table(beta: float, n_max: int) -> np.ndarray:
    """B(n+1, beta) for n = 0..n_max to ~1e-14 relative."""
    n = np.arange(n_max + 1, dtype=float)
    if beta == round(beta) and beta <= 60:
        k = int(round(beta))
        denom = np.ones_like(n)
        for i in range(1, k + 1):
            denom *= n + i
        return math.factorial(k - 1) / denom
    out = np.empty(n_max + 1)
    chunk = 128
    with mpmath.workdps(30):
        for a0 in range(0, n_max + 1, chunk):
            stop = min(a0 + chunk, n_max + 1)
            anchor = float(mpmath.beta(a0 + 1, beta))
            steps = n[a0 + 1:stop]
            out[a0] = anchor
            out[a0 + 1:stop] = anchor * np.cumprod(steps / (steps + beta))
    return out


def moments(m: Measure, ns, *, rtol: float = MOMENT_RTOL) -> QuadResult:
    """Vectorized moments ``int t^n dmu`` with per-entry error bounds."""
    ns = np.asarray(ns, dtype=int)
    if np.any(ns < 0):
        raise ValueError("moment order must be >= 0")
    values = np.zeros(ns.shape)
    errs = np.zeros(ns.shape)
    for part in _parts(m):
        if (isinstance(part, PowerLogDensity) and part.gamma == 0.0
                and part.cutoff is None and part.scale > 0):
            table = _beta_table(part.beta, int(ns.max()) if ns.size else 0)
            v = part.scale * table[ns]
            values += v
            errs += CLOSED_FORM_RTOL * v
        else:
            nf = ns.astype(float).ravel()
            res = integrate(part, lambda t, s: np.power(t[:, None], nf[None, :]), rtol=rtol)
            values += np.reshape(res.value, ns.shape)
            errs += np.reshape(res.error, ns.shape)
    return QuadResult(values, errs)


def moment(m: Measure, n: int) -> Estimate:
    if n < 0:
        raise ValueError("moment order must be >= 0")
    res = moments(m, [n])
    return Estimate(float(res.value[0]), float(res.error[0]))


@dataclass(frozen=True, eq=False)
class MomentTable:
    n_max: int
    values: np.ndarray
    err: np.ndarray

    def hankel(self, size: int) -> np.ndarray:
        if 2 * (size - 1) > self.n_max:
            raise ValueError(f"Hankel size {size} needs moments up to {2 * (size - 1)}")
        idx = np.add.outer(np.arange(size), np.arange(size))
        return self.values[idx]

    def min_eigenvalue(self, size: int) -> float:
        return float(np.linalg.eigvalsh(self.hankel(size))[0])

    def monotone(self) -> bool:
        slack = self.err[1:] + self.err[:-1] + 1e-15 * self.values[:-1]
        return bool(np.all(self.values[1:] <= self.values[:-1] + slack))


def moment_table(m: Measure, n_max: int, *, rtol: float = MOMENT_RTOL) -> MomentTable:
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    res = moments(m, np.arange(n_max + 1), rtol=rtol)
    return MomentTable(n_max, np.maximum(res.value, 0.0), res.error)


# --------------------------------------------------------------------------
# tails and Carleson-type ratios
# --------------------------------------------------------------------------

def tail_mass_delta(m: Measure, delta: float) -> Estimate:
    """``mu([1 - delta, 1))`` with an error bound."""
    value, err = 0.0, 0.0
    for part in _parts(m):
        if isinstance(part, PowerLogDensity) and part.gamma == 0.0:
            if part.scale == 0.0:
                continue
            hi = delta ** part.beta
            lo = 0.0 if part.cutoff is None else (1.0 - part.cutoff) ** part.beta
            v = part.scale * max(hi - lo, 0.0) / part.beta
            value += v
            err += CLOSED_FORM_RTOL * v
        else:
            res = integrate(part, lambda t, s: np.ones_like(t), tail_delta=delta)
            value += float(res.value)
            err += float(res.error)
    return Estimate(value, err)


def tail_mass(m: Measure, r: float) -> float:
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    return tail_mass_delta(m, 1.0 - r).value


def total_mass(m: Measure) -> float:
    return moment(m, 0).value


@dataclass(frozen=True, eq=False)
class CarlesonReport:
    s: float
    q: float
    deltas: np.ndarray
    ratios: np.ndarray
    sup_estimate: float
    tail_limsup_estimate: float
    trend_slope: float
    verdict_bounded: bool
    verdict_vanishing: bool

    @property
    def radii(self) -> np.ndarray:
        return 1.0 - self.deltas


def log_weight(delta) -> np.ndarray:
    """``log(e / delta)``."""
    return 1.0 + log_inv(delta)


def tail_ratios(m: Measure, s: float, q: float = 0.0, deltas=None) -> np.ndarray:
    """``mu([r,1)) log^q(e/(1-r)) / (1-r)^s`` on the grid ``1 - deltas``."""
    deltas = dyadic_deltas() if deltas is None else np.asarray(deltas, dtype=float)
    tails = np.array([tail_mass_delta(m, d).value for d in deltas])
    return tails * log_weight(deltas) ** q / deltas ** s


def carleson_report(
    m: Measure, s: float, q: float = 0.0, *, depth: int = DEFAULT_DEPTH, deltas=None,
    window: int = TRAILING_WINDOW,
) -> CarlesonReport:
    if not s > 0:
        raise ValueError("s must be positive")
    if q < 0:
        raise ValueError("log exponent must be >= 0")
    deltas = dyadic_deltas(1, depth) if deltas is None else np.asarray(deltas, dtype=float)
    ratios = tail_ratios(m, s, q, deltas)
    v = judge(ratios, log_inv(deltas), window=window)
    return CarlesonReport(
        s=float(s), q=float(q), deltas=deltas, ratios=ratios,
        sup_estimate=float(ratios.max()), tail_limsup_estimate=v.trailing_max,
        trend_slope=v.slope, verdict_bounded=v.bounded, verdict_vanishing=v.vanishing,
    )


# --------------------------------------------------------------------------
# derived measures
# --------------------------------------------------------------------------

def transform_weight(m: Measure, p: float, q: float) -> Measure:
    """``dv = (1-t)^p log^q(e/(1-t)) dmu``."""
    if isinstance(m, Mixture):
        return Mixture(tuple(transform_weight(c, p, q) for c in m.components))
    if isinstance(m, AtomList):
        s = 1.0 - m.t
        w = m.c * s ** p * (1.0 - np.log(s)) ** q
        return AtomList(tuple(zip(m.t.tolist(), w.tolist())))
    beta, gamma = m.beta + p, m.gamma + q
    if m.cutoff is None and not _integrable(beta, gamma):
        raise ValueError(
            f"transform (p={p}, q={q}) gives a non-integrable density "
            f"(beta={beta}, gamma={gamma})"
        )
    return PowerLogDensity(m.scale, beta, gamma, m.cutoff)


def truncate(m: Measure, r: float) -> Measure:
    """Restriction of ``m`` to ``[0, r]``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if isinstance(m, Mixture):
        return Mixture(tuple(truncate(c, r) for c in m.components))
    if isinstance(m, AtomList):
        return AtomList(tuple(a for a in m.atoms if a[0] <= r))
    cutoff = r if m.cutoff is None else min(m.cutoff, r)
    return PowerLogDensity(m.scale, m.beta, m.gamma, cutoff)


class MomentDecay(NamedTuple):
    C: float
    ns: np.ndarray
    scaled: np.ndarray
    bounded: bool


def moment_decay_check(m: Measure, alpha: float, ns=None) -> MomentDecay:
    """``sup_n mu_n n^alpha`` over ``ns`` and whether it has stabilized."""
    ns = np.arange(1, 4097) if ns is None else np.asarray(ns, dtype=int)
    mu = moments(m, ns).value
    scaled = mu * ns.astype(float) ** alpha
    v = judge(scaled, np.log(ns))
    return MomentDecay(float(scaled.max()), ns, scaled, v.bounded)


# --------------------------------------------------------------------------
# measure spec files
# --------------------------------------------------------------------------

_FIELDS = {
    "power_log": {"kind", "scale", "beta", "gamma", "cutoff"},
    "atoms": {"kind", "atoms"},
    "mixture": {"kind", "components"},
}


def to_dict(m: Measure) -> dict:
    if isinstance(m, PowerLogDensity):
        d = {"kind": "power_log", "scale": m.scale, "beta": m.beta, "gamma": m.gamma}
        if m.cutoff is not None:
            d["cutoff"] = m.cutoff
        return d
    if isinstance(m, AtomList):
        return {"kind": "atoms", "atoms": [list(a) for a in m.atoms]}
    return {"kind": "mixture", "components": [to_dict(c) for c in m.components]}


def from_dict(d: dict) -> Measure:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("measure spec must be an object with a 'kind' field")
    kind = d["kind"]
    if kind not in _FIELDS:
        raise ValueError(f"unknown measure kind {kind!r}")
    unknown = set(d) - _FIELDS[kind]
    if unknown:
        raise ValueError(f"unknown fields for {kind}: {sorted(unknown)}")
    if kind == "power_log":
        return PowerLogDensity(
            scale=d.get("scale", 1.0), beta=d.get("beta", 1.0),
            gamma=d.get("gamma", 0.0), cutoff=d.get("cutoff"),
        )
    if kind == "atoms":
        return AtomList(tuple(tuple(a) for a in d.get("atoms", [])))
    return Mixture(tuple(from_dict(c) for c in d.get("components", [])))


def load_measure(path) -> Measure:
    return from_dict(json.loads(Path(path).read_text()))


def parse_measure(text: str) -> Measure:
    """Parse an inline measure description.

    Forms: ``lebesgue``, ``zero``, ``power_log beta=2 gamma=-2 [scale=.. cutoff=..]``,
    ``atoms 0.5:1,0.8:2``, a JSON object, or several of these joined by ``+``.
    """
    text = text.strip()
    if text.startswith("{"):
        return from_dict(json.loads(text))
    pieces = [p.strip() for p in text.split("+")]
    if len(pieces) > 1:
        return Mixture(tuple(parse_measure(p) for p in pieces))
    head, _, rest = text.partition(" ")
    head = head.lower()
    if head == "lebesgue" and not rest:
        return lebesgue()
    if head == "zero" and not rest:
        return zero()
    if head == "power_log":
        kw = {}
        for tok in rest.split():
            key, eq, val = tok.partition("=")
            if not eq or key not in {"scale", "beta", "gamma", "cutoff"}:
                raise ValueError(f"bad power_log field {tok!r}")
            kw[key] = float(val)
        return PowerLogDensity(**kw)
    if head == "atoms":
        pairs = []
        for tok in rest.replace(" ", "").split(","):
            t, colon, c = tok.partition(":")
            if not colon:
                raise ValueError(f"atom {tok!r} must be written t:c")
            pairs.append((float(t), float(c)))
        return AtomList(tuple(pairs))
    raise ValueError(f"cannot parse measure {text!r}")


def describe(m: Measure) -> str:
    """Short stable label, used in reports."""
    if isinstance(m, PowerLogDensity):
        label = f"power_log(c={m.scale:g},beta={m.beta:g},gamma={m.gamma:g}"
        if m.cutoff is not None:
            label += f",cutoff={m.cutoff:g}"
        return label + ")"
    if isinstance(m, AtomList):
        return "atoms(" + ",".join(f"{t:g}:{c:g}" for t, c in m.atoms) + ")"
    return " + ".join(describe(c) for c in m.components)
