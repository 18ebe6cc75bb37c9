"""Command-line front end: ``genhilbert {moments,carleson,apply,essnorm,verify}``.

Exit codes: 0 success, 1 verdict failure, 2 usage or configuration error,
3 numerical-certification failure.

CSV columns (fixed order):
  moments   n, mu, err
  carleson  j, delta, r, ratio
  apply     z_re, z_im, coeff_re, coeff_im, integral_re, integral_im, residual
  essnorm   j, delta, witness, bound
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import analytic as A
from . import measure as M
from . import operator as O
from . import verify as V
from .quadrature import QuadratureError

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_CERT = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    measure: str | None = None
    measure_file: str | None = None
    alpha: float | None = None
    s: float = 1.0
    logq: float = 0.0
    grid_depth: int | None = None
    nmax: int = 8
    trunc: int = A.DEFAULT_N
    tol: float = 1e-8
    jobs: int = 1
    format: str = "csv"
    out: str | None = None
    input: str = "1"
    z: list = field(default_factory=lambda: ["0.5"])
    mode: str = "power"
    suite: list = field(default_factory=lambda: ["all"])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in d:
            raise UsageError("config needs a 'command'")
        return cls(**d)

    def load_measure(self):
        if self.measure and self.measure_file:
            raise UsageError("give --measure or --measure-file, not both")
        if self.measure_file:
            return M.load_measure(self.measure_file)
        return M.parse_measure(self.measure or "lebesgue")


# --------------------------------------------------------------------------
# input series and output helpers
# --------------------------------------------------------------------------

def parse_series(text: str, N: int = A.DEFAULT_N) -> A.PowerSeries:
    """``1``, ``z``, ``poly:a0,a1,...``, ``monomial:k``, ``power:lam,alpha``,
    ``log2:lam``, ``geometric``, ``log_kernel``, or a numeric constant."""
    text = text.strip()
    name, _, arg = text.partition(":")
    if text == "z":
        return A.monomial(1)
    if name == "poly":
        return A.polynomial([complex(x) if "j" in x else float(x) for x in arg.split(",")])
    if name == "monomial":
        return A.monomial(int(arg))
    if name == "power":
        lam, alpha = (float(x) for x in arg.split(","))
        return A.test_function_power(lam, alpha, N)
    if name == "log2":
        return A.test_function_log(float(arg), N)
    if text == "geometric":
        return A.geometric(N)
    if text == "log_kernel":
        return A.log_kernel(N)
    try:
        return A.constant(float(text))
    except ValueError:
        raise UsageError(f"cannot parse series {text!r}") from None


def _fmt(x) -> str:
    return "%.17g" % x


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(V._jsonable(obj) if not isinstance(obj, dict) else
                      {k: V._jsonable(v) for k, v in obj.items()}, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_moments(cfg: RunConfig) -> int:
    m = cfg.load_measure()
    if cfg.nmax < 0:
        raise UsageError("--nmax must be >= 0")
    tab = M.moment_table(m, cfg.nmax)
    rows = [(n, float(tab.values[n]), float(tab.err[n])) for n in range(cfg.nmax + 1)]
    if cfg.format == "json":
        _write(cfg, _json({"n": [r[0] for r in rows], "mu": [r[1] for r in rows],
                           "err": [r[2] for r in rows]}))
    else:
        _write(cfg, _csv(["n", "mu", "err"], rows))
    return EXIT_OK


def cmd_carleson(cfg: RunConfig) -> int:
    m = cfg.load_measure()
    kw = {"depth": cfg.grid_depth} if cfg.grid_depth else {}
    rep = M.carleson_report(m, cfg.s, cfg.logq, **kw)
    j = np.rint(-np.log2(rep.deltas)).astype(int)
    if cfg.format == "json":
        _write(cfg, _json({
            "s": rep.s, "q": rep.q, "j": j.tolist(), "ratio": rep.ratios.tolist(),
            "sup_estimate": rep.sup_estimate, "tail_limsup_estimate": rep.tail_limsup_estimate,
            "trend_slope": rep.trend_slope, "bounded": rep.verdict_bounded,
            "vanishing": rep.verdict_vanishing,
        }))
    else:
        rows = [(int(a), float(d), float(1 - d), float(r))
                for a, d, r in zip(j, rep.deltas, rep.ratios)]
        _write(cfg, _csv(["j", "delta", "r", "ratio"], rows))
    return EXIT_OK


def _parse_z(items) -> np.ndarray:
    out = []
    for item in items:
        for piece in str(item).split(","):
            piece = piece.strip()
            if piece:
                out.append(complex(piece.replace(" ", "")))
    return np.array(out, dtype=complex)


def cmd_apply(cfg: RunConfig) -> int:
    m = cfg.load_measure()
    z = _parse_z(cfg.z)
    N = min(cfg.trunc, A.DEFAULT_N)
    f = parse_series(cfg.input, N)
    op = O.HankelOperator(m, cfg.trunc)
    image = O.apply_coeff(op, f, tol=cfg.tol)
    coeff = np.atleast_1d(image.eval(z))
    integral = np.atleast_1d(O.apply_integral(op, f, z).value)
    resid = np.abs(coeff - integral)
    rows = [(float(a.real), float(a.imag), float(b.real), float(b.imag), float(c.real),
             float(c.imag), float(r)) for a, b, c, r in zip(z, coeff, integral, resid)]
    header = ["z_re", "z_im", "coeff_re", "coeff_im", "integral_re", "integral_im", "residual"]
    if cfg.format == "json":
        _write(cfg, _json({h: [r[i] for r in rows] for i, h in enumerate(header)}))
    else:
        _write(cfg, _csv(header, rows))
    return EXIT_OK if np.all(resid <= max(cfg.tol, 1e-8)) else EXIT_CERT


def cmd_essnorm(cfg: RunConfig) -> int:
    m = cfg.load_measure()
    if cfg.mode not in ("power", "log"):
        raise UsageError("--mode must be 'power' or 'log'")
    alpha = 1.0 if cfg.mode == "log" else (2.0 if cfg.alpha is None else cfg.alpha)
    deltas = None
    if cfg.grid_depth:
        deltas = np.ldexp(1.0, -np.arange(2, cfg.grid_depth + 1))
    try:
        b = O.essnorm_bracket(m, cfg.mode, alpha, deltas)
    except O.HypothesisViolation as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        _write(cfg, _json({"mode": cfg.mode, "alpha": alpha, "hypothesis_violation": str(exc)}))
        return EXIT_VERDICT
    if cfg.format == "csv":
        j = np.rint(-np.log2(b.deltas)).astype(int)
        _write(cfg, _csv(["j", "delta", "witness", "bound"],
                         [(int(a), float(d), float(w), float(c))
                          for a, d, w, c in zip(j, b.deltas, b.witnesses, b.bounds)]))
    else:
        _write(cfg, _json(b.to_record()))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    try:
        ids = V.expand_ids(cfg.suite)
    except KeyError as exc:
        raise UsageError(f"unknown suite id {exc.args[0]!r}; choose from "
                         f"{', '.join(V.SUITES)} or 'all'") from None
    verdicts = V.run_suites(ids, cfg.alpha, jobs=cfg.jobs)
    _write(cfg, V.report_json(verdicts) + "\n")
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_VERDICT


COMMANDS = {"moments": cmd_moments, "carleson": cmd_carleson, "apply": cmd_apply,
            "essnorm": cmd_essnorm, "verify": cmd_verify}


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genhilbert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="JSON RunConfig; flags override it")
    common.add_argument("--measure", default=S, help="e.g. lebesgue, 'power_log beta=2', 'atoms 0.5:1'")
    common.add_argument("--measure-file", dest="measure_file", default=S)
    common.add_argument("--alpha", type=float, default=S)
    common.add_argument("--s", type=float, default=S)
    common.add_argument("--logq", type=float, default=S)
    common.add_argument("--grid-depth", dest="grid_depth", type=int, default=S)
    common.add_argument("--nmax", type=int, default=S)
    common.add_argument("--trunc", type=int, default=S)
    common.add_argument("--tol", type=float, default=S)
    common.add_argument("--jobs", type=int, default=S)
    common.add_argument("--format", choices=["csv", "json"], default=S)
    common.add_argument("--out", default=S)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "apply":
            sp.add_argument("--input", default=S, help="series: 1, z, poly:..., power:lam,alpha, log2:lam")
            sp.add_argument("--z", nargs="+", default=S)
        if name == "essnorm":
            sp.add_argument("--mode", choices=["power", "log"], default=S)
        if name == "verify":
            sp.add_argument("--suite", nargs="+", default=S)
    return p


def config_from_args(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    base = {}
    if "config" in ns:
        path = ns.pop("config")
        try:
            with open(path) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if base.get("command", ns["command"]) != ns["command"]:
            raise UsageError("config command does not match subcommand")
    base.update(ns)
    return RunConfig.from_dict(base)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, KeyError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (O.CertificationError, QuadratureError, A.TruncationError) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERT
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
