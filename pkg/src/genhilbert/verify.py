"""Theorem-level property suites over a matrix of measure families.

Every suite compares numerical verdicts against an analytic phase oracle:
for a power-log density ``(beta, gamma)`` the tail ``mu([1-d, 1))`` behaves
like ``d^beta log^gamma(e/d)``, which decides every (s, q) Carleson-type
question in closed form.  A suite passes when each numerical route agrees
with the oracle and with the other routes.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic as A
from . import measure as M
from . import operator as O
from .verdicts import SLACK, judge, log_inv

SUITES = ("T2.3", "C2.4", "L3.2", "L3.3", "T3.5", "T3.6_T3.7", "L4.1", "T4.3")
BLOCK_CONSTANT = 16.0
BMOA_SURVEY = {"rho": 1 - 2.0 ** -10, "samples": 1024, "depth": 8}


@dataclass(frozen=True)
class Check:
    name: str
    expected: object
    observed: object
    tolerance: float | None
    passed: bool

    def to_record(self) -> dict:
        return {"name": self.name, "expected": _jsonable(self.expected),
                "observed": _jsonable(self.observed), "tolerance": self.tolerance,
                "pass": self.passed}


@dataclass(frozen=True)
class SuiteVerdict:
    suite_id: str
    params: dict
    checks: tuple = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_record(self) -> dict:
        return {"suite": self.suite_id, "params": self.params, "pass": self.passed,
                "checks": [c.to_record() for c in self.checks]}


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) else (str(x) if math.isinf(x) else x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    return x


def eq_check(name, expected, observed) -> Check:
    return Check(name, expected, observed, None, bool(expected == observed))


def implies_check(name, premise: bool, conclusion: bool) -> Check:
    return Check(name, "premise => conclusion", [bool(premise), bool(conclusion)], None,
                 bool(conclusion or not premise))


# --------------------------------------------------------------------------
# families and the phase oracle
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    label: str
    measure: object = field(compare=False)


def default_families() -> list[Family]:
    fams = [Family(f"beta={b:g},gamma={g:g}", M.PowerLogDensity(1.0, b, g))
            for b in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0) for g in (-2.0, 0.0)]
    fams.append(Family("atoms=(0.5:1)", M.atoms((0.5, 1.0))))
    return fams


def oracle_phase(m, s: float, q: float = 0.0) -> tuple[bool, bool]:
    """(bounded, vanishing) for ``sup mu([r,1)) log^q(e/(1-r)) / (1-r)^s``."""
    bounded, vanishing = True, True
    for part in M._parts(m):
        if isinstance(part, M.AtomList) or part.scale == 0 or part.cutoff is not None:
            continue
        e, g = part.beta - s, part.gamma + q
        b = e > 0 or (e == 0 and g <= 0)
        v = e > 0 or (e == 0 and g < 0)
        bounded, vanishing = bounded and b, vanishing and v
    return bounded, vanishing


def oracle_transform_phase(m, p: float, q: float, s: float = 1.0) -> tuple[bool, bool]:
    """Phase of ``(1-t)^p log^q(e/(1-t)) dmu``; an infinite measure is not Carleson."""
    try:
        v = M.transform_weight(m, p, q)
    except ValueError:
        return False, False
    return oracle_phase(v, s)


# --------------------------------------------------------------------------
# shared computations
# --------------------------------------------------------------------------

def _survey_bmoa(m, f) -> float:
    image = O.IntegralImage(m, f, depth=30, order=12)
    grid = A.default_a_grid(BMOA_SURVEY["depth"])
    return A.bmoa_norm(image, grid, rho=BMOA_SURVEY["rho"], samples=BMOA_SURVEY["samples"]).value


def _bloch_norm(f, alpha) -> float:
    return abs(complex(np.asarray(f.eval(np.array([0.0])))[0])) + A.bloch_seminorm(f, alpha).value


def _power_witness_verdict(m, alpha, first=2, last=O.POWER_LAMBDA_DEPTH):
    deltas = np.ldexp(1.0, -np.arange(first, last + 1))
    ws = O.witness_sequence(m, "power", deltas, alpha)
    vals = np.array([w.value for w in ws])
    bounds = np.array([w.bound for w in ws])
    return judge(vals, log_inv(deltas)), vals, bounds


# --------------------------------------------------------------------------
# per-family suite bodies
# --------------------------------------------------------------------------

def _t2_3(fam: Family, alpha: float) -> list[Check]:
    m, L = fam.measure, fam.label
    carleson, _ = oracle_phase(m, 1.0)
    rep = M.carleson_report(m, 1.0)
    out = [eq_check(f"{L}: Carleson verdict matches phase oracle", carleson, rep.verdict_bounded)]
    mu = M.moment_table(m, 4096).values
    cb = A.coeff_bloch_test(mu)
    out.append(eq_check(f"{L}: sup n mu_n finite (image of 1 in B) iff Carleson",
                        carleson, cb.bounded))
    if not carleson:
        return out
    lams = [0.5, 0.75, 0.875, 0.9375]
    tests = [A.test_function_power(l, alpha) for l in lams] + [A.monomial(1), A.monomial(4)]
    ratios = np.array([_survey_bmoa(m, f) / _bloch_norm(f, alpha) for f in tests])
    finite = bool(np.all(np.isfinite(ratios)))
    stable = bool(ratios[len(lams) - 1] <= (1 + SLACK) * ratios[: len(lams)].max())
    out.append(Check(f"{L}: BMOA(image)/B^alpha norm ratios bounded", True,
                     ratios.max(), SLACK, finite and stable))
    v, _, _ = _power_witness_verdict(m, alpha)
    out.append(implies_check(f"{L}: Carleson => images of weakly null family vanish",
                             carleson, v.vanishing))
    return out


def _c2_4(fam: Family, alpha: float) -> list[Check]:
    m, L = fam.measure, fam.label
    carleson, _ = oracle_phase(m, 1.0)
    if not carleson:
        return [Check(f"{L}: not Carleson, corollary does not apply", False, False, None, True)]
    v, vals, _ = _power_witness_verdict(m, alpha)
    out = [Check(f"{L}: B-witnesses on power family vanish", True, vals[-1] / vals.max(),
                 0.05, v.vanishing)]
    js = np.arange(2, 18, 2)
    norms = np.array([_survey_bmoa(m, A.test_function_power(None, alpha, delta=2.0 ** -j))
                      for j in js])
    vb = judge(norms, js * math.log(2), window=3)
    out.append(Check(f"{L}: BMOA images of power family vanish", True,
                     norms[-1] / norms.max(), 0.05, vb.vanishing))
    return out


def _l3_2(fam: Family, alpha: float) -> list[Check]:
    m, L = fam.measure, fam.label
    b_mu, v_mu = oracle_phase(m, alpha)
    rep = M.carleson_report(m, alpha)
    try:
        nu = M.transform_weight(m, 1.0 - alpha, 0.0)
        rep_nu = M.carleson_report(nu, 1.0)
        b_nu, v_nu = rep_nu.verdict_bounded, rep_nu.verdict_vanishing
    except ValueError:
        b_nu, v_nu = False, False
    return [
        eq_check(f"{L}: alpha-Carleson verdict matches phase oracle", b_mu, rep.verdict_bounded),
        eq_check(f"{L}: mu alpha-Carleson iff (1-t)^(1-alpha) dmu Carleson",
                 rep.verdict_bounded, b_nu),
        eq_check(f"{L}: vanishing versions agree", rep.verdict_vanishing, v_nu),
        eq_check(f"{L}: transformed measure matches oracle", oracle_transform_phase(
            m, 1.0 - alpha, 0.0), (b_nu, v_nu)),
    ]


def _t3_5(fam: Family, alpha: float) -> list[Check]:
    m, L = fam.measure, fam.label
    carleson, vanishing = oracle_phase(m, alpha)
    rep = M.carleson_report(m, alpha)
    out = [eq_check(f"{L}: alpha-Carleson verdict matches phase oracle", carleson,
                    rep.verdict_bounded)]
    md = M.moment_decay_check(m, alpha)
    out.append(eq_check(f"{L}: mu_n n^alpha bounded iff alpha-Carleson", carleson, md.bounded))
    try:
        O.integral_guard(m, A.geometric(8), alpha)
        guard = True
    except O.OperatorUndefined:
        guard = False
    out.append(implies_check(f"{L}: alpha-Carleson => (1-t)^(1-alpha) integrable",
                             carleson, guard))
    v, vals, bounds = _power_witness_verdict(m, alpha)
    out.append(eq_check(f"{L}: witness norms bounded iff alpha-Carleson", carleson, v.bounded))
    out.append(implies_check(f"{L}: vanishing alpha-Carleson => witnesses vanish",
                             vanishing, v.vanishing))
    gap = float(np.min(vals - bounds))
    out.append(Check(f"{L}: witness >= tail/(e(1-lam^2)^alpha)", ">= -1e-6", gap, 1e-6,
                     gap >= -1e-6))
    mu = M.moment_table(m, 8192).values
    k = np.arange(len(mu), dtype=float)
    mult = A.multiplier_l2inf_to_l1_check(mu * k ** (alpha - 1.0))
    out.append(implies_check(f"{L}: alpha-Carleson => mu_k k^(alpha-1) is an l(2,inf)->l1 multiplier",
                             carleson, mult.finite))
    return out


def _bracket_checks(fam: Family, mode: str, alpha: float, bounded: bool, vanishing: bool):
    L = fam.label
    try:
        b = O.essnorm_bracket(fam.measure, mode, alpha)
    except O.HypothesisViolation:
        return [eq_check(f"{L}: formula reports hypothesis violation iff unbounded",
                         not bounded, True)], None
    out = [
        eq_check(f"{L}: formula computed only under the boundedness hypothesis", bounded, True),
        eq_check(f"{L}: bracket collapses iff vanishing", vanishing, b.collapsed),
        eq_check(f"{L}: witness side and formula side agree on vanishing",
                 b.witness_vanishing, b.formula_vanishing),
    ]
    ratio = None if b.collapsed else b.ratio
    return out, ratio


def _t3_6(fam: Family, alpha: float):
    bounded, vanishing = oracle_phase(fam.measure, alpha)
    checks, ratio = _bracket_checks(fam, "power", alpha, bounded, vanishing)
    if vanishing:
        v, _, _ = _power_witness_verdict(fam.measure, alpha)
        checks.append(implies_check(f"{fam.label}: vanishing check => boundedness check",
                                    vanishing, v.bounded))
    return checks, ratio


def _l4_1(fam: Family, alpha: float) -> list[Check]:
    m, L = fam.measure, fam.label
    b, _ = oracle_phase(m, 1.0, 1.0)
    rep = M.carleson_report(m, 1.0, 1.0)
    try:
        rep_nu = M.carleson_report(M.transform_weight(m, 0.0, 1.0), 1.0)
        b_nu = rep_nu.verdict_bounded
    except ValueError:
        b_nu = False
    return [
        eq_check(f"{L}: log-Carleson verdict matches phase oracle", b, rep.verdict_bounded),
        eq_check(f"{L}: log(e/(1-t)) dmu Carleson iff mu log-Carleson", rep.verdict_bounded, b_nu),
    ]


def _t4_3(fam: Family, alpha: float):
    bounded, vanishing = oracle_phase(fam.measure, 1.0, 1.0)
    checks = _l4_1(fam, alpha)
    more, ratio = _bracket_checks(fam, "log", 1.0, bounded, vanishing)
    if bounded:
        ws = O.log_witnesses(fam.measure, O.default_lambda_deltas("log"))
        gap = min(w.value - w.bound for w in ws)
        more.append(Check(f"{fam.label}: log witness >= log(e/(1-lam^2)) tail/(1-lam^2)",
                          ">= -1e-6", gap, 1e-6, gap >= -1e-6))
    return checks + more, ratio


def _l3_3(alpha: float) -> list[Check]:
    out = []
    cases = [(f"power_family(lam={l:g})", A.test_function_power(l, a), a)
             for a in (1.5, 2.0, 3.0) for l in (0.5, 0.9, 0.99)]
    cases += [(f"log2_family(lam={l:g})", A.test_function_log(l), a)
              for a in (1.5, 2.0) for l in (0.5, 0.99)]
    cases += [(f"z^{k}", A.monomial(k), a) for a in (1.5, 2.0, 3.0) for k in (1, 2, 7, 100)]
    ratios = []
    for name, f, a in cases:
        blk = A.dyadic_block_seminorm(f, a).value
        semi = A.bloch_seminorm(f, a).value
        ratios.append(blk / semi)
        out.append(Check(f"{name}, alpha={a:g}: block <= {BLOCK_CONSTANT:g} * Bloch seminorm",
                         BLOCK_CONSTANT, blk / semi, None, blk <= BLOCK_CONSTANT * semi))
    out.append(Check("fitted constant max(block / seminorm)", f"<= {BLOCK_CONSTANT:g}",
                     max(ratios), None, max(ratios) <= BLOCK_CONSTANT))
    geo = A.dyadic_block_seminorm(A.geometric(), 2.0).value
    out.append(Check("1/(1-z), alpha=2: block sup", 0.5, geo, 1e-12, abs(geo - 0.5) <= 1e-12))
    return out


def _stability_check(name, ratios: dict) -> Check:
    vals = [r for r in ratios.values() if r is not None and np.isfinite(r) and r > 0]
    if not vals:
        return Check(name, "< 2", None, None, False)
    spread = max(vals) / min(vals)
    return Check(name, "< 2", spread, None, spread < 2.0)


# --------------------------------------------------------------------------
# orchestration
# --------------------------------------------------------------------------

def _extra_families(suite_id: str, alpha: float) -> list[Family]:
    if suite_id == "T3.6_T3.7":
        return [Family(f"beta={alpha:g}+beta={1.25 * alpha:g}",
                       M.mixture(M.PowerLogDensity(1.0, alpha, 0.0),
                                 M.PowerLogDensity(1.0, 1.25 * alpha, 0.0)))]
    if suite_id in ("T4.3", "L4.1"):
        return [Family("beta=1,gamma=-1", M.PowerLogDensity(1.0, 1.0, -1.0)),
                Family("beta=1,gamma=-1+beta=1.25,gamma=-1",
                       M.mixture(M.PowerLogDensity(1.0, 1.0, -1.0),
                                 M.PowerLogDensity(1.0, 1.25, -1.0)))]
    return []


_BODIES = {"T2.3": _t2_3, "C2.4": _c2_4, "L3.2": _l3_2, "T3.5": _t3_5,
           "T3.6_T3.7": _t3_6, "L4.1": _l4_1, "T4.3": _t4_3}

DEFAULT_ALPHA = {"T2.3": 0.5, "C2.4": 0.5, "L3.2": 2.0, "L3.3": 2.0, "T3.5": 2.0,
                 "T3.6_T3.7": 2.0, "L4.1": 1.0, "T4.3": 1.0}


def _validate_alpha(suite_id, alpha):
    if suite_id in ("T2.3", "C2.4") and not 0 < alpha < 1:
        raise ValueError(f"{suite_id} needs 0 < alpha < 1")
    if suite_id in ("L3.2", "T3.5", "T3.6_T3.7") and not alpha > 1:
        raise ValueError(f"{suite_id} needs alpha > 1")


def _run_task(task):
    suite_id, alpha, fam = task
    return _BODIES[suite_id](fam, alpha)


def suite_tasks(suite_id: str, alpha: float | None = None, families=None):
    if suite_id not in SUITES:
        raise KeyError(suite_id)
    alpha = DEFAULT_ALPHA[suite_id] if alpha is None else float(alpha)
    if suite_id in ("L4.1", "T4.3"):
        alpha = 1.0
    _validate_alpha(suite_id, alpha)
    fams = list(default_families() if families is None else families)
    fams += _extra_families(suite_id, alpha) if families is None else []
    return alpha, fams


def run_suites(ids, alpha: float | None = None, families=None, jobs: int = 1) -> list[SuiteVerdict]:
    """Run suites; results are identical for any ``jobs`` (ordered map + fixed grids)."""
    plan, tasks = [], []
    for sid in ids:
        a, fams = suite_tasks(sid, alpha, families)
        if sid == "L3.3":
            plan.append((sid, a, None, None))
            continue
        start = len(tasks)
        tasks += [(sid, a, f) for f in fams]
        plan.append((sid, a, fams, slice(start, len(tasks))))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]
    out = []
    for sid, a, fams, sl in plan:
        if sid == "L3.3":
            checks = _l3_3(a)
        elif sid in ("T3.6_T3.7", "T4.3"):
            checks, ratios = [], {}
            for fam, (c, r) in zip(fams, results[sl]):
                checks += c
                if r is not None:
                    ratios[fam.label] = r
            name = "comparability constant lower_witness/formula stable across families"
            checks.append(_stability_check(name, ratios))
        else:
            checks = [c for res in results[sl] for c in res]
        params = {"alpha": a, "families": [f.label for f in fams] if fams else []}
        out.append(SuiteVerdict(sid, params, tuple(checks)))
    return out


def expand_ids(spec) -> list[str]:
    ids = []
    for s in ([spec] if isinstance(spec, str) else spec):
        if s == "all":
            ids += list(SUITES)
        elif s in ("T3.6", "T3.7"):
            ids.append("T3.6_T3.7")
        elif s in SUITES:
            ids.append(s)
        else:
            raise KeyError(s)
    return list(dict.fromkeys(ids))


def report_json(verdicts) -> str:
    rec = {"pass": all(v.passed for v in verdicts), "suites": [v.to_record() for v in verdicts]}
    return json.dumps(rec, indent=2, sort_keys=True)
