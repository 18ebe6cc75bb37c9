"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""
import json
import math
import time

import numpy as np
import pytest

from genhilbert import analytic as A
from genhilbert import measure as M
from genhilbert import operator as O
from genhilbert import verify as V

DEFAULT_MEASURES = {
    "lebesgue": M.lebesgue(),
    "beta=2": M.PowerLogDensity(beta=2.0),
    "beta=3": M.PowerLogDensity(beta=3.0),
    "gamma=-2": M.PowerLogDensity(1.0, 1.0, -2.0),
    "atom": M.atoms((0.5, 1.0)),
}
DEFAULT_INPUTS = {
    "constant": A.constant(1.0),
    "z": A.monomial(1),
    "power(0.5,2)": A.test_function_power(0.5, 2.0),
    "power(0.9,2)": A.test_function_power(0.9, 2.0),
}


@pytest.fixture
def report(capsys):
    t0 = time.perf_counter()

    def done(number, title, checks: dict, budget: float):
        elapsed = time.perf_counter() - t0
        checks = dict(checks, **{f"runtime {elapsed:.1f}s < {budget:g}s": elapsed < budget})
        failed = [k for k, ok in checks.items() if not ok]
        with capsys.disabled():
            status = "PASS" if not failed else "FAIL"
            extra = "" if not failed else "  failed: " + "; ".join(failed)
            print(f"\n[{status}] criterion {number:>2}: {title}{extra}")
        assert not failed

    return done


def test_01_hilbert_matrix(report):
    mu = M.moment_table(M.lebesgue(), 4096).values
    n = np.arange(4097)
    rel = np.max(np.abs(mu * (n + 1) - 1))
    H = O.hankel_matrix(O.HankelOperator(M.lebesgue(), 8), 8)
    i = np.arange(8)
    exact = np.array_equal(H, 1.0 / (i[:, None] + i[None, :] + 1))
    report(1, "Lebesgue moments and Hilbert matrix",
           {f"moments rel err {rel:.1e} <= 1e-12": rel <= 1e-12, "hankel_matrix(8) exact": exact}, 1.0)


def test_02_route_agreement(report):
    worst = 0.0
    for m in DEFAULT_MEASURES.values():
        op = O.HankelOperator(m)
        for f in DEFAULT_INPUTS.values():
            worst = max(worst, O.agreement_residual(op, f).value)
    radius = np.abs(O.default_z_grid()).max()
    report(2, "coefficient and integral routes agree",
           {f"max residual {worst:.1e} < 1e-8": worst < 1e-8,
            "grid inside |z| <= 0.9": radius <= 0.9 + 1e-15}, 30.0)


def test_03_pairing_identity(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for m in DEFAULT_MEASURES.values():
        for r in (0.5, 0.9, 0.99):
            for deg in (0, 3, 8):
                g = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
                for f in (A.constant(1.0), A.test_function_power(0.9, 2.0)):
                    worst = max(worst, O.pairing_residual(m, f, g, r).value)
    report(3, "pairing identity", {f"max residual {worst:.1e} < 1e-8": worst < 1e-8}, 30.0)


def test_04_phase_diagram(report):
    alpha = 2.0
    fams = [V.Family(f"beta={b:g}", M.PowerLogDensity(beta=b)) for b in (1.5, 2.0, 3.0)]
    checks = {}
    for fam, b in zip(fams, (1.5, 2.0, 3.0)):
        rep = M.carleson_report(fam.measure, alpha)
        checks[f"beta={b:g} Carleson verdict == (beta >= 2)"] = rep.verdict_bounded == (b >= 2)
        v, _, _ = V._power_witness_verdict(fam.measure, alpha)
        want = {1.5: (False, False), 2.0: (True, False), 3.0: (True, True)}[b]
        checks[f"beta={b:g} witnesses (bounded, vanishing) == {want}"] = (v.bounded, v.vanishing) == want
    (suite,) = V.run_suites(["T3.5"], alpha, families=fams)
    sub = [c for c in suite.checks if "multiplier" in c.name or "mu_n n^alpha" in c.name
           or "integrable" in c.name]
    checks[f"{len(sub)} multiplier/moment-decay subchecks consistent"] = all(c.passed for c in sub)
    checks["full suite checks pass"] = suite.passed
    report(4, "phase diagram at alpha=2", checks, 60.0)


def test_05_essential_norm_formula(report):
    m = M.PowerLogDensity(beta=2.0)
    formula = O.essnorm_formula(m, "power", 2.0)
    dev = np.max(np.abs(formula.ratios - 0.5))
    gaps = []
    for j in range(2, 11):
        lam = 1 - 2.0 ** -j
        w = O.witness_lower_bound(m, "power", 2.0 ** -j, 2.0).value
        gaps.append(w - (1 / (2 * math.e * (1 + lam) ** 2) - 1e-6))
    b = O.essnorm_bracket(m, "power", 2.0)
    r = np.asarray(b.witnesses) / b.formula_value
    spread = r.max() / r.min()
    report(5, "essential norm formula at beta=alpha=2", {
        f"formula 0.5 on every grid point (dev {dev:.1e})": dev <= 1e-10,
        "witness >= 1/(2e(1+lam)^2) - 1e-6 for j=2..10": min(gaps) >= 0,
        f"comparability ratio spread {spread:.3f} < 2": spread < 2,
    }, 60.0)


def test_06_log_case(report):
    m = M.PowerLogDensity(1.0, 1.0, -2.0)
    rep = M.carleson_report(m, 1.0, 1.0)
    b = O.essnorm_bracket(m, "log")
    w = np.asarray(b.witnesses)
    trailing = w[-8:].max() / w.max()
    try:
        O.essnorm_formula(M.lebesgue(), "log")
        violation = False
    except O.HypothesisViolation:
        violation = True
    j = np.arange(1, 41)
    lr = M.tail_ratios(M.lebesgue(), 1.0, 1.0, np.ldexp(1.0, -j))
    dev = np.max(np.abs(lr - (1 + j * math.log(2))))
    report(6, "logarithmic Carleson case", {
        "gamma=-2 vanishing 1-log-1-Carleson": rep.verdict_bounded and rep.verdict_vanishing,
        f"bracket trailing/max {trailing:.3f} < 0.05": trailing < 0.05 and b.witness_vanishing,
        "Lebesgue reports hypothesis violation": violation,
        f"Lebesgue ratios equal 1 + j log 2 (dev {dev:.1e})": dev <= 1e-9,
    }, 30.0)


def test_07_moment_structure(report):
    checks = {}
    for fam in V.default_families():
        tab = M.moment_table(fam.measure, 127)
        checks[f"{fam.label} PSD"] = tab.min_eigenvalue(64) >= -1e-9
        checks[f"{fam.label} monotone"] = tab.monotone
    report(7, "Hankel PSD and moment monotonicity", checks, 10.0)


def test_08_dyadic_block_lemma(report):
    ratios = {}
    for a in (1.5, 2.0, 3.0):
        for lam in (0.5, 0.9, 0.99):
            f = A.test_function_power(lam, a)
            norm = abs(complex(f.eval(np.array([0.0]))[0])) + A.bloch_seminorm(f, a).value
            ratios[(lam, a)] = A.dyadic_block_seminorm(f, a).value / norm
    vals = np.array(list(ratios.values()))
    centre = 0.5 * (vals.max() + vals.min())
    stable = bool(np.all(np.abs(vals / centre - 1) <= 0.2))
    geo = A.dyadic_block_seminorm(A.geometric(), 2.0).value
    report(8, "dyadic block lemma", {
        f"fitted constant stable within 20% (ratios {vals.min():.4f}..{vals.max():.4f})": stable,
        f"1/(1-z), alpha=2 block sup {geo:.15f} = 0.5 +- 1e-12": abs(geo - 0.5) <= 1e-12,
    }, 30.0)


def test_09_bmoa_closed_forms(report):
    z = A.bmoa_norm(A.monomial(1)).value
    c = 2.5 - 1.5j
    cv = A.bmoa_norm(A.constant(c)).value
    report(9, "BMOA closed forms", {
        f"||z||_BMOA = {z:.6f} = 1 +- 1e-3": abs(z - 1) <= 1e-3,
        "||c||_BMOA = |c| exactly": cv == abs(c),
    }, 30.0)


def test_10_verify_all_deterministic(report, capsys):
    from genhilbert import cli
    outs, codes = [], []
    for _ in range(2):
        codes.append(cli.main(["verify", "--suite", "all"]))
        outs.append(capsys.readouterr().out)
    rec = json.loads(outs[0])
    report(10, "verify --suite all", {
        f"exit codes {codes} == [0, 0]": codes == [0, 0],
        "every suite present": [s["suite"] for s in rec["suites"]] == list(V.SUITES),
        "bit-identical JSON": outs[0] == outs[1],
    }, 300.0)
