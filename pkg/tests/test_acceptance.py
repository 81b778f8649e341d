"""Acceptance criteria at full scale.

Each test prints one ``PASS``/``FAIL`` line and records it for the summary
printed at the end of the session (see conftest.py). Runtime is dominated by
the covariance campaign: 4e5 eigenvalue-only solves at n = 300.

    pytest tests/test_acceptance.py -v -s
"""
import json

import numpy as np
import pytest

from dilute_wigner import cli, identities, mc, theory
from dilute_wigner.ensemble import EnsembleConfig, EntryLaw

pytestmark = pytest.mark.acceptance

RESULTS: list[str] = []
SEED = 1


def _report(capsys, number: int, title: str, passed: bool, detail: str):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail}"
    RESULTS.append(line)
    with capsys.disabled():
        print("\n" + line)
    return passed


def test_1_semicircle_law(capsys):
    n = 2000
    cfg = EnsembleConfig(n, n**0.8, EntryLaw.gaussian(), seed=SEED)
    study = mc.semicircle_study(cfg, 20)
    ok = study.ks_mean < 0.02 and study.ks_pooled < 0.02
    assert _report(capsys, 1, "semicircle KS, n=2000, p=n^0.8, K=20", ok,
                   f"mean per-sample KS={study.ks_mean:.5f}, averaged-cdf KS={study.ks_pooled:.5f}, tol 0.02")


def test_2_variance_scaling(capsys):
    cfgs = [EnsembleConfig(n, n**0.8, EntryLaw.gaussian(), seed=SEED) for n in (200, 400, 800)]
    out = mc.variance_vs_np(cfgs, 3j, M=5000, batches=100)
    slope = out["slope"]
    ok = -1.15 <= slope <= -0.85
    vars_ = ", ".join(f"n={r['n']}: {r['var']:.4g}+-{r['stderr']:.2g}" for r in out["rows"])
    assert _report(capsys, 2, "log Var g(3i) vs log np slope", ok, f"slope={slope:.4f} in [-1.15, -0.85]; {vars_}")


def test_3_covariance_leading_term(capsys):
    points = (3j, -3j)
    est = {}
    for name, law in (("gauss", EntryLaw.gaussian()), ("rad", EntryLaw.rademacher())):
        spec = mc.CampaignSpec(EnsembleConfig(300, 54, law, seed=SEED), points, (), 200_000, 100)
        est[name] = mc.run_campaign(spec, keep_samples=False).estimates[("C", 3j, -3j)]
    target = 3.8627e-7
    g, r = est["gauss"], est["rad"]
    tol = max(4 * g.stderr, 0.15 * abs(target))
    close = abs(g.value - target) <= tol
    ratio = g.value.real / r.value.real
    rad_theory = theory.C_leading(theory.TheoryParams.from_law(EntryLaw.rademacher(), 300, 54), 3j, -3j)
    ok = close and ratio > 1.5
    assert _report(
        capsys, 3, "C(3i,-3i), n=300, p=54, M=2e5", ok,
        f"gauss C={g.value.real:.5g}+-{g.stderr:.2g} (target {target:.5g}, |diff|={abs(g.value - target):.3g} <= {tol:.3g}); "
        f"rad C={r.value.real:.5g}+-{r.stderr:.2g} (leading term {rad_theory.real:.5g}); ratio={ratio:.3f} > 1.5",
    )


def test_4_finite_n_predictions(capsys):
    n = 1000
    cfg = EnsembleConfig(n, n**0.8, EntryLaw.gaussian(), seed=SEED)
    spec = mc.CampaignSpec(cfg, (3j, -3j), ("g", "trG2", "B12", "U12"), 200, 100, covariance=False)
    res = mc.run_campaign(spec, keep_samples=False)
    targets = {
        ("g", 3j): theory.stieltjes_w(3j),
        ("trG2", 3j): -0.0839752,
        ("B12", 3j, -3j): 0.0916735,
        ("U12", 3j, -3j): 0.0254258j,
    }
    gaps = {k: abs(res.estimates[k].value - t) for k, t in targets.items()}
    ok = all(g <= 0.012 for g in gaps.values())
    detail = ", ".join(f"{k[0]}: gap={g:.2e} (se {res.estimates[k].stderr:.1e})" for k, g in gaps.items())
    assert _report(capsys, 4, "E g, E trG2/n, E B12, E U12 at n=1000, M=200", ok, detail + "; tol 0.012")


def test_5_universality_limit(capsys):
    ref = theory.universality_limit(1.0)
    errs = []
    for n, p in ((100, 100**0.8), (1000, 1000**0.8), (10_000, 1585)):
        val = theory.density_density_leading(-0.5 / n, 0.5 / n, theory.TheoryParams(1.0, 3.0, 15.0, n, p))
        errs.append(abs(val - ref))
    ok = errs[-1] <= 1e-5 and errs[0] > errs[1] > errs[2]
    assert _report(capsys, 5, "density-density -> -1/pi^2 at s=1", ok,
                   f"errors n=1e2,1e3,1e4: {errs[0]:.3e}, {errs[1]:.3e}, {errs[2]:.3e}; last <= 1e-5, strictly decreasing")


def test_6_identity_suites(capsys):
    rows = identities.identity_suite(seed=SEED)
    lam = np.linspace(-1.999, 1.999, 100)
    w = theory.stieltjes_w(lam, boundary=True)
    boundary = float(np.max(np.abs(w + 1 / (lam + w))))
    failed = [f"{r['identity']} [{r['case']}]={r['residual']:.2e}" for r in rows if not r["passed"]]
    ok = not failed and boundary <= 1e-12
    worst = {}
    for r in rows:
        worst[r["identity"]] = max(worst.get(r["identity"], 0.0), r["residual"])
    summary = ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    assert _report(capsys, 6, f"identity suites ({len(rows)} checks + boundary fixed point)", ok,
                   f"boundary fixed point={boundary:.1e}; {summary}" + (f"; FAILED: {failed}" if failed else ""))


def test_7_determinism(tmp_path, capsys):
    configs = {
        "covariance": {"experiment": "covariance", "ensemble": {"n": 120, "alpha": 0.8},
                       "points": [[0, 3], [0.5, -3]], "M": 400, "batches": 20, "seed": 11},
        "predictions": {"experiment": "predictions", "ensemble": {"n": 100, "alpha": 0.8},
                        "points": [[0, 3], [0, -3]], "M": 60, "batches": 10, "seed": 12},
    }
    same = []
    for name, cfg in configs.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        outs = []
        for k in (1, 2, 3):
            out = tmp_path / f"{name}_{k}.csv"
            assert cli.run(path, threads=k, output=str(out)) == 0
            outs.append(out.read_bytes())
        rerun = tmp_path / f"{name}_rerun.csv"
        assert cli.run(tmp_path / f"{name}_1.csv.json", output=str(rerun)) == 0
        outs.append(rerun.read_bytes())
        same.append(all(o == outs[0] for o in outs))
    ok = all(same)
    assert _report(capsys, 7, "byte-identical CSV at 1/2/3 workers and sidecar rerun", ok,
                   ", ".join(f"{n}: {'identical' if s else 'DIFFERENT'}" for n, s in zip(configs, same)))

