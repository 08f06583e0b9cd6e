"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a single ``criterion N: PASS|FAIL`` line (also collected in
the terminal summary).  Criterion 4 contains one expansion that cannot hold
as written; it is reported as FAIL, the remaining checks are asserted, and
the failing check is pinned by a strict xfail below.
"""

import json
import time
from collections import defaultdict

import numpy as np
import pytest

from algebra_checks import CHECKS
from conftest import ACCEPTANCE_LINES
from kahlerstab.chart.fields import random_field, stream
from kahlerstab.chart.geometry import kahler_form_field, point_jet, soliton_residual, trace_field
from kahlerstab.chart.identities import REGISTRY, fd_convergence, random_fields_for, sweep_model
from kahlerstab.chart.models import CATALOG, kahler_jet_model, normal_jet_model
from kahlerstab.cli import main
from kahlerstab.curvature import outer_arr, random_algebraic_curvature
from kahlerstab.density import closed_form_density
from kahlerstab.kahler import curvature_action_plus, div_equivalence, lf_splitting_defect
from kahlerstab.stability import (
    WeightedCurvatureInput,
    kahler_orbifold_spectrum,
    ordered_spectrum,
    weighted_selfdual,
)

KAHLER_MODELS = [n for n, m in CATALOG.items() if m.is_kahler]
SHRINKERS = [n for n, m in CATALOG.items() if m.lam > 0]


def report(num, ok, detail, seconds):
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append((num, status, detail, seconds))
    print(f"criterion {num}: {status} ({seconds:.2f} s) {detail}")


def test_criterion_1_bccd_density(capsys):
    t0 = time.perf_counter()
    code = main(["density", "--case", "bccd", "--format", "json"])
    entry = json.loads(capsys.readouterr().out)["entries"][0]
    dt = time.perf_counter() - t0
    ok = (code == 0 and abs(entry["theta"] - 0.5617) <= 5e-4 and abs(entry["c_star"] - 0.6438) <= 1e-3
          and dt < 5.0)
    report(1, ok, f"theta={entry['theta']:.10f} c*={entry['c_star']:.10f}", dt)
    assert ok


def test_criterion_2_closed_forms():
    published = {"gaussian": 1.0, "sphere4": 0.8120, "cyl-s3xr": 0.7910, "cyl-s2xr2": 0.7358, "fubini-study": 0.6090}
    t0 = time.perf_counter()
    values = {name: closed_form_density(name) for name in published}
    dt = time.perf_counter() - t0
    ok = all(round(values[n], 4) == v for n, v in published.items()) and dt < 1.0
    report(2, ok, " ".join(f"{n}={values[n]:.4f}" for n in published), dt)
    assert ok


def test_criterion_3_identity_suite():
    t0 = time.perf_counter()
    worst = defaultdict(float)
    jet_count = defaultdict(int)
    failures = []

    def absorb(reports, where):
        for r in reports:
            worst[r.identity_id] = max(worst[r.identity_id], r.rel_err)
            if not r.passed:
                failures.append((where, r.identity_id, r.a, r.rel_err))

    origin = np.zeros((1, 4))
    for seed in range(100):
        rng = stream(seed, "acceptance", "normal-jet")
        m = normal_jet_model(random_algebraic_curvature(rng), rng)
        reps = sweep_model(m, origin, seed=seed)
        absorb(reps, f"normal-jet {seed}")
        for iid in {r.identity_id for r in reps}:
            jet_count[iid] += 1
    for seed in range(100):
        m = kahler_jet_model(stream(seed, "acceptance", "kahler-jet"))
        reps = sweep_model(m, origin, seed=seed)
        absorb(reps, f"kahler-jet {seed}")
        for iid in {r.identity_id for r in reps if REGISTRY[r.identity_id].kahler}:
            jet_count[iid] += 1

    catalog_points = defaultdict(int)
    for name, m in CATALOG.items():
        pts = m.sample_points(stream(0, "acceptance", name), 20)
        reps = sweep_model(m, pts, seed=0)
        absorb(reps, name)
        for iid in {r.identity_id for r in reps}:
            catalog_points[(name, iid)] = sum(1 for r in reps if r.identity_id == iid and r.a in (None, 0.0))
    dt = time.perf_counter() - t0

    coverage = all(jet_count[i] >= 100 for i in REGISTRY)
    coverage &= all(catalog_points[(n, i)] >= 20 for n, m in CATALOG.items() for i in REGISTRY
                    if m.is_kahler or not REGISTRY[i].kahler)
    ok = not failures and coverage and dt < 300.0
    detail = f"{len(REGISTRY)} identities, max rel err {max(worst.values()):.2e}"
    if failures:
        detail += f"; {len(failures)} failures, first {failures[0]}"
    report(3, ok, detail, dt)
    assert ok


def test_criterion_4_algebra():
    t0 = time.perf_counter()
    worst = {}
    for cid, (fn, _) in CHECKS.items():
        worst[cid] = max(fn(np.random.default_rng(seed)) for seed in range(1000))
    dt = time.perf_counter() - t0
    failing = sorted(cid for cid, err in worst.items() if err > 1e-10)
    ok = not failing and dt < 10.0
    detail = f"{len(CHECKS)} checks x 1000 seeds"
    if failing:
        detail += "; exceeding 1e-10: " + ", ".join(f"{c} ({worst[c]:.2f})" for c in failing)
    report(4, ok, detail, dt)
    # the literal expansion is the only unattainable check; everything else must hold
    assert failing == [cid for cid, (_, holds) in CHECKS.items() if not holds]
    assert dt < 10.0


@pytest.mark.xfail(strict=True, reason="(A kn g) o (B kn g) is not pair-symmetric; the stated expansion is")
def test_criterion_4_literal_expansion():
    fn, _ = CHECKS["kn_compose_expansion_literal"]
    assert max(fn(np.random.default_rng(seed)) for seed in range(1000)) <= 1e-10


def test_criterion_5_orbifold_spectra():
    t0 = time.perf_counter()
    spec_err, align, trace_err = 0.0, 1.0, 0.0
    for name in KAHLER_MODELS:
        m = CATALOG[name]
        pts = np.vstack([0.5 * (m.lower + m.upper), m.sample_points(stream(0, "acceptance-spec", name), 4)])
        for x in pts:
            inp = WeightedCurvatureInput.soliton_at(m, x)
            mat = weighted_selfdual(inp)
            vals, vecs = ordered_spectrum(mat, kahler=True)
            spec_err = max(spec_err, float(np.abs(vals - kahler_orbifold_spectrum(m.lam, inp.scal)).max()))
            align = min(align, abs(float(vecs[0, 0])))
            trace_err = max(trace_err, abs(float(np.trace(mat)) - (3.0 * m.lam - inp.scal)))
    gauss = weighted_selfdual(WeightedCurvatureInput.soliton_at(CATALOG["gaussian"], np.zeros(4)))
    gauss_ok = np.allclose(np.linalg.eigvalsh(gauss), 1.0, atol=1e-8)
    top = {}
    for n in SHRINKERS:
        inp = WeightedCurvatureInput.soliton_at(CATALOG[n], np.zeros(4))
        top[n] = float(np.linalg.eigvalsh(weighted_selfdual(inp)).max())
    dt = time.perf_counter() - t0
    ok = spec_err <= 1e-8 and align >= 1 - 1e-8 and trace_err <= 1e-12 and gauss_ok and min(top.values()) > 0
    report(5, ok, f"spectrum err {spec_err:.1e}, alignment {align:.12f}, trace err {trace_err:.1e}, "
                  f"min top eigenvalue over {len(SHRINKERS)} shrinkers {min(top.values()):.3f}", dt)
    assert ok


def test_criterion_6_soliton_catalog():
    t0 = time.perf_counter()
    worst = 0.0
    for name, m in CATALOG.items():
        for x in m.sample_points(stream(0, "acceptance-soliton", name), 20):
            res = float(np.linalg.norm(soliton_residual(m, x).entries))
            worst = max(worst, res / max(1.0, abs(m.lam)))
    m = CATALOG["sphere4"]
    fields = random_fields_for(m, "form_rough_hodge", stream(0, "convergence"))
    coarse, fine = fd_convergence(m, "form_rough_hodge", fields, np.array([0.3, -0.2, 0.25, 0.1]))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and coarse / fine >= 3.0
    report(6, ok, f"max residual {worst:.1e} over {len(CATALOG)} models x 20 points, "
                  f"convergence factor {coarse / fine:.2f}", dt)
    assert ok


def test_criterion_7_pointwise_substitutes():
    t0 = time.perf_counter()
    # zeroth-order Kahler operator for lam <= 0 data: catalog steady/expanders and random admissible data
    rng = np.random.default_rng(0)
    data = [(m.lam, point_jet(m, np.zeros(4)).scal) for m in CATALOG.values() if m.lam <= 0]
    for _ in range(500):
        lam = -rng.exponential()
        data.append((lam, 2.0 * lam + rng.exponential()))
    top = max(float(np.linalg.eigvalsh(curvature_action_plus(lam, scal)).max()) for lam, scal in data)
    nonpos_ok = top <= 1e-5

    split_worst, div_worst = 0.0, 0.0
    for name in KAHLER_MODELS:
        m = CATALOG[name]
        om = kahler_form_field(m)
        for k, x in enumerate(m.sample_points(stream(0, "acceptance-kahler", name), 5)):
            rng_k = stream(0, "acceptance-kahler", name, k)
            gamma = random_field(m, rng_k, "form-2", "11")
            h_inv = trace_field(m, lambda y, g=gamma: outer_arr(g(y), om(y)))
            h_anti = trace_field(m, random_field(m, rng_k, "biform", "anti"))
            for h, part in ((h_inv, "invariant"), (h_anti, "anti")):
                wrong, total = lf_splitting_defect(m, h, x, part)
                split_worst = max(split_worst, wrong / total)
            de = div_equivalence(m, gamma, x)
            div_worst = max(div_worst, de.residual / de.scale)
    dt = time.perf_counter() - t0
    ok = nonpos_ok and split_worst <= 1e-5 and div_worst <= 1e-5
    report(7, ok, f"max eigenvalue for lam<=0 {top:.1e}, splitting defect {split_worst:.1e}, "
                  f"div/delta defect {div_worst:.1e}", dt)
    assert ok
