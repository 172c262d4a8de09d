"""Acceptance criteria 1-12, one test each, each reporting a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from nlpsg_mzi import accidentals as acc
from nlpsg_mzi.detection import DetectorModel
from nlpsg_mzi.fock import fock
from nlpsg_mzi.linear_optics import apply_unitary, bs2, bs_fock_coefficients, unitarity_defect
from nlpsg_mzi.mzi import ExperimentConfig, InputSpec, decompose_probability, default_phi_grid, sweep
from nlpsg_mzi.nlpsg import (Branch, Family, KLMParams, condition_betas, constraint_r1_of_r2,
                             isolated_nlpsg_transform, klm_smatrix, optimize_beta, params_on_curve, smatrix,
                             valid_range)
from nlpsg_mzi.validation import run_suite, table_cell

PUBLISHED_A = {("clspdc", 0.40): (0.065, 0.000), ("clspdc", 0.85): (0.015, 0.006),
               ("wcs", 0.40): (0.188, 0.000), ("wcs", 0.85): (0.078, 0.003)}
PUBLISHED_VISIBILITY = {("clspdc", 0.40): 0.65, ("clspdc", 0.85): 0.89,
                        ("wcs", 0.40): 0.41, ("wcs", 0.85): 0.65}
PUBLISHED_CLSPDC_PREFACTOR = {0.40: 6.7e-4, 0.85: 6.2e-2}
PUBLISHED_WCS_PREFACTOR = {0.40: 4.1e-4, 0.85: 3.8e-2}


def report(n: int, passed: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def cells():
    return {key: table_cell(*key) for key in PUBLISHED_A}


def test_criterion_01_optimization_fixed_points():
    t0 = time.perf_counter()
    klm = optimize_beta(Family.KLM)
    mrr = optimize_beta(Family.MRR, Branch.BOTTOM)
    elapsed = time.perf_counter() - t0
    r1_oracle = constraint_r1_of_r2(Family.MRR, mrr.r2)
    ok = (abs(klm.beta_sq - 0.25) < 1e-8 and abs(mrr.beta_sq - 0.25) < 1e-8
          and abs(klm.r2**2 - 0.171573) < 1e-6 and abs(klm.r1**2 - 0.853553) < 1e-6
          and abs(mrr.r2 - 0.546918) < 1e-6 and abs(mrr.r1 - r1_oracle) < 1e-12 and elapsed < 1.0)
    report(1, ok, f"KLM r2^2={klm.r2**2:.6f} r1^2={klm.r1**2:.6f}; MRR r2={mrr.r2:.6f} r1={mrr.r1:.6f} "
                  f"(r1^2={mrr.r1**2:.6f}, published 0.844778 disagrees); beta^2={klm.beta_sq:.9f}; "
                  f"{elapsed:.2f} s")


def test_criterion_02_condition_curves():
    worst_02 = 0.0
    for fam, branch in ((Family.KLM, Branch.BOTTOM), (Family.MRR, Branch.BOTTOM), (Family.MRR, Branch.TOP)):
        lo, hi = valid_range(fam, branch)
        for r2 in np.linspace(lo, hi, 52)[1:-1]:
            b = condition_betas(smatrix(params_on_curve(fam, float(r2), branch)))
            worst_02 = max(worst_02, b.residual_02)
    worst_opt = 0.0
    for fam in Family:
        b = optimize_beta(fam).betas
        worst_opt = max(worst_opt, b.residual_01, b.residual_12)
    report(2, worst_02 < 1e-10 and worst_opt < 1e-8,
           f"max |b0-b2| on curves {worst_02:.1e}; max |b0-b1|,|b1-b2| at optima {worst_opt:.1e}")


def test_criterion_03_unitarity():
    rng = np.random.default_rng(3)
    klm = max(unitarity_defect(klm_smatrix(KLMParams(*rng.uniform(-1, 1, 3),
                                                     *rng.uniform(0, 2 * math.pi, 6))).matrix)
              for _ in range(1000))
    mrr = 0.0
    for branch in Branch:
        lo, hi = valid_range(Family.MRR, branch)
        for r2 in np.linspace(lo, hi, 200):
            mrr = max(mrr, unitarity_defect(smatrix(params_on_curve(Family.MRR, float(r2), branch)).matrix))
    report(3, klm < 1e-12 and mrr < 1e-10, f"KLM defect {klm:.1e} over 1000 draws; MRR defect {mrr:.1e}")


def closed_form_f(n, m, theta):
    c, s, sn = math.cos(theta / 2), math.sin(theta / 2), math.sin(theta)
    return {(0, 0): (1.0,), (0, 1): (c, -s), (1, 0): (s, c),
            (0, 2): (c * c, -sn / math.sqrt(2), s * s),
            (1, 1): (sn / math.sqrt(2), math.cos(theta), -sn / math.sqrt(2)),
            (2, 0): (s * s, sn / math.sqrt(2), c * c)}[(n, m)]


def test_criterion_04_beam_splitter_coefficients():
    rng = np.random.default_rng(4)
    vs_closed = vs_dense = norm = 0.0
    for theta in rng.uniform(0, 2 * math.pi, 100):
        for (n, m) in ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)):
            f = bs_fock_coefficients(n, m, theta).f
            vs_closed = max(vs_closed, max(abs(a - b) for a, b in zip(f, closed_form_f(n, m, theta))))
        for n in range(5):
            for m in range(5):
                f = bs_fock_coefficients(n, m, theta).f
                out = apply_unitary(bs2(theta), fock(n, m))
                vs_dense = max(vs_dense, max(abs(f[p] - out[(p, n + m - p)]) for p in range(n + m + 1)))
                norm = max(norm, abs(sum(x * x for x in f) - 1))
    report(4, max(vs_closed, vs_dense, norm) < 1e-12,
           f"vs closed forms {vs_closed:.1e}; vs operator substitution {vs_dense:.1e}; norm {norm:.1e}")


def test_criterion_05_accidental_amplitudes_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for i in range(100):
        if i % 2:
            lo, hi = valid_range(Family.MRR)
            params = params_on_curve(Family.MRR, float(rng.uniform(lo + 1e-3, hi - 1e-3)))
        else:
            params = KLMParams(*rng.uniform(-1, 1, 3), *rng.uniform(0, 2 * math.pi, 6))
        theta, phi = rng.uniform(0, 2 * math.pi, 2)
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        b = rng.normal(size=3) + 1j * rng.normal(size=3)
        cv = acc.cross_validate(params, theta, phi, a / np.linalg.norm(a), b / np.linalg.norm(b))
        worst = max(worst, cv.max_abs_deviation)
    spec = InputSpec.from_ratio("wcs").amplitudes
    printed = acc.printed_discrepancies(optimize_beta(Family.KLM).params, math.pi / 2, 0.3, spec, spec)
    itemized = ", ".join("".join(map(str, d.ket)) for d in printed)
    report(5, worst < 1e-10, f"max deviation {worst:.1e} over 100 draws and 12 kets; "
                             f"published-formula discrepancies itemized at kets {itemized}")


def test_criterion_06_three_photon_law():
    spec = InputSpec.from_ratio("clspdc")
    cfg = ExperimentConfig(input1=spec, input4=spec, phi_grid=tuple(default_phi_grid(181)))
    beta_sq = optimize_beta(Family.KLM).beta_sq
    a0, _, a2 = spec.amplitudes
    worst = max(abs(decompose_probability(cfg, phi).three_photon
                    - 2 * beta_sq * abs(a0) ** 2 * abs(a2) ** 2 * math.cos(phi) ** 2) for phi in cfg.phi_grid)
    report(6, worst < 1e-12, f"max |P3 - 2 b^2 |a0|^2 |a2|^2 cos^2| = {worst:.1e} over 181 phases")


def test_criterion_07_fit_coefficients(cells):
    parts, ok = [], True
    for key, cell in cells.items():
        pa0, pa1 = PUBLISHED_A[key]
        good = abs(cell.a0 - pa0) <= 0.01 and abs(cell.a1 - pa1) <= 0.01 and abs(cell.a2 - 0.25) < 1e-6
        ok &= good
        parts.append(f"{key[0]}@{key[1]:.2f} ({cell.a0:.3f}, {cell.a1:.3f}, a2={cell.a2:.6f}) "
                     f"vs ({pa0:.3f}, {pa1:.3f}) {'ok' if good else 'off'}")
    report(7, ok, "; ".join(parts))


def test_criterion_08_prefactors_and_visibilities(cells):
    parts, ok = [], True
    for xi, want in PUBLISHED_CLSPDC_PREFACTOR.items():
        got = cells[("clspdc", xi)].prefactor
        good = abs(got / want - 1) < 0.02
        ok &= good
        parts.append(f"clspdc@{xi:.2f} prefactor {got:.2e} vs {want:.1e} {'ok' if good else 'off'}")
    for key, want in PUBLISHED_VISIBILITY.items():
        got = cells[key].visibility
        good = abs(got - want) <= 0.02
        ok &= good
        parts.append(f"{key[0]}@{key[1]:.2f} V {100 * got:.1f}% vs {100 * want:.0f}% {'ok' if good else 'off'}")
    for kind in ("clspdc", "wcs"):
        ratio = cells[(kind, 0.85)].prefactor / cells[(kind, 0.40)].prefactor
        good = abs(ratio / (0.85 / 0.40) ** 6 - 1) < 0.01
        ok &= good
        parts.append(f"{kind} prefactor ratio {ratio:.2f} {'ok' if good else 'off'}")
    wcs = ", ".join(f"{cells[('wcs', xi)].prefactor:.2e} vs {v:.1e}" for xi, v in PUBLISHED_WCS_PREFACTOR.items())
    parts.append(f"wcs prefactors (soft, documented) {wcs}")
    report(8, ok, "; ".join(parts))


def test_criterion_09_family_equivalence():
    worst = 0.0
    grid = tuple(default_phi_grid(121))
    for kind in ("wcs", "clspdc"):
        spec = InputSpec.from_ratio(kind)
        for xi in (0.40, 0.85, 1.0):
            base = ExperimentConfig(input1=spec, input4=spec, detectors=DetectorModel.uniform(xi), phi_grid=grid)
            mrr = base.with_(family=Family.MRR, gate=optimize_beta(Family.MRR).params)
            worst = max(worst, float(np.max(np.abs(sweep(base).P - sweep(mrr).P))))
    sub = float(np.max(np.abs(smatrix(optimize_beta(Family.KLM).params).matrix[:2, :2]
                              - smatrix(optimize_beta(Family.MRR).params).matrix[:2, :2])))
    report(9, worst < 1e-10 and sub < 1e-9, f"max sweep difference {worst:.1e}; 2x2 block difference {sub:.1e}")


def test_criterion_10_isometry():
    rng = np.random.default_rng(10)
    s = smatrix(optimize_beta(Family.KLM).params)
    worst = 0.0
    for _ in range(20):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        a /= np.linalg.norm(a)
        success, _ = isolated_nlpsg_transform(s, a)
        got = np.array([success[(k, 1, 0)] for k in range(3)])
        want = 0.5 * np.array([a[0], a[1], -a[2]])
        overlap = np.vdot(want, got)
        worst = max(worst, float(np.max(np.abs(got - overlap / abs(overlap) * want))))
    report(10, worst < 1e-10, f"max deviation from (a0, a1, -a2)/2 up to phase {worst:.1e} over 20 inputs")


def test_criterion_11_scaling_laws():
    nbars = np.logspace(-3, -1, 7)
    w = []
    for n in nbars:
        spec = InputSpec.wcs(float(n))
        cfg = ExperimentConfig(input1=spec, input4=spec, detectors=DetectorModel.uniform(0.4), phi_grid=(0.0,))
        d = decompose_probability(cfg, 0.0)
        w.append((d.three_photon, d.four_photon, d.five_photon))
    w = np.array(w)
    s4 = np.polyfit(np.log(nbars), np.log(w[:, 1] / w[:, 0]), 1)[0]
    s5 = np.polyfit(np.log(nbars), np.log(w[:, 2] / w[:, 0]), 1)[0]
    report(11, abs(s4 - 1) < 0.05 and abs(s5 - 2) < 0.1, f"log-log slopes 4-photon {s4:.4f}, 5-photon {s5:.4f}")


def test_criterion_12_validate_runtime():
    t0 = time.perf_counter()
    res = run_suite()
    elapsed = time.perf_counter() - t0
    failed = [c["name"] for c in res["checks"] if c["hard"] and not c["passed"]]
    report(12, elapsed < 60.0, f"validate ran {len(res['checks'])} checks in {elapsed:.1f} s; "
                               f"hard failures: {', '.join(failed) or 'none'}")
