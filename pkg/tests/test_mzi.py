import math

import numpy as np
import pytest

from nlpsg_mzi.detection import DetectorModel
from nlpsg_mzi.fock import FockState, check_normalized
from nlpsg_mzi.linear_optics import unitarity_defect
from nlpsg_mzi.mzi import (ExperimentConfig, InputKind, InputSpec, build_input, build_total_unitary,
                           decompose_probability, fit_cos_form, herald_exact, interference_amplitude_f3,
                           output_state, prefactor, run_once, sweep, visibility)
from nlpsg_mzi.nlpsg import optimize_beta, smatrix

SMALL_GRID = tuple(np.linspace(0, 2 * math.pi, 25))


def clspdc_cfg(xi=1.0, theta=math.pi / 2, **kw):
    spec = InputSpec.from_ratio("clspdc")
    return ExperimentConfig(theta=theta, input1=spec, input4=spec, detectors=DetectorModel.uniform(xi),
                            phi_grid=SMALL_GRID, **kw)


def wcs_cfg(xi=0.85, **kw):
    return ExperimentConfig(detectors=DetectorModel.uniform(xi), phi_grid=SMALL_GRID, **kw)


def test_input_amplitudes():
    w = InputSpec.from_ratio("wcs", 0.1)
    assert w.alpha_sq == pytest.approx(math.sqrt(0.2))
    assert abs(w.amplitudes[2] / w.amplitudes[0]) ** 2 == pytest.approx(0.1)
    c = InputSpec.clspdc(0.5)
    assert c.amplitudes[1] == 0
    assert InputSpec.wcs(0.0).amplitudes == (1, 0, 0)
    with pytest.raises(ValueError):
        InputSpec.custom([1, 1, 0])
    with pytest.raises(ValueError):
        InputSpec.custom([1, 0])


def test_build_input():
    c = InputSpec.from_ratio("clspdc")
    psi = build_input(c, c)
    assert psi.keys() == {(0, 1, 0, 0), (0, 1, 0, 2), (2, 1, 0, 0), (2, 1, 0, 2)}
    check_normalized(psi)
    vac = InputSpec.wcs(0.0)
    assert build_input(vac, vac).keys() == {(0, 1, 0, 0)}


def test_total_unitary_entries():
    cfg = wcs_cfg(theta=0.7)
    u = build_total_unitary(cfg).matrix
    sm = smatrix(optimize_beta("klm").params).matrix
    assert u[1, 1] == pytest.approx(sm[1, 1])
    assert u[1, 3] == 0
    assert u[3, 3] == pytest.approx(math.cos(0.35))
    assert unitarity_defect(u) < 1e-12
    u0 = build_total_unitary(wcs_cfg(theta=0.0)).matrix
    assert np.allclose(u0[:3, :3], sm) and u0[3, 3] == 1


def test_phase_shortcut_equivalence():
    cfg = wcs_cfg(theta=1.1)
    for phi in (0.0, 0.4, 2.9):
        a = output_state(cfg, phi)
        b = output_state(cfg, phi, phase_as_unitary=True)
        assert (a - b).norm_sq() < 1e-24


def test_decomposition_sums_to_probability():
    cfg = wcs_cfg(xi=0.6)
    for phi in (0.0, 1.3, 2.2):
        p, _ = run_once(cfg, phi)
        assert decompose_probability(cfg, phi).total == pytest.approx(p, abs=1e-12)


def test_three_photon_law():
    cfg = clspdc_cfg()
    a0, _, a2 = cfg.input1.amplitudes
    for phi in SMALL_GRID:
        expected = 2 * 0.25 * abs(a0) ** 2 * abs(a2) ** 2 * math.cos(phi) ** 2
        assert decompose_probability(cfg, phi).three_photon == pytest.approx(expected, abs=1e-12)
    assert decompose_probability(cfg, math.pi / 2).three_photon == pytest.approx(0, abs=1e-15)


def test_unit_efficiency_key_filter():
    _, tilde = run_once(clspdc_cfg(), 0.3)
    for key in tilde.keys():
        assert key[0] >= 1 and key[1] >= 1 and key[3] >= 1 and key[2] == 0
    # multi-photon keys survive the click pattern, so the five-photon term is not zero
    assert any(sum(k) == 5 for k in tilde.keys())


def test_clspdc_accidentals():
    res = sweep(clspdc_cfg(xi=0.4))
    assert np.all(res.AC == 0)
    assert np.max(np.abs(res.DC - res.DC[0])) < 1e-12


def test_sweep_invariants():
    res = sweep(wcs_cfg(xi=0.4))
    assert np.max(np.abs(res.P - res.prefactor * res.P_prime)) < 1e-12
    assert np.all(res.P >= 0)
    assert 0 <= res.visibility <= 1
    assert res.fit[2] == pytest.approx(0.25, abs=1e-6)
    assert res.fit_residual < 1e-10
    # even in phi: P(phi) == P(2 pi - phi)
    assert np.allclose(res.P, res.P[::-1], atol=1e-15)


def test_clspdc_unit_efficiency_ratio():
    res = sweep(clspdc_cfg())
    assert res.three_photon[0] / 0.25 == pytest.approx(1.0, abs=1e-12)
    ratio = np.array([decompose_probability(clspdc_cfg(), p).three_photon for p in SMALL_GRID])
    assert np.allclose(ratio / ratio[0], np.cos(SMALL_GRID) ** 2, atol=1e-10)


def test_families_agree():
    a = sweep(wcs_cfg(xi=0.7))
    b = sweep(wcs_cfg(xi=0.7, family="mrr"))
    assert np.max(np.abs(a.P - b.P)) < 1e-10


def test_interference_amplitude_f3():
    assert interference_amplitude_f3(math.pi / 2, 0.4, 3.0) == pytest.approx(math.cos(0.4))
    assert interference_amplitude_f3(math.pi / 4, 0.0) == pytest.approx(math.sqrt(2))


def test_fit_synthetic():
    phi = np.linspace(0, 2 * math.pi, 101)
    (a0, a1, a2), resid = fit_cos_form(phi, 0.078 + 0.003 * np.cos(phi) + 0.25 * np.cos(phi) ** 2)
    assert (a0, a1, a2) == pytest.approx((0.078, 0.003, 0.25), abs=1e-12)
    assert resid < 1e-12
    with pytest.raises(ValueError):
        fit_cos_form([0.0, 2 * math.pi, 0.0], [1, 1, 1])


def test_visibility():
    phi = np.linspace(0, 2 * math.pi, 721)
    assert visibility(0.25 * np.cos(phi) ** 2) == pytest.approx(1.0)
    assert visibility(np.zeros(5)) == 0.0
    assert visibility(0.065 + 0.25 * np.cos(phi) ** 2) == pytest.approx(0.25 / 0.38, abs=1e-9)


def test_prefactor():
    c85 = clspdc_cfg(xi=0.85)
    c40 = clspdc_cfg(xi=0.40)
    p85, exact = prefactor(c85)
    assert exact
    assert p85 == pytest.approx(6.2e-2, rel=0.02)
    assert prefactor(c40)[0] == pytest.approx(6.7e-4, rel=0.02)
    assert p85 / prefactor(c40)[0] == pytest.approx((0.85 / 0.40) ** 6, rel=1e-12)
    custom = InputSpec.custom(c85.input1.amplitudes)
    value, exact = prefactor(c85.with_(input1=custom, input4=custom))
    assert not exact and value == pytest.approx(p85, rel=1e-12)


def test_three_photon_amplitude_matches_prefactor():
    cfg = wcs_cfg(xi=0.85, theta=1.0)
    _, tilde = run_once(cfg, 0.4)
    # the cos(theta) part needs the one-photon branch, hence a coherent input; case (ii): beta f3 times the square root of the prefactor, up to global phase
    expected = math.sqrt(prefactor(cfg)[0]) * 0.5 * interference_amplitude_f3(1.0, 0.4)
    assert abs(tilde[(1, 1, 0, 1)]) == pytest.approx(abs(expected), abs=1e-12)


def test_herald_exact():
    s = FockState(4, {(1, 1, 0, 1): 0.3, (1, 2, 0, 1): 0.4, (0, 1, 0, 2): 0.2j})
    h = herald_exact(s)
    assert h.modes == 2
    assert h[(1, 1)] == pytest.approx(0.3)
    assert h[(0, 2)] == pytest.approx(0.2j)
    assert (1, 2) not in {k for k in h.keys()} and len(h) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(phi_grid=())
    with pytest.raises(ValueError):
        ExperimentConfig(pattern=("C", "C", "NC"))
    with pytest.raises(TypeError):
        ExperimentConfig(family="mrr", gate=optimize_beta("klm").params)
    assert ExperimentConfig().input1.kind is InputKind.WCS
