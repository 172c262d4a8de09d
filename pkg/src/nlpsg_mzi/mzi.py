"""Mach-Zehnder test of the gate: NLPSG on modes 1-3, phase on mode 4, final BS on 1/4.

Modes are 0-based internally: 0 is the gate's primary mode, 1 and 2 its ancillas
(heralded as ``|1, 0>``), 3 the reference arm carrying the phase shifter.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .detection import COINCIDENCE_PATTERN, SQUARED, DetectorModel, Outcome, parse_pattern, project
from .fock import FockState, tensor, truncate
from .linear_optics import ModeUnitary, apply_unitary, bs2, compose, embed, embed_block, phase_shifter
from .nlpsg import Branch, Family, KLMParams, MRRParams, optimize_beta, smatrix

PHOTON_MODE, SUCCESS_MODE, DARK_MODE, REFERENCE_MODE = 0, 1, 2, 3
DEFAULT_PHI_POINTS = 721
DEFAULT_ALPHA_RATIO_SQ = 0.1


class InputKind(str, enum.Enum):
    WCS = "wcs"
    CLSPDC = "clspdc"
    CUSTOM = "custom"


@dataclass(frozen=True)
class InputSpec:
    """Single-mode input ``a0|0> + a1|1> + a2|2>`` truncated at two photons.

    For the weak coherent and SPDC kinds ``alpha_sq`` is the coherent parameter
    ``alpha^2``, which stands in for the mean photon number.
    """

    kind: InputKind
    amplitudes: tuple[complex, complex, complex]
    alpha_sq: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", InputKind(self.kind))
        amps = tuple(complex(a) for a in self.amplitudes)
        if len(amps) != 3:
            raise ValueError("inputs carry exactly three amplitudes (0, 1, 2 photons)")
        if abs(sum(abs(a) ** 2 for a in amps) - 1.0) > 1e-12:
            raise ValueError("input amplitudes must be normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def wcs(cls, alpha_sq: float) -> "InputSpec":
        norm = math.sqrt(1 + alpha_sq + alpha_sq**2 / 2)
        return cls(InputKind.WCS, (1 / norm, math.sqrt(alpha_sq) / norm, alpha_sq / math.sqrt(2) / norm),
                   alpha_sq)

    @classmethod
    def clspdc(cls, alpha_sq: float) -> "InputSpec":
        norm = math.sqrt(1 + alpha_sq**2 / 2)
        return cls(InputKind.CLSPDC, (1 / norm, 0.0, alpha_sq / math.sqrt(2) / norm), alpha_sq)

    @classmethod
    def custom(cls, amplitudes: Sequence[complex]) -> "InputSpec":
        return cls(InputKind.CUSTOM, tuple(amplitudes))

    @classmethod
    def from_ratio(cls, kind: InputKind | str, ratio_sq: float = DEFAULT_ALPHA_RATIO_SQ) -> "InputSpec":
        """Input with ``|a2 / a0|^2 = ratio_sq``, i.e. ``alpha^4 / 2 = ratio_sq``."""
        alpha_sq = math.sqrt(2 * ratio_sq)
        return cls.wcs(alpha_sq) if InputKind(kind) is InputKind.WCS else cls.clspdc(alpha_sq)

    @property
    def mean_n(self) -> float | None:
        return self.alpha_sq

    def phased(self, phi: float) -> "InputSpec":
        """Amplitudes after ``exp(i phi n)``: ``a_k -> a_k e^{i k phi}``."""
        amps = tuple(a * cmath.exp(1j * k * phi) for k, a in enumerate(self.amplitudes))
        return InputSpec(InputKind.CUSTOM, amps, self.alpha_sq)

    def state(self) -> FockState:
        return FockState(1, {(k,): a for k, a in enumerate(self.amplitudes)}, normalized=True)


def default_phi_grid(points: int = DEFAULT_PHI_POINTS) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, points)


@dataclass(frozen=True)
class ExperimentConfig:
    family: Family = Family.KLM
    gate: KLMParams | MRRParams | None = None
    theta: float = math.pi / 2
    input1: InputSpec = field(default_factory=lambda: InputSpec.from_ratio(InputKind.WCS))
    input4: InputSpec = field(default_factory=lambda: InputSpec.from_ratio(InputKind.WCS))
    detectors: DetectorModel = field(default_factory=lambda: DetectorModel.uniform(1.0))
    pattern: tuple[Outcome, ...] = COINCIDENCE_PATTERN
    phi_grid: tuple[float, ...] = tuple(default_phi_grid())
    per_mode_max: int = 2
    total_max: int = 5
    convention: str = SQUARED
    branch: Branch = Branch.BOTTOM

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "branch", Branch(self.branch))
        object.__setattr__(self, "pattern", parse_pattern(self.pattern))
        object.__setattr__(self, "phi_grid", tuple(float(p) for p in self.phi_grid))
        if len(self.pattern) != 4 or self.detectors.modes != 4:
            raise ValueError("the interferometer has exactly four modes")
        if not self.phi_grid:
            raise ValueError("phi grid is empty")
        if self.gate is None:
            opt = optimize_beta(self.family, self.branch)
            object.__setattr__(self, "gate", opt.params)
        expected = KLMParams if self.family is Family.KLM else MRRParams
        if not isinstance(self.gate, expected):
            raise TypeError(f"{self.family.value} family needs {expected.__name__}")

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


@dataclass
class Decomposition:
    """Projected probability split by total photon number (absolute, not scaled)."""

    three_photon: float
    four_photon: float
    five_photon: float
    other: float = 0.0

    @property
    def total(self) -> float:
        return self.three_photon + self.four_photon + self.five_photon + self.other


@dataclass
class SweepResult:
    phi: np.ndarray
    P: np.ndarray
    P_prime: np.ndarray
    prefactor: float
    three_photon: np.ndarray
    AC: np.ndarray
    DC: np.ndarray
    fit: tuple[float, float, float]
    fit_residual: float
    visibility: float
    mean_n: float

    def rows(self):
        for i in range(len(self.phi)):
            yield (self.phi[i], self.P[i], self.P_prime[i], self.three_photon[i], self.AC[i], self.DC[i])


def gate_matrix(cfg: ExperimentConfig) -> ModeUnitary:
    return smatrix(cfg.gate)


def final_beam_splitter(theta: float) -> ModeUnitary:
    """Final BS in four-mode form: ``a4^dag -> cos(theta/2) a4^dag + sin(theta/2) a1^dag``."""
    # block row/column 0 on the reference mode, 1 on the photon mode
    return embed(bs2(theta), (REFERENCE_MODE, PHOTON_MODE), 4)


def build_total_unitary(cfg: ExperimentConfig) -> ModeUnitary:
    s4 = embed_block(gate_matrix(cfg).matrix, 0, 4)
    return compose(final_beam_splitter(cfg.theta), s4)


def build_input(spec1: InputSpec, spec4: InputSpec) -> FockState:
    ancilla = FockState(2, {(1, 0): 1.0})
    return tensor(tensor(spec1.state(), ancilla), spec4.state())


def output_state(cfg: ExperimentConfig, phi: float, phase_as_unitary: bool = False) -> FockState:
    """State after the final BS, before detection (no truncation)."""
    u = build_total_unitary(cfg)
    if phase_as_unitary:
        psi0 = build_input(cfg.input1, cfg.input4)
        u = compose(u, phase_shifter(phi, REFERENCE_MODE, 4))
    else:
        psi0 = build_input(cfg.input1, cfg.input4.phased(phi))
    return apply_unitary(u, psi0)


def run_once(cfg: ExperimentConfig, phi: float, phase_as_unitary: bool = False) -> tuple[float, FockState]:
    psi2 = truncate(output_state(cfg, phi, phase_as_unitary), cfg.per_mode_max, cfg.total_max)
    tilde = project(psi2, cfg.pattern, cfg.detectors, cfg.convention)
    return tilde.norm_sq(), tilde


def decompose_probability(cfg: ExperimentConfig, phi: float) -> Decomposition:
    _, tilde = run_once(cfg, phi)
    parts = {3: 0.0, 4: 0.0, 5: 0.0}
    other = 0.0
    for key, amp in tilde.amplitudes.items():
        n = sum(key)
        if n in parts:
            parts[n] += abs(amp) ** 2
        else:
            other += abs(amp) ** 2
    return Decomposition(parts[3], parts[4], parts[5], other)


def herald_exact(state: FockState, ancilla: tuple[int, int] = (1, 0),
                 ancilla_modes: tuple[int, int] = (SUCCESS_MODE, DARK_MODE)) -> FockState:
    """Partial inner product with ``<ancilla|`` on the ancilla modes (ideal heralding)."""
    keep = [i for i in range(state.modes) if i not in ancilla_modes]
    out = {}
    for key, amp in state.amplitudes.items():
        if tuple(key[i] for i in ancilla_modes) == tuple(ancilla):
            k = tuple(key[i] for i in keep)
            out[k] = out.get(k, 0j) + amp
    return FockState(len(keep), out, normalized=False)


def interference_amplitude_f3(theta: float, phi: float, beta1_over_beta: float = 1.0) -> float:
    return math.sin(theta) * math.cos(phi) + beta1_over_beta * math.cos(theta)


def prefactor(cfg: ExperimentConfig) -> tuple[float, bool]:
    """Overall scale of the coincidence probability and whether it came from the closed form.

    Equal weak-coherent or SPDC inputs use ``xi1^2 xi2^2 xi4^2 nbar^2 / norm^2``. Any
    other input falls back to ``xi1^2 xi2^2 xi4^2 |a0 a2' + a2 a0'|^2 / 2``, which is the
    same quantity whenever the closed form applies; the second return value is then
    ``False``.
    """
    x1, x2, _, x4 = cfg.detectors.xi
    eff = (x1 * x2 * x4) ** 2
    s1, s4 = cfg.input1, cfg.input4
    if s1 == s4 and s1.kind in (InputKind.WCS, InputKind.CLSPDC):
        n = s1.alpha_sq
        norm = 1 + n + n**2 / 2 if s1.kind is InputKind.WCS else 1 + n**2 / 2
        return eff * n**2 / norm**2, True
    a, b = s1.amplitudes, s4.amplitudes
    return eff * abs(a[0] * b[2] + a[2] * b[0]) ** 2 / 2, False


def fit_cos_form(phi: Sequence[float], values: Sequence[float]) -> tuple[tuple[float, float, float], float]:
    """Least-squares ``values ~ a0 + a1 cos(phi) + a2 cos(phi)^2``; returns coefficients and max residual."""
    phi = np.asarray(phi, dtype=float)
    values = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.cos(phi) ** 2])
    if np.linalg.matrix_rank(design) < 3:
        raise ValueError("phase grid cannot resolve 1, cos(phi), cos(phi)^2")
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = values - design @ coef
    return (float(coef[0]), float(coef[1]), float(coef[2])), float(np.max(np.abs(resid)))


def visibility(values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    hi, lo = float(values.max()), float(values.min())
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def sweep(cfg: ExperimentConfig) -> SweepResult:
    phi = np.asarray(cfg.phi_grid)
    pref, _ = prefactor(cfg)
    nbar = cfg.input1.alpha_sq if cfg.input1.alpha_sq is not None else float("nan")
    P = np.empty(len(phi))
    p3 = np.empty(len(phi))
    p4 = np.empty(len(phi))
    p5 = np.empty(len(phi))
    for i, ph in enumerate(phi):
        d = decompose_probability(cfg, float(ph))
        P[i] = d.total
        p3[i], p4[i], p5[i] = d.three_photon, d.four_photon, d.five_photon
    if pref > 0:
        P_prime = P / pref
        three = p3 / pref
        ac = p4 / (pref * nbar) if nbar > 0 else np.zeros_like(P)
        dc = p5 / (pref * nbar**2) if nbar > 0 else np.zeros_like(P)
    else:
        P_prime = three = ac = dc = np.zeros_like(P)
    if len(set(np.round(np.cos(phi), 12))) >= 3:
        fit, resid = fit_cos_form(phi, P_prime)
    else:
        fit, resid = (float("nan"),) * 3, float("nan")
    return SweepResult(phi, P, P_prime, pref, three, ac, dc, fit, resid, visibility(P_prime), nbar)
