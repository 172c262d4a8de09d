"""Three-mode nonlinear phase-shift gate: KLM and microring constructions.

Both families are parameterized by real reflection coefficients. The KLM matrix is
built by multiplying the three beam-splitter blocks; the microring matrix uses its
on-resonance closed form. Along each family's constraint curve ``r1 = r3 = r1(r2)``
the zero- and two-photon success amplitudes agree, and the optimum is where the
one-photon amplitude joins them at 1/2.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .fock import CreationPolynomial, FockState, check_normalized, polynomial_to_state
from .linear_optics import ModeUnitary, apply_unitary

SQRT2 = math.sqrt(2.0)
INV_SQRT3 = 1.0 / math.sqrt(3.0)
CONDITION_TOL = 1e-10


class Family(str, enum.Enum):
    KLM = "klm"
    MRR = "mrr"


class Branch(str, enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class KLMParams:
    r1: float
    r2: float
    r3: float
    phi1: float = 0.0
    phi2: float = 0.0
    phi3: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    delta3: float = 0.0

    def __post_init__(self):
        for name in ("r1", "r2", "r3"):
            if abs(getattr(self, name)) > 1.0:
                raise ValueError(f"|{name}| must be <= 1")

    @classmethod
    def on_curve(cls, r2: float) -> "KLMParams":
        r1 = constraint_r1_of_r2(Family.KLM, r2)
        return cls(r1, r2, r1)


@dataclass(frozen=True)
class MRRParams:
    """Microring gate in fictitious-reflection form (``r3 = r1``)."""

    r1: float
    r2: float
    branch: Branch = Branch.BOTTOM

    def __post_init__(self):
        if abs(self.r1) > 1.0 or abs(self.r2) > 1.0:
            raise ValueError("|r1|, |r2| must be <= 1")
        object.__setattr__(self, "branch", Branch(self.branch))

    @classmethod
    def on_curve(cls, r2: float, branch: Branch | str = Branch.BOTTOM) -> "MRRParams":
        branch = Branch(branch)
        return cls(constraint_r1_of_r2(Family.MRR, r2, branch), r2, branch)


@dataclass(frozen=True)
class ConditionBetas:
    beta0: complex
    beta1: complex
    beta2: complex

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.beta0, self.beta1, self.beta2)

    @property
    def residual_02(self) -> float:
        return abs(self.beta0 - self.beta2)

    @property
    def residual_01(self) -> float:
        return abs(self.beta0 - self.beta1)

    @property
    def residual_12(self) -> float:
        return abs(self.beta1 - self.beta2)


@dataclass(frozen=True)
class ManifoldPoint:
    r_star: float
    tau: float
    eta: float


def klm_bs_block(i: int, params: KLMParams) -> np.ndarray:
    """2x2 real-form beam splitter ``M_i`` (determinant -1)."""
    if i not in (1, 2, 3):
        raise ValueError("block index must be 1, 2 or 3")
    r = (params.r1, params.r2, params.r3)[i - 1]
    phi = (params.phi1, params.phi2, params.phi3)[i - 1]
    t = math.sqrt(1.0 - r * r)
    if i == 2:
        return np.array([[-r * cmath.exp(-1j * phi), t], [t, r * cmath.exp(1j * phi)]])
    return np.array([[r * cmath.exp(1j * phi), t], [t, -r * cmath.exp(-1j * phi)]])


def klm_smatrix(params: KLMParams) -> ModeUnitary:
    """``S = B3 B2 B1``; B1 and B3 mix modes (2, 3), B2 mixes modes (1, 2)."""
    b1 = np.eye(3, dtype=complex)
    b1[0, 0] = cmath.exp(1j * params.delta1)
    b1[1:, 1:] = klm_bs_block(1, params)
    b2 = np.eye(3, dtype=complex)
    b2[:2, :2] = klm_bs_block(2, params)
    b2[2, 2] = cmath.exp(1j * params.delta2)
    b3 = np.eye(3, dtype=complex)
    b3[0, 0] = cmath.exp(1j * params.delta3)
    b3[1:, 1:] = klm_bs_block(3, params)
    return ModeUnitary(b3 @ b2 @ b1)


def klm_smatrix_closed_form(r2: float, printed: bool = False) -> np.ndarray:
    """Closed form of the KLM matrix on its constraint curve, zero phases.

    The block product gives ``S33`` the numerator ``1 + r2 + 3 r2^2 + 3 r2^3``;
    ``printed=True`` uses ``1 + r2 + r2^2 + 3 r2^3`` instead, as published.
    """
    den_a = math.sqrt(1 + r2 + r2**2 - 3 * r2**3)
    den_b = 1 + 2 * r2 + 3 * r2**2
    g = math.sqrt(1 - r2**2) * math.sqrt(r2 - 3 * r2**3)
    h = math.sqrt(1 + r2**2) * math.sqrt(r2 - 3 * r2**3)
    s12 = math.sqrt(1 - r2**4) / den_a
    return np.array([
        [-r2, s12, g / den_a],
        [s12, 2 * r2 * (1 + r2) / den_b, -h / den_b],
        [g / den_a, -h / den_b, (1 + r2 + (1 if printed else 3) * r2**2 + 3 * r2**3) / den_b],
    ])


def mrr_smatrix(params: MRRParams) -> ModeUnitary:
    r1, r2 = params.r1, params.r2
    denom = 1.0 - (1.0 - r1**2) * r2
    if abs(denom) < 1e-12:
        raise ValueError("microring matrix has a pole at (1 - r1^2) r2 = 1")
    a = math.sqrt(1.0 - r1**2)
    b = math.sqrt(1.0 - r2**2)
    m = np.array([
        [a * a - r2, r1 * b, -r1 * a * b],
        [r1 * b, r1 * r1 * r2, a * (1 - r2)],
        [-r1 * a * b, a * (1 - r2), r1 * r1],
    ])
    return ModeUnitary(m / denom)


def smatrix(params: KLMParams | MRRParams) -> ModeUnitary:
    if isinstance(params, KLMParams):
        return klm_smatrix(params)
    return mrr_smatrix(params)


def condition_betas(s: ModeUnitary | np.ndarray) -> ConditionBetas:
    m = s.matrix if isinstance(s, ModeUnitary) else np.asarray(s)
    if m.shape != (3, 3):
        raise ValueError("condition amplitudes need a 3x3 S-matrix")
    s11, s12, s21, s22 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return ConditionBetas(
        complex(s22),
        complex(s11 * s22 + s21 * s12),
        complex(-s11 * (s11 * s22 + 2 * s21 * s12)),
    )


def valid_range(family: Family | str, branch: Branch | str = Branch.BOTTOM) -> tuple[float, float]:
    """Interval of ``r2`` on which the constraint curve is physical (``r1^2 <= 1``)."""
    family = Family(family)
    if family is Family.KLM:
        return (0.0, INV_SQRT3)
    if Branch(branch) is Branch.TOP:
        return (-INV_SQRT3, -0.5)
    return (0.0, INV_SQRT3)


def _mrr_sign(branch: Branch) -> float:
    # same sign in both closed forms: + on the negative-r2 region, - on the positive one
    return 1.0 if branch is Branch.TOP else -1.0


def constraint_r1_of_r2(family: Family | str, r2: float, branch: Branch | str = Branch.BOTTOM) -> float:
    """``r1 = r3`` making the zero- and two-photon amplitudes equal."""
    family, branch = Family(family), Branch(branch)
    lo, hi = valid_range(family, branch)
    if not (lo - 1e-12 <= r2 <= hi + 1e-12):
        raise ValueError(f"r2 = {r2} outside the physical range [{lo:.6f}, {hi:.6f}]")
    if family is Family.KLM:
        r1_sq = (1 + r2**2) / ((1 - r2) * (1 + 2 * r2 + 3 * r2**2))
    else:
        root = math.sqrt(max(0.0, 1 - 3 * r2**2))
        a, b = 1 + 2 * r2 - r2**2, (1 + r2) * root
        if branch is Branch.BOTTOM:
            # a - b rationalized; the direct difference cancels badly as r2 -> 0
            r1_sq = 2 * (1 - r2) * (1 + 2 * r2 + r2**2 + 2 * r2**3) / ((1 + r2**2) * (a + b))
        else:
            r1_sq = (1 - r2) / (r2 * (1 + r2**2)) * (a + b)
    if r1_sq < 0 or r1_sq > 1 + 1e-12:
        raise ValueError(f"r2 = {r2} gives unphysical r1^2 = {r1_sq}")
    r1 = math.sqrt(min(r1_sq, 1.0))
    params = KLMParams(r1, r2, r1) if family is Family.KLM else MRRParams(r1, r2, branch)
    if condition_betas(smatrix(params)).residual_02 > CONDITION_TOL:
        raise ArithmeticError(f"constraint r1({r2}) = {r1} does not balance beta0 and beta2")
    return r1


def params_on_curve(family: Family | str, r2: float, branch: Branch | str = Branch.BOTTOM):
    if Family(family) is Family.KLM:
        return KLMParams.on_curve(r2)
    return MRRParams.on_curve(r2, branch)


def beta_of_r2(family: Family | str, r2: float, branch: Branch | str = Branch.BOTTOM) -> float:
    """Zero-photon success amplitude along the constraint curve, from the matrix itself."""
    return condition_betas(smatrix(params_on_curve(family, r2, branch))).beta0.real


def beta_closed_form(family: Family | str, r2: float, branch: Branch | str = Branch.BOTTOM,
                     printed: bool = False) -> float:
    """Closed-form ``beta(r2)``.

    ``printed=True`` reproduces the KLM expression with the ``3 r2^3`` denominator as
    it appears in print, for discrepancy reports only.
    """
    family, branch = Family(family), Branch(branch)
    if family is Family.KLM:
        tail = 3 * r2**3 if printed else 3 * r2**2
        return 2 * r2 * (1 + r2) / (1 + 2 * r2 + tail)
    s = _mrr_sign(branch)
    root = math.sqrt(max(0.0, 1 - 3 * r2**2))
    return (1 / (2 + s * root)) * ((1 + 2 * r2 - r2**2) / (1 + r2) + s * root)


@dataclass(frozen=True)
class Optimum:
    family: Family
    branch: Branch
    r2: float
    r1: float
    betas: ConditionBetas
    all_conditions: bool

    @property
    def beta(self) -> float:
        return self.betas.beta0.real

    @property
    def beta_sq(self) -> float:
        return abs(self.betas.beta0) ** 2

    @property
    def params(self) -> KLMParams | MRRParams:
        if self.family is Family.KLM:
            return KLMParams(self.r1, self.r2, self.r1)
        return MRRParams(self.r1, self.r2, self.branch)


def _worst_amplitude(family, r2, branch) -> float:
    b = condition_betas(smatrix(params_on_curve(family, r2, branch)))
    return min(abs(b.beta0), abs(b.beta1), abs(b.beta2))


def optimize_beta(family: Family | str, branch: Branch | str = Branch.BOTTOM,
                  xtol: float = 1e-12) -> Optimum:
    """Best operating point on a family's constraint curve.

    Maximizing the zero-photon amplitude alone just runs to the ``r1 = 1`` end of the
    curve, where the one-photon amplitude no longer matches. The objective is therefore
    the smallest of the three amplitude magnitudes, which is unimodal along the curve
    and peaks where all three coincide. The bounded search is polished with a root
    solve on ``|beta0| - |beta1|`` when that crossing is inside the interval.
    """
    family, branch = Family(family), Branch(branch)
    lo, hi = valid_range(family, branch)
    eps = 1e-9
    lo_in, hi_in = lo + eps, hi - eps
    res = minimize_scalar(lambda x: -_worst_amplitude(family, x, branch),
                          bounds=(lo_in, hi_in), method="bounded",
                          options={"xatol": xtol, "maxiter": 500})
    if not res.success:
        raise OptimizationError(f"bounded search failed: {res.message}")
    r2 = float(res.x)

    def crossing(x):
        b = condition_betas(smatrix(params_on_curve(family, x, branch)))
        return abs(b.beta0) - abs(b.beta1)

    a, b = max(lo_in, r2 - 1e-6), min(hi_in, r2 + 1e-6)
    if crossing(a) * crossing(b) < 0:
        r2 = brentq(crossing, a, b, xtol=1e-16, rtol=4 * np.finfo(float).eps)

    params = params_on_curve(family, r2, branch)
    betas = condition_betas(smatrix(params))
    ok = max(betas.residual_01, betas.residual_02, betas.residual_12) < 1e-8
    return Optimum(family, branch, r2, params.r1, betas, ok)


def eta_manifold(r_star: float, tau: float) -> ManifoldPoint:
    """Physical upper transmission of a ring for a fixed fictitious reflection."""
    if abs(r_star) > 1 or abs(tau) > 1:
        raise ValueError("need |r_star| <= 1 and |tau| <= 1")
    den = 1 + r_star * tau
    if abs(den) < 1e-15:
        raise ValueError("manifold map has a pole at r_star * tau = -1")
    return ManifoldPoint(r_star, tau, (r_star + tau) / den)


def isolated_nlpsg_transform(s: ModeUnitary, alphas) -> tuple[FockState, FockState]:
    """Send ``(a0 + a1 x + a2 x^2 / sqrt 2) a_2^dag |000>`` through ``s``.

    Returns the part in ``span{|k, 1, 0>, k = 0, 1, 2}`` and its orthogonal complement.
    """
    a0, a1, a2 = (complex(a) for a in alphas)
    if abs(abs(a0) ** 2 + abs(a1) ** 2 + abs(a2) ** 2 - 1) > 1e-12:
        raise ValueError("alphas must be normalized")
    poly = CreationPolynomial(3, {(0, 1, 0): a0, (1, 1, 0): a1, (2, 1, 0): a2 / SQRT2})
    psi_in = polynomial_to_state(poly)
    check_normalized(psi_in)
    out = apply_unitary(s, FockState(3, psi_in.amplitudes, normalized=True))
    success = {(0, 1, 0), (1, 1, 0), (2, 1, 0)}
    return out.filter(lambda k: k in success), out.filter(lambda k: k not in success)
