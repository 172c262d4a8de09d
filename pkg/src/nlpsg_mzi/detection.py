"""Click/no-click (bucket) detection with finite efficiency.

A detector of efficiency ``xi`` misses all ``n`` photons with weight ``q_n = (1 - xi)^n``
and clicks with ``p_n = 1 - q_n``. Multi-mode coincidence elements are products of
single-mode weights. By default the outcome probability is the squared norm of the
weighted state, ``sum_n w_n^2 |c_n|^2``; ``convention="linear"`` gives the textbook
``sum_n w_n |c_n|^2`` for comparison.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .fock import FockState, Occupation

SQUARED = "squared"
LINEAR = "linear"
CONVENTIONS = (SQUARED, LINEAR)


class Outcome(str, enum.Enum):
    CLICK = "C"
    NO_CLICK = "NC"
    ANY = "U"


C, NC, U = Outcome.CLICK, Outcome.NO_CLICK, Outcome.ANY

# mode 1 and 4 click, success mode 2 clicks, mode 3 stays dark
COINCIDENCE_PATTERN = (C, C, NC, C)


@dataclass(frozen=True)
class DetectorModel:
    xi: tuple[float, ...]

    def __post_init__(self):
        xi = tuple(float(x) for x in self.xi)
        for x in xi:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"efficiency {x} outside [0, 1]")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def uniform(cls, xi: float, modes: int = 4) -> "DetectorModel":
        return cls((xi,) * modes)

    @property
    def modes(self) -> int:
        return len(self.xi)


@dataclass(frozen=True)
class PovmWeights:
    xi: float
    q: tuple[float, ...]
    p: tuple[float, ...]


def weights(xi: float, n_max: int) -> PovmWeights:
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"efficiency {xi} outside [0, 1]")
    q = tuple((1.0 - xi) ** n for n in range(n_max + 1))
    return PovmWeights(xi, q, tuple(1.0 - x for x in q))


def parse_pattern(pattern: Sequence[Outcome | str]) -> tuple[Outcome, ...]:
    return tuple(Outcome(o) for o in pattern)


def single_weight(outcome: Outcome, n: int, xi: float) -> float:
    if outcome is Outcome.ANY:
        return 1.0
    q = (1.0 - xi) ** n
    return 1.0 - q if outcome is Outcome.CLICK else q


def pattern_weight(pattern: Sequence[Outcome], occ: Occupation, det: DetectorModel) -> float:
    pattern = parse_pattern(pattern)
    if not (len(pattern) == len(occ) == det.modes):
        raise ValueError("pattern, occupation and detector lengths differ")
    return math.prod(single_weight(o, n, x) for o, n, x in zip(pattern, occ, det.xi))


def project(state: FockState, pattern: Sequence[Outcome], det: DetectorModel,
            convention: str = SQUARED) -> FockState:
    """Unnormalized post-measurement state; its squared norm is the outcome probability."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    pattern = parse_pattern(pattern)
    out = {}
    for key, amp in state.amplitudes.items():
        w = pattern_weight(pattern, key, det)
        out[key] = amp * (w if convention == SQUARED else math.sqrt(w))
    return FockState(state.modes, out, normalized=False)


def outcome_probability(state: FockState, pattern: Sequence[Outcome], det: DetectorModel,
                        convention: str = SQUARED) -> float:
    return project(state, pattern, det, convention).norm_sq()


def single_mode_probabilities(state: FockState, xi: float) -> tuple[float, float]:
    """``(P_NC, P_C)`` for one mode, both with squared weights.

    Their sum is generally below one; callers can report ``1 - P_NC - P_C`` as the
    normalization defect of the squared-weight convention.
    """
    if state.modes != 1:
        raise ValueError("single-mode state expected")
    det = DetectorModel((xi,))
    return (outcome_probability(state, (NC,), det), outcome_probability(state, (C,), det))
