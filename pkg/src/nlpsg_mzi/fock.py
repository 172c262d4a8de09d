"""Sparse multimode Fock states and creation-operator polynomials.

States are stored as a map from occupation tuples ``(n_1, ..., n_M)`` to complex
amplitudes. Only a handful of photons are ever in flight, so a dict keyed by
occupation is exact and much cheaper than a dense rank-M tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

# amplitudes below this magnitude are dropped after arithmetic
PRUNE_TOL = 1e-15
NORM_TOL = 1e-12

Occupation = tuple[int, ...]


def _factorial_sqrt(occ: Occupation) -> float:
    return math.sqrt(math.prod(math.factorial(n) for n in occ))


def _prune(amps: Mapping[Occupation, complex], tol: float = PRUNE_TOL) -> dict[Occupation, complex]:
    return {k: complex(v) for k, v in amps.items() if abs(v) > tol}


@dataclass(frozen=True)
class FockState:
    """Sparse superposition over occupation vectors of ``modes`` bosonic modes.

    ``normalized`` records whether the state is meant to be a physical ket or an
    unnormalized post-measurement (tilde) state. It is a flag, not a guarantee, but
    :func:`check_normalized` enforces it.
    """

    modes: int
    amplitudes: Mapping[Occupation, complex] = field(default_factory=dict)
    normalized: bool = True

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("a Fock state needs at least one mode")
        clean = {}
        for key, amp in self.amplitudes.items():
            key = tuple(int(n) for n in key)
            if len(key) != self.modes:
                raise ValueError(f"occupation {key} does not have {self.modes} modes")
            if any(n < 0 for n in key):
                raise ValueError(f"negative occupation in {key}")
            amp = complex(amp)
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError(f"non-finite amplitude for {key}")
            clean[key] = clean.get(key, 0j) + amp
        object.__setattr__(self, "amplitudes", _prune(clean))

    def __getitem__(self, key: Iterable[int]) -> complex:
        return self.amplitudes.get(tuple(key), 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __iter__(self):
        return iter(self.amplitudes.items())

    def __add__(self, other: "FockState") -> "FockState":
        _check_modes(self, other)
        out = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            out[k] = out.get(k, 0j) + v
        return FockState(self.modes, out, normalized=False)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "FockState":
        return FockState(self.modes, {k: c * v for k, v in self.amplitudes.items()}, normalized=False)

    def keys(self) -> set[Occupation]:
        return set(self.amplitudes)

    def norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.amplitudes.values()))

    def photon_numbers(self) -> set[int]:
        return {sum(k) for k in self.amplitudes}

    def filter(self, predicate) -> "FockState":
        """Keep only the keys for which ``predicate(key)`` is true (unnormalized result)."""
        return FockState(self.modes, {k: v for k, v in self.amplitudes.items() if predicate(k)},
                         normalized=False)

    def to_dense(self, cutoff: int) -> np.ndarray:
        """Dense rank-M array with ``cutoff + 1`` levels per mode (for debugging and tests)."""
        arr = np.zeros((cutoff + 1,) * self.modes, dtype=complex)
        for k, v in self.amplitudes.items():
            if max(k) > cutoff:
                raise ValueError(f"key {k} exceeds dense cutoff {cutoff}")
            arr[k] = v
        return arr


@dataclass(frozen=True)
class CreationPolynomial:
    """Polynomial in creation operators, understood as acting on the vacuum.

    ``terms`` maps per-mode exponent vectors to coefficients, so
    ``{(2, 0): 1/sqrt(2)}`` is ``(a_1^dag)^2 / sqrt(2) |0, 0>``.
    """

    modes: int
    terms: Mapping[Occupation, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, c in self.terms.items():
            key = tuple(int(n) for n in key)
            if len(key) != self.modes or any(n < 0 for n in key):
                raise ValueError(f"bad exponent vector {key}")
            clean[key] = clean.get(key, 0j) + complex(c)
        object.__setattr__(self, "terms", _prune(clean))

    def __add__(self, other: "CreationPolynomial") -> "CreationPolynomial":
        if self.modes != other.modes:
            raise ValueError("mode-count mismatch")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0j) + v
        return CreationPolynomial(self.modes, out)

    def __mul__(self, other: "CreationPolynomial") -> "CreationPolynomial":
        if self.modes != other.modes:
            raise ValueError("mode-count mismatch")
        out: dict[Occupation, complex] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0j) + c1 * c2
        return CreationPolynomial(self.modes, out)

    @classmethod
    def linear(cls, coeffs: Iterable[complex]) -> "CreationPolynomial":
        """``sum_k coeffs[k] a_k^dag``."""
        coeffs = list(coeffs)
        m = len(coeffs)
        return cls(m, {tuple(int(i == k) for i in range(m)): c for k, c in enumerate(coeffs)})

    @classmethod
    def one(cls, modes: int) -> "CreationPolynomial":
        return cls(modes, {(0,) * modes: 1.0})


def vacuum(modes: int) -> FockState:
    if modes < 1:
        raise ValueError("vacuum needs at least one mode")
    return FockState(modes, {(0,) * modes: 1.0})


def fock(*occupation: int) -> FockState:
    """Single number state ``|n_1, ..., n_M>``."""
    return FockState(len(occupation), {tuple(occupation): 1.0})


def polynomial_to_state(p: CreationPolynomial) -> FockState:
    # a_dag^n |0> = sqrt(n!) |n>
    amps = {k: c * _factorial_sqrt(k) for k, c in p.terms.items()}
    return FockState(p.modes, amps, normalized=False)


def state_to_polynomial(s: FockState) -> CreationPolynomial:
    return CreationPolynomial(s.modes, {k: v / _factorial_sqrt(k) for k, v in s.amplitudes.items()})


def _check_modes(a: FockState, b: FockState) -> None:
    if a.modes != b.modes:
        raise ValueError(f"mode-count mismatch: {a.modes} vs {b.modes}")


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_modes(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for k in small.amplitudes:
        if k in large.amplitudes:
            total += np.conj(a.amplitudes[k]) * b.amplitudes[k]
    return complex(total)


def tensor(a: FockState, b: FockState) -> FockState:
    amps = {ka + kb: va * vb for ka, va in a.amplitudes.items() for kb, vb in b.amplitudes.items()}
    return FockState(a.modes + b.modes, amps, normalized=a.normalized and b.normalized)


def truncate(s: FockState, per_mode_max: int, total_max: int) -> FockState:
    """Drop every key with a mode above ``per_mode_max`` or a total above ``total_max``."""
    if per_mode_max < 0 or total_max < 0:
        raise ValueError("truncation limits must be non-negative")
    return s.filter(lambda k: max(k) <= per_mode_max and sum(k) <= total_max)


def normalize(s: FockState) -> FockState:
    n = s.norm_sq()
    if n == 0.0:
        raise ValueError("cannot normalize the zero state")
    return FockState(s.modes, {k: v / math.sqrt(n) for k, v in s.amplitudes.items()}, normalized=True)


def check_normalized(s: FockState, tol: float = NORM_TOL) -> None:
    if abs(s.norm_sq() - 1.0) >= tol:
        raise ValueError(f"state norm^2 = {s.norm_sq():.15g} is not 1")


def single_mode(amplitudes: Iterable[complex], normalized: bool = True) -> FockState:
    """``sum_k amplitudes[k] |k>`` on one mode."""
    return FockState(1, {(k,): a for k, a in enumerate(amplitudes)}, normalized=normalized)
