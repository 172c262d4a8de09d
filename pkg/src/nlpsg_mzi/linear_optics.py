"""Passive linear-optical networks acting on Fock states.

A mode unitary ``U`` acts on creation operators as ``a_i^dag -> sum_k a_k^dag U[k, i]``,
so column ``i`` lists where a photon entering mode ``i`` is routed. Applying it to
a Fock state means substituting that linear form into the creation polynomial and
expanding, which is exact at any photon number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .fock import CreationPolynomial, FockState, polynomial_to_state, state_to_polynomial

UNITARY_TOL = 1e-10


class ModeUnitary:
    """Dense ``M x M`` unitary on mode operators, checked on construction."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, tol: float = UNITARY_TOL):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mode unitary must be square, got shape {m.shape}")
        defect = unitarity_defect(m)
        if defect >= tol:
            raise ValueError(f"matrix is not unitary: max|U^dag U - I| = {defect:.3e}")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, idx):
        return self.matrix[idx]

    def __matmul__(self, other: "ModeUnitary") -> "ModeUnitary":
        return compose(self, other)

    @property
    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T)

    def __repr__(self) -> str:
        return f"ModeUnitary({np.array2string(self.matrix, precision=6)})"


def unitarity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def identity(dim: int) -> ModeUnitary:
    return ModeUnitary(np.eye(dim))


def bs2(theta: float) -> ModeUnitary:
    """Two-mode beam splitter; ``theta = pi/2`` is 50:50.

    Input mode ``a`` transmits with ``cos(theta/2)`` and reflects into ``b`` with
    ``sin(theta/2)``; mode ``b`` picks up the ``-1`` on reflection.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return ModeUnitary([[c, -s], [s, c]])


def embed(two_mode: ModeUnitary, modes: tuple[int, int], dim: int) -> ModeUnitary:
    """Place a 2x2 block on modes ``(i, j)`` (0-based) of a ``dim``-mode identity.

    Row/column 0 of the block lands on mode ``i``, row/column 1 on mode ``j``.
    """
    i, j = modes
    if i == j:
        raise ValueError("embedding modes must differ")
    if not (0 <= i < dim and 0 <= j < dim):
        raise IndexError(f"modes {modes} out of range for {dim} modes")
    if two_mode.dim != 2:
        raise ValueError("embed expects a two-mode unitary")
    m = np.eye(dim, dtype=complex)
    idx = (i, j)
    for a in range(2):
        for b in range(2):
            m[idx[a], idx[b]] = two_mode.matrix[a, b]
    return ModeUnitary(m)


def embed_block(block, offset: int, dim: int) -> ModeUnitary:
    """Place a square block on consecutive modes ``offset .. offset + k - 1``."""
    block = np.asarray(block, dtype=complex)
    k = block.shape[0]
    if offset < 0 or offset + k > dim:
        raise IndexError("block does not fit")
    m = np.eye(dim, dtype=complex)
    m[offset:offset + k, offset:offset + k] = block
    return ModeUnitary(m)


def phase_shifter(phi: float, mode: int, dim: int) -> ModeUnitary:
    if not 0 <= mode < dim:
        raise IndexError(f"mode {mode} out of range for {dim} modes")
    d = np.ones(dim, dtype=complex)
    d[mode] = np.exp(1j * phi)
    return ModeUnitary(np.diag(d))


def compose(*unitaries: ModeUnitary) -> ModeUnitary:
    """Matrix product ``U_1 U_2 ... U_n`` (the rightmost acts first)."""
    dims = {u.dim for u in unitaries}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return ModeUnitary(reduce(np.matmul, (u.matrix for u in unitaries)))


def apply_unitary(u: ModeUnitary, state: FockState) -> FockState:
    """Evolve ``state`` exactly under ``u`` by creation-operator substitution."""
    if u.dim != state.modes:
        raise ValueError(f"unitary acts on {u.dim} modes, state has {state.modes}")
    m = u.dim
    images = [CreationPolynomial.linear(u.matrix[:, i]) for i in range(m)]
    poly = state_to_polynomial(state)
    cache: dict[tuple[int, int], CreationPolynomial] = {}

    def power(i: int, n: int) -> CreationPolynomial:
        if n == 0:
            return CreationPolynomial.one(m)
        if (i, n) not in cache:
            cache[(i, n)] = power(i, n - 1) * images[i]
        return cache[(i, n)]

    out: dict[tuple[int, ...], complex] = {}
    for key, c in poly.terms.items():
        term = CreationPolynomial(m, {(0,) * m: c})
        for i, n in enumerate(key):
            if n:
                term = term * power(i, n)
        for k, v in term.terms.items():
            out[k] = out.get(k, 0j) + v
    result = polynomial_to_state(CreationPolynomial(m, out))
    return FockState(m, result.amplitudes, normalized=state.normalized)


@dataclass(frozen=True)
class BSFockCoefficients:
    """Output amplitudes ``f[p]`` of ``|n, m> -> sum_p f[p] |p, n + m - p>``."""

    n: int
    m: int
    theta: float
    f: tuple[float, ...]


def bs_fock_coefficients(n: int, m: int, theta: float) -> BSFockCoefficients:
    """Closed-form beam-splitter coefficients for ``|n>_a |m>_b`` under :func:`bs2`."""
    if n < 0 or m < 0 or n + m > 12:
        raise ValueError("need n, m >= 0 and n + m <= 12")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    total = n + m
    f = []
    for p in range(total + 1):
        acc = 0.0
        for q in range(n + 1):
            qp = p - q
            if not 0 <= qp <= m:
                continue
            acc += (math.comb(n, q) * math.comb(m, qp) * (-1) ** qp
                    * c ** (m + q - qp) * s ** (n - q + qp))
        norm = math.sqrt(math.factorial(p) * math.factorial(total - p)
                         / (math.factorial(n) * math.factorial(m)))
        f.append(acc * norm)
    return BSFockCoefficients(n, m, theta, tuple(f))
