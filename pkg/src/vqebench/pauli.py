"""Pauli-string algebra and benchmark Hamiltonians.

Builds the transverse-field Ising and lattice Schwinger Hamiltonians as
real-weighted sums of Pauli strings, and provides a dense exact-diagonalization
oracle for ground-truth energies at small system sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Site 0 is the leftmost tensor factor (most significant bit of the basis
# index). All tests assert this convention.
PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Coefficients below this magnitude are dropped after merging; symbolic
# expansion cancels exactly only up to rounding.
COEFF_PRUNE_THRESHOLD = 1e-12

# Dense matrices above this qubit count would not fit in memory.
MAX_DENSE_QUBITS = 14


@dataclass(frozen=True)
class PauliString:
    """One weighted Pauli string, e.g. -2.0 * X I Z."""

    coefficient: float
    axes: str  # one character per site, each in {I, X, Y, Z}

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        if not self.axes or any(a not in "IXYZ" for a in self.axes):
            raise ValueError(f"invalid axes string {self.axes!r}")

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}


@dataclass(frozen=True)
class PauliSum:
    """Hermitian operator as a merged, pruned sum of Pauli strings.

    Canonical form: unique axes patterns sorted lexicographically, real
    coefficients, terms with |coefficient| <= 1e-12 removed.
    """

    terms: tuple[PauliString, ...]
    qubit_count: int

    @classmethod
    def from_terms(cls, terms, qubit_count: int) -> "PauliSum":
        if qubit_count < 1:
            raise ValueError(f"qubit_count must be >= 1, got {qubit_count}")
        merged: dict[str, float] = {}
        for t in terms:
            if len(t.axes) != qubit_count:
                raise ValueError(
                    f"term {t.axes!r} has {len(t.axes)} sites, expected {qubit_count}"
                )
            merged[t.axes] = merged.get(t.axes, 0.0) + t.coefficient
        kept = tuple(
            PauliString(coefficient=c, axes=a)
            for a, c in sorted(merged.items())
            if abs(c) > COEFF_PRUNE_THRESHOLD
        )
        return cls(terms=kept, qubit_count=qubit_count)

    def coefficients(self) -> dict[str, float]:
        return {t.axes: t.coefficient for t in self.terms}

    @property
    def constant(self) -> float:
        """Sum of all-identity terms (constant energy offset)."""
        return sum(t.coefficient for t in self.terms if t.is_identity)


def _single_site(qubit_count: int, site: int, axis: str) -> str:
    axes = ["I"] * qubit_count
    axes[site] = axis
    return "".join(axes)


def _two_site(qubit_count: int, site_a: int, axis_a: str, site_b: int, axis_b: str) -> str:
    axes = ["I"] * qubit_count
    axes[site_a] = axis_a
    axes[site_b] = axis_b
    return "".join(axes)


def build_tfim(n: int, J: float, h: float) -> PauliSum:
    """Transverse-field Ising chain with open boundaries.

    H = J * sum_{i=0}^{n-2} Z_i Z_{i+1} + h * sum_{i=0}^{n-1} X_i
    """
    if n < 2:
        raise ValueError(f"TFIM needs at least 2 sites (no bond exists for n={n})")
    terms = []
    for i in range(n - 1):
        terms.append(PauliString(J, _two_site(n, i, "Z", i + 1, "Z")))
    for i in range(n):
        terms.append(PauliString(h, _single_site(n, i, "X")))
    return PauliSum.from_terms(terms, n)


def build_schwinger(n: int, x: float, mu: float, l: float) -> PauliSum:
    """Lattice Schwinger Hamiltonian in fully expanded Pauli form.

    H = (x/2) sum_{k=0}^{n-2} (X_k X_{k+1} + Y_k Y_{k+1})
      + (mu/2) sum_{k=0}^{n-1} [1 + (-1)^k Z_k]
      + sum_{j=0}^{n-2} (l + (1/2) sum_{k=0}^{j} (-1)^k Z_k)^2

    The squared electric-field term is expanded symbolically using Z^2 = I
    into identity, single-Z, and Z-Z contributions; identity terms are merged
    into a single constant so that absolute energies (not just gaps) are
    reproduced.
    """
    if n < 2:
        raise ValueError(f"Schwinger model needs at least 2 sites, got n={n}")
    if n % 2 != 0:
        raise ValueError(f"staggered fermions pair sites; n must be even, got n={n}")
    terms = []
    ident = "I" * n
    for k in range(n - 1):
        terms.append(PauliString(x / 2.0, _two_site(n, k, "X", k + 1, "X")))
        terms.append(PauliString(x / 2.0, _two_site(n, k, "Y", k + 1, "Y")))
    for k in range(n):
        terms.append(PauliString(mu / 2.0, ident))
        terms.append(PauliString((mu / 2.0) * (-1) ** k, _single_site(n, k, "Z")))
    for j in range(n - 1):
        # (l + (1/2) sum_{k<=j} s_k Z_k)^2 with s_k = (-1)^k:
        #   l^2 + (j+1)/4 constant, l*s_k Z_k linear, (1/2) s_k s_m Z_k Z_m cross.
        terms.append(PauliString(l * l + (j + 1) / 4.0, ident))
        for k in range(j + 1):
            terms.append(PauliString(l * (-1) ** k, _single_site(n, k, "Z")))
        for k in range(j + 1):
            for m in range(k + 1, j + 1):
                sign = (-1) ** k * (-1) ** m
                terms.append(PauliString(0.5 * sign, _two_site(n, k, "Z", m, "Z")))
    return PauliSum.from_terms(terms, n)


def pauli_string_matrix(axes: str) -> np.ndarray:
    """Dense matrix of one unweighted Pauli string (site 0 leftmost factor)."""
    m = PAULI_MATRICES[axes[0]]
    for a in axes[1:]:
        m = np.kron(m, PAULI_MATRICES[a])
    return m


def to_dense(h: PauliSum) -> np.ndarray:
    """Dense Hermitian matrix of a PauliSum. Guarded at n <= 14."""
    n = h.qubit_count
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrix for n={n} qubits exceeds the n<={MAX_DENSE_QUBITS} guard")
    dim = 2**n
    m = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        m += t.coefficient * pauli_string_matrix(t.axes)
    return m


def exact_ground_energy(h: PauliSum) -> float:
    """Smallest eigenvalue of the dense operator, via a Hermitian eigensolver."""
    return float(np.linalg.eigvalsh(to_dense(h))[0])
