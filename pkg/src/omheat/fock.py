"""Truncated bosonic operators on the joint optical ⊗ mechanical Fock space.

Mode ordering is fixed everywhere: the optical factor comes first in every
Kronecker product, so the joint basis index of ``|n_c, n_m>`` is
``n_c * dims.n_m + n_m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp


class DimensionError(ValueError):
    """Raised for Fock cutoffs that cannot host a bosonic mode."""


@dataclass(frozen=True)
class SystemDims:
    """Fock cutoffs: photon states ``0..n_c-1`` and phonon states ``0..n_m-1``."""

    n_c: int
    n_m: int

    def __post_init__(self):
        for name in ("n_c", "n_m"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise DimensionError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise DimensionError(f"{name} must be >= 2, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def joint(self) -> int:
        return self.n_c * self.n_m

    def index(self, n_c: int, n_m: int) -> int:
        """Joint basis index of ``|n_c, n_m>``."""
        return n_c * self.n_m + n_m


def _check_dim(dim) -> int:
    if isinstance(dim, bool) or int(dim) != dim or dim < 2:
        raise DimensionError(f"mode dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def annihilation(dim: int) -> np.ndarray:
    """Truncated annihilation operator with ``<n-1|a|n> = sqrt(n)``."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number(dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def tensor(A, B) -> np.ndarray:
    """Kronecker product, first factor optical."""
    return np.kron(np.asarray(A), np.asarray(B))


def matrix_exp(A) -> np.ndarray:
    """Matrix exponential.

    Anti-Hermitian input goes through a Hermitian eigendecomposition, which
    keeps the result unitary to machine precision; anything else uses
    scaling-and-squaring with a Padé approximant (``scipy.linalg.expm``).
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix_exp needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise FloatingPointError("matrix_exp: non-finite entries in input")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A + A.conj().T).max() <= 1e-14 * scale:
        # A = iK with K Hermitian
        w, v = la.eigh(-1j * A)
        return (v * np.exp(1j * w)) @ v.conj().T
    return la.expm(A)


class ModeOperators(NamedTuple):
    """Sparse joint-space operators used to assemble generators."""

    a: sp.csr_matrix
    b: sp.csr_matrix
    n_c: sp.csr_matrix
    n_m: sp.csr_matrix
    identity: sp.csr_matrix


def mode_operators(dims: SystemDims) -> ModeOperators:
    Ic = sp.identity(dims.n_c, dtype=complex, format="csr")
    Im = sp.identity(dims.n_m, dtype=complex, format="csr")
    a1 = sp.csr_matrix(annihilation(dims.n_c))
    b1 = sp.csr_matrix(annihilation(dims.n_m))
    a = sp.kron(a1, Im, format="csr")
    b = sp.kron(Ic, b1, format="csr")
    n_c = sp.kron(sp.csr_matrix(number(dims.n_c)), Im, format="csr")
    n_m = sp.kron(Ic, sp.csr_matrix(number(dims.n_m)), format="csr")
    return ModeOperators(a, b, n_c, n_m, sp.identity(dims.joint, dtype=complex, format="csr"))
