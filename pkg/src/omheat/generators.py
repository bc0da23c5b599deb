"""Liouvillian superoperators for the three master equations.

Density matrices are vectorized column-major (``rho.reshape(-1, order="F")``),
so ``vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)``.  Every generator keeps its pieces
separately addressable; heat currents are read off the bath parts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .fock import SystemDims, mode_operators
from .params import (
    PhysicalParams,
    hamiltonian,
    polaron_hamiltonian,
    spectral_G,
    spectral_density_zero,
)

PART_LABELS = ("hamiltonian", "optical_bath", "mechanical_bath", "dephasing")
MODELS = ("SME", "DSME", "GME")
GME_SIDEBANDS = (2, 4, 6, 8)


class GeneratorError(ValueError):
    pass


class UnsupportedOrderError(GeneratorError):
    pass


class SidebandFrequencyError(GeneratorError):
    pass


@dataclass(frozen=True)
class JumpChannel:
    """One Lindblad term ``rate * D[operator]``."""

    operator: sp.csr_matrix
    rate: float
    frequency: float
    origin: str

    def __post_init__(self):
        if not self.rate >= 0:
            raise GeneratorError(f"negative rate {self.rate} for channel {self.origin!r}")


@dataclass(frozen=True, eq=False)
class Generator:
    """A master-equation generator acting on vec(ρ).

    ``total`` is the sum of ``parts`` in the fixed order of ``PART_LABELS``.
    ``hamiltonian`` is the energy operator of the frame the generator lives
    in (H in the lab frame, H̃ in the polaron frame).
    """

    total: sp.csr_matrix
    parts: Mapping[str, sp.csr_matrix]
    frame: str
    model: str
    sidebands: int
    hamiltonian: sp.csr_matrix
    dims: SystemDims
    params: PhysicalParams
    channels: Mapping[str, tuple[JumpChannel, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise GeneratorError(f"unknown model {self.model!r}")
        expected_frame = "polaron" if self.model == "GME" else "lab"
        if self.frame != expected_frame:
            raise GeneratorError(f"{self.model} lives in the {expected_frame} frame")
        if set(self.parts) != set(PART_LABELS):
            raise GeneratorError(f"parts must be exactly {PART_LABELS}")

    @property
    def dim(self) -> int:
        return self.dims.joint

    def apply(self, rho, part: str | None = None) -> np.ndarray:
        """Return (L ρ) as a matrix, for the total generator or a single part."""
        L = self.total if part is None else self.parts[part]
        d = self.dim
        return (L @ vec(rho)).reshape((d, d), order="F")

    def without(self, *labels: str) -> sp.csr_matrix:
        """Sum of all parts except ``labels``."""
        keep = [p for p in PART_LABELS if p not in labels]
        out = self.parts[keep[0]]
        for p in keep[1:]:
            out = out + self.parts[p]
        return out.tocsr()


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def _csr(op) -> sp.csr_matrix:
    return op.tocsr() if sp.issparse(op) else sp.csr_matrix(np.asarray(op, dtype=complex))


def commutator_super(H) -> sp.csr_matrix:
    """Superoperator of ρ ↦ −i[H, ρ]."""
    H = _csr(H)
    I = sp.identity(H.shape[0], dtype=complex, format="csr")
    return (-1j * (sp.kron(I, H) - sp.kron(H.T, I))).tocsr()


def dissipator_super(o) -> sp.csr_matrix:
    """Superoperator of D[o]ρ = o ρ o† − ½{o†o, ρ}."""
    o = _csr(o)
    I = sp.identity(o.shape[0], dtype=complex, format="csr")
    oo = (o.conj().T @ o).tocsr()
    return (sp.kron(o.conj(), o) - 0.5 * sp.kron(I, oo) - 0.5 * sp.kron(oo.T, I)).tocsr()


def _channels_super(channels: Sequence[JumpChannel], d: int) -> sp.csr_matrix:
    out = sp.csr_matrix((d * d, d * d), dtype=complex)
    for ch in channels:
        if ch.rate == 0:
            continue
        out = out + ch.rate * dissipator_super(ch.operator)
    return out.tocsr()


def _optical_local(params: PhysicalParams, ops) -> list[JumpChannel]:
    a = ops.a
    return [
        JumpChannel(a, spectral_G(params.kappa_c, 1.0, params.T_c, params.omega_c_phys),
                    1.0, "optical, a"),
        JumpChannel(a.conj().T.tocsr(),
                    spectral_G(params.kappa_c, -1.0, params.T_c, params.omega_c_phys),
                    -1.0, "optical, a†"),
    ]


def _mechanical(params: PhysicalParams, jump: sp.csr_matrix, label: str) -> list[JumpChannel]:
    wm = params.omega_m
    return [
        JumpChannel(jump, spectral_G(params.kappa_m, wm, params.T_m, params.omega_c_phys),
                    wm, f"mechanical, {label}"),
        JumpChannel(jump.conj().T.tocsr(),
                    spectral_G(params.kappa_m, -wm, params.T_m, params.omega_c_phys),
                    -wm, f"mechanical, ({label})†"),
    ]


def _assemble(model, frame, sidebands, H, channels, params, dims) -> Generator:
    d = dims.joint
    parts = {"hamiltonian": commutator_super(H)}
    for label in PART_LABELS[1:]:
        parts[label] = _channels_super(channels.get(label, ()), d)
    total = parts[PART_LABELS[0]]
    for label in PART_LABELS[1:]:
        total = total + parts[label]
    return Generator(
        total=total.tocsr(),
        parts=MappingProxyType(parts),
        frame=frame,
        model=model,
        sidebands=sidebands,
        hamiltonian=_csr(H),
        dims=dims,
        params=params,
        channels=MappingProxyType({k: tuple(v) for k, v in channels.items()}),
    )


def build_sme(params: PhysicalParams, dims: SystemDims) -> Generator:
    """Standard (local) master equation: each bath damps its own resonator."""
    ops = mode_operators(dims)
    channels = {
        "optical_bath": _optical_local(params, ops),
        "mechanical_bath": _mechanical(params, ops.b, "b"),
    }
    H = hamiltonian(params, dims, sparse=True)
    return _assemble("SME", "lab", 0, H, channels, params, dims)


def build_dsme(params: PhysicalParams, dims: SystemDims) -> Generator:
    """Dressed-state master equation.

    The mechanical bath acts on the dressed mode b − α n_c and photon-number
    dephasing at rate 4 κ_m θ_m α² / ω_m is added; the optical bath is local.
    """
    ops = mode_operators(dims)
    alpha = params.alpha
    jump = (ops.b - alpha * ops.n_c).tocsr()
    deph = 4 * params.kappa_m * params.theta_m / params.omega_m * alpha**2
    channels = {
        "optical_bath": _optical_local(params, ops),
        "mechanical_bath": _mechanical(params, jump, "b − α n_c"),
        "dephasing": [JumpChannel(ops.n_c, deph, 0.0, "dephasing, n_c")],
    }
    H = hamiltonian(params, dims, sparse=True)
    return _assemble("DSME", "lab", 0, H, channels, params, dims)


def sideband_words(order_max: int) -> list[tuple[str, ...]]:
    """All ordered words over {b, b†} of length 0..order_max.

    These are the terms of (b e^{−iω_m t} − b† e^{iω_m t})^n; a word with j
    annihilators and k creators oscillates at net phonon shift j − k.
    """
    words: list[tuple[str, ...]] = []
    for n in range(order_max + 1):
        words.extend(itertools.product(("b", "b†"), repeat=n))
    return words


def _word_label(word) -> str:
    return " ".join(word) if word else "1"


def sideband_channels(params: PhysicalParams, dims: SystemDims,
                      order_max: int) -> list[JumpChannel]:
    """Optical jump channels of the global master equation up to ``order_max``.

    Each word w with j annihilators and k creators gives the pair
    α^{j+k} G_c(ω_c + (j−k)ω_m) D[a w] and α^{j+k} G_c(−ω_c − (j−k)ω_m) D[a† w†].
    Words are never merged, even when they share a net shift.
    """
    if isinstance(order_max, bool) or int(order_max) != order_max or not 1 <= order_max <= 4:
        raise UnsupportedOrderError(f"sideband order must be 1..4, got {order_max!r}")
    wm = params.omega_m
    if 1.0 - order_max * wm <= 0:
        raise SidebandFrequencyError(
            f"red sideband ω_c − {order_max}ω_m = {1.0 - order_max * wm:g} is not positive")
    ops = mode_operators(dims)
    letters = {"b": ops.b, "b†": ops.b.conj().T.tocsr()}
    alpha = params.alpha
    out = []
    for word in sideband_words(order_max):
        j = word.count("b")
        k = len(word) - j
        shift = j - k
        op = ops.a
        for letter in word:
            op = op @ letters[letter]
        op = op.tocsr()
        weight = alpha ** len(word)
        w_emit = 1.0 + shift * wm
        label = _word_label(word)
        out.append(JumpChannel(
            op, weight * spectral_G(params.kappa_c, w_emit, params.T_c, params.omega_c_phys),
            w_emit, f"optical, a·{label}, shift {shift:+d}"))
        out.append(JumpChannel(
            op.conj().T.tocsr(),
            weight * spectral_G(params.kappa_c, -w_emit, params.T_c, params.omega_c_phys),
            -w_emit, f"optical, (a·{label})†, shift {shift:+d}"))
    return out


def build_gme(params: PhysicalParams, dims: SystemDims, sidebands: int = 4,
              mechanical_jump: str = "dressed") -> Generator:
    """Global master equation with phonon sidebands, in the polaron frame.

    ``mechanical_jump="dressed"`` couples the mechanical bath to the polaron
    mode operator itself (plain b in this frame).  ``"literal"`` uses
    b − α n_c in this frame instead; it is kept for comparison only and does
    not satisfy detailed balance at equal bath temperatures.
    """
    if sidebands not in GME_SIDEBANDS:
        raise UnsupportedOrderError(f"sidebands must be one of {GME_SIDEBANDS}, got {sidebands!r}")
    if mechanical_jump not in ("dressed", "literal"):
        raise GeneratorError(f"unknown mechanical_jump {mechanical_jump!r}")
    ops = mode_operators(dims)
    alpha = params.alpha
    if mechanical_jump == "dressed":
        jump, label = ops.b, "b̃"
    else:
        jump, label = (ops.b - alpha * ops.n_c).tocsr(), "b̃ − α n_c"
    channels = {
        "optical_bath": sideband_channels(params, dims, sidebands // 2),
        "mechanical_bath": _mechanical(params, jump, label),
        "dephasing": [JumpChannel(ops.n_c, spectral_density_zero(params) * alpha**2, 0.0,
                                  "dephasing, n_c")],
    }
    H = polaron_hamiltonian(params, dims, sparse=True)
    return _assemble("GME", "polaron", sidebands, H, channels, params, dims)


def build_generator(params: PhysicalParams, dims: SystemDims, model: str,
                    sidebands: int | None = None, **kwargs) -> Generator:
    model = model.upper()
    if model == "SME":
        return build_sme(params, dims)
    if model == "DSME":
        return build_dsme(params, dims)
    if model == "GME":
        return build_gme(params, dims, 4 if sidebands is None else sidebands, **kwargs)
    raise GeneratorError(f"unknown model {model!r}")


def trace_functional(d: int) -> np.ndarray:
    """Row vector t with t · vec(ρ) = Tr ρ."""
    t = np.zeros(d * d)
    t[np.arange(d) * (d + 1)] = 1.0
    return t
