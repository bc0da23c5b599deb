"""Physical parameters, bath spectra and the model Hamiltonians.

Internally ħ = k_B = 1 and frequencies are measured in units of the optical
frequency ω_c, so ω_c = 1.  Temperatures are accepted in kelvin and enter only
through the reduced temperature ``θ = k_B T / (ħ ω_c,phys)``.  Heat currents
come out in units of ħω_c² and entropy rates in units of k_B ω_c.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .fock import SystemDims, matrix_exp, mode_operators

HBAR = constants.hbar  # J s
K_B = constants.k  # J / K

#: Optical reference frequency of the circuit-QED parameter set (rad/s).
OMEGA_C_PHYS = 2 * math.pi * 10e9


class ParameterError(ValueError):
    """Invalid physical parameter."""


@dataclass(frozen=True)
class PhysicalParams:
    """Model constants.

    All rates and frequencies except ``omega_c_phys`` are dimensionless, in
    units of ω_c.  ``gm0_override`` replaces the default zero-frequency
    mechanical noise coefficient used by the global master equation.
    """

    omega_c_phys: float = OMEGA_C_PHYS
    omega_m: float = 0.06
    g: float = 0.0
    kappa_c: float = 0.02
    kappa_m: float = 0.005
    T_c: float = 0.106
    T_m: float = 0.101
    gm0_override: float | None = None

    def __post_init__(self):
        checks = [
            (self.omega_c_phys > 0, "omega_c_phys must be > 0"),
            (0 < self.omega_m < 1, "omega_m must lie in (0, 1)"),
            (self.g >= 0, "g must be >= 0"),
            (self.kappa_c > 0, "kappa_c must be > 0"),
            (self.kappa_m > 0, "kappa_m must be > 0"),
            (self.T_c >= 0, "T_c must be >= 0"),
            (self.T_m >= 0, "T_m must be >= 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParameterError(msg)
        if self.gm0_override is not None and self.gm0_override < 0:
            raise ParameterError("gm0_override must be >= 0")

    @property
    def alpha(self) -> float:
        """Polaron displacement g/ω_m."""
        return self.g / self.omega_m

    @property
    def kappa(self) -> float:
        return self.kappa_c + self.kappa_m / 2

    @property
    def theta_c(self) -> float:
        return reduced_temperature(self.T_c, self.omega_c_phys)

    @property
    def theta_m(self) -> float:
        return reduced_temperature(self.T_m, self.omega_c_phys)

    @property
    def nbar_c(self) -> float:
        return bose_einstein(1.0, self.T_c, self.omega_c_phys)

    @property
    def nbar_m(self) -> float:
        return bose_einstein(self.omega_m, self.T_m, self.omega_c_phys)

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)


def reduced_temperature(T: float, omega_c_phys: float = OMEGA_C_PHYS) -> float:
    """k_B T / (ħ ω_c,phys)."""
    return K_B * T / (HBAR * omega_c_phys)


def current_to_si(J: float, omega_c_phys: float = OMEGA_C_PHYS) -> float:
    """Heat current from units of ħω_c² to watts."""
    return J * HBAR * omega_c_phys**2


def entropy_rate_to_si(xi: float, omega_c_phys: float = OMEGA_C_PHYS) -> float:
    """Entropy production rate from units of k_B ω_c to W/K."""
    return xi * K_B * omega_c_phys


def bose_einstein(omega: float, T: float, omega_c_phys: float = OMEGA_C_PHYS) -> float:
    """Thermal occupation of a bath mode at reduced frequency ``omega``."""
    if not omega > 0:
        raise ParameterError(f"bose_einstein needs omega > 0, got {omega}")
    if T < 0:
        raise ParameterError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return 0.0
    # dividing by T last keeps subnormal temperatures at x = inf, not 1/0
    x = HBAR * omega * omega_c_phys / K_B / T
    if x == math.inf:
        return 0.0
    # e^{-x}/(1-e^{-x}) does not overflow for large x
    return math.exp(-x) / -math.expm1(-x)


def spectral_G(kappa: float, omega_signed: float, T: float,
               omega_c_phys: float = OMEGA_C_PHYS) -> float:
    """Flat (Ohmic) bath rate: κ(1+n̄) for emission, κn̄ for absorption."""
    if omega_signed == 0:
        raise ParameterError("spectral_G is undefined at zero frequency; "
                             "use spectral_density_zero")
    nbar = bose_einstein(abs(omega_signed), T, omega_c_phys)
    return kappa * (1.0 + nbar) if omega_signed > 0 else kappa * nbar


def spectral_density_zero(params: PhysicalParams) -> float:
    """Zero-frequency mechanical noise coefficient G_m(0).

    Defaults to the classical-limit value 4 κ_m θ_m / ω_m, the same
    coefficient that multiplies α² D[n_c] in the dressed-state equation.
    """
    if params.gm0_override is not None:
        return float(params.gm0_override)
    return 4 * params.kappa_m * params.theta_m / params.omega_m


def _as_format(op, sparse):
    return op.tocsr() if sparse else op.toarray()


def hamiltonian(params: PhysicalParams, dims: SystemDims, sparse: bool = False):
    """Lab-frame H = n_c + ω_m b†b − g n_c (b + b†)."""
    ops = mode_operators(dims)
    q = ops.b + ops.b.conj().T
    H = ops.n_c + params.omega_m * ops.n_m - params.g * (ops.n_c @ q)
    return _as_format(H, sparse)


def polaron_hamiltonian(params: PhysicalParams, dims: SystemDims, sparse: bool = False):
    """Polaron-frame H̃ = n_c + ω_m b†b − (g²/ω_m) n_c², diagonal in the Fock basis."""
    ops = mode_operators(dims)
    kerr = params.g**2 / params.omega_m
    H = ops.n_c + params.omega_m * ops.n_m - kerr * (ops.n_c @ ops.n_c)
    return _as_format(H, sparse)


def polaron_unitary(params: PhysicalParams, dims: SystemDims) -> np.ndarray:
    """S = exp(−α n_c (b† − b)); maps lab-frame states to the polaron frame."""
    if params.alpha == 0:
        return np.eye(dims.joint, dtype=complex)
    ops = mode_operators(dims)
    gen = -params.alpha * (ops.n_c @ (ops.b.conj().T - ops.b))
    return matrix_exp(gen.toarray())


def thermal_populations(omega: float, T: float, dim: int,
                        omega_c_phys: float = OMEGA_C_PHYS) -> np.ndarray:
    """Gibbs populations of a single truncated oscillator."""
    x = math.inf if T == 0 else HBAR * omega * omega_c_phys / K_B / T
    if x == math.inf:
        p = np.zeros(dim)
        p[0] = 1.0
        return p
    p = np.exp(-x * np.arange(dim))
    return p / p.sum()


def thermal_state(omega: float, T: float, dim: int,
                  omega_c_phys: float = OMEGA_C_PHYS) -> np.ndarray:
    return np.diag(thermal_populations(omega, T, dim, omega_c_phys)).astype(complex)


__all__ = [
    "HBAR",
    "K_B",
    "OMEGA_C_PHYS",
    "ParameterError",
    "PhysicalParams",
    "bose_einstein",
    "current_to_si",
    "entropy_rate_to_si",
    "hamiltonian",
    "polaron_hamiltonian",
    "polaron_unitary",
    "reduced_temperature",
    "spectral_G",
    "spectral_density_zero",
    "thermal_populations",
    "thermal_state",
]
