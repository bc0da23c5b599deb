"""Heat currents, von Neumann entropy and entropy production.

Units: currents in ħω_c², entropy rates in k_B ω_c, temperatures as the
reduced θ = k_B T/(ħ ω_c,phys).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .generators import Generator, unvec, vec
from .params import PhysicalParams

BATH_PARTS = {"optical": "optical_bath", "mechanical": "mechanical_bath"}
#: Currents below this magnitude (units ħω_c²) count as zero in the first-law ratio.
#: Steady-state currents carry ~1e-18 of round-off, so a floor much below 1e-8
#: turns a ratio of two zeros into noise; the smallest physical current on the
#: default sweep grid is ~1e-7.
CURRENT_FLOOR = 1e-8
DEPHASING_HEAT_TOL = 1e-10
STEADY_DSDT_TOL = 1e-9
EIG_ZERO = 1e-14


class ThermoError(ValueError):
    pass


class FrameError(ThermoError):
    pass


class TemperatureError(ThermoError):
    pass


@dataclass(frozen=True)
class ThermoReport:
    J_c: float
    J_m: float
    xi: float
    dSdt: float
    first_law_residual: float
    second_law_ok: bool

    def __post_init__(self):
        for name in ("J_c", "J_m", "xi", "dSdt", "first_law_residual"):
            if not np.isfinite(getattr(self, name)):
                raise ThermoError(f"{name} is not finite")


def _matrix(rho, gen: Generator | None = None) -> np.ndarray:
    frame = getattr(rho, "frame", None)
    if gen is not None and frame is not None and frame != gen.frame:
        raise FrameError(f"state is in the {frame} frame, generator in the {gen.frame} frame")
    return np.asarray(getattr(rho, "matrix", rho))


def part_heat(gen: Generator, rho, part: str) -> float:
    """Tr[(L_part ρ) H_frame] for any labelled part.

    Evaluated as vec(ρ) · L_partᵀ vec(Hᵀ): the energy weights of each density
    matrix entry are formed first, which avoids summing the large cancelling
    entries of L ρ.
    """
    M = _matrix(rho, gen)
    weights = gen.parts[part].T @ vec(gen.hamiltonian.T.toarray())
    return float(np.real(weights @ vec(M)))


def heat_current(gen: Generator, rho, which: str) -> float:
    """Heat flowing into the system from the ``optical`` or ``mechanical`` bath."""
    if which not in BATH_PARTS:
        raise ThermoError(f"which must be 'optical' or 'mechanical', got {which!r}")
    M = _matrix(rho, gen)
    leak = part_heat(gen, M, "dephasing")
    if abs(leak) > DEPHASING_HEAT_TOL:
        raise ThermoError(f"dephasing part exchanges energy: {leak:.3g}")
    return part_heat(gen, M, BATH_PARTS[which])


def entropy_vn(rho) -> float:
    """−Σ λ ln λ over the spectrum; eigenvalues below 1e-14 contribute nothing."""
    w = la.eigvalsh(np.asarray(getattr(rho, "matrix", rho)))
    w = w[w > EIG_ZERO]
    return float(-np.sum(w * np.log(w)))


def entropy_derivative(gen: Generator, rho) -> float:
    """dS/dt = Tr[(L ρ)(−ln ρ − 1)] along the flow generated by ``gen``."""
    M = _matrix(rho, gen)
    w, v = la.eigh(0.5 * (M + M.conj().T))
    logw = np.log(np.clip(w, 1e-300, None))
    LM = unvec(gen.total @ vec(M), gen.dim)
    # work in the eigenbasis of ρ: Tr[(Lρ) ln ρ] = Σ_i (V† Lρ V)_ii ln λ_i
    diag = np.real(np.einsum("ji,jk,ki->i", v.conj(), LM, v))
    return float(-np.sum(diag * logw) - np.real(np.trace(LM)))


def entropy_production_rate(gen: Generator, rho, params: PhysicalParams | None = None, *,
                            steady: bool = False, current_floor: float = CURRENT_FLOOR,
                            second_law_tol: float = 1e-12) -> ThermoReport:
    """Entropy production ξ = dS/dt − J_c/θ_c − J_m/θ_m.

    With ``steady=True`` the entropy derivative must vanish (|dS/dt| < 1e-9)
    and ξ is evaluated from the currents alone.
    """
    params = gen.params if params is None else params
    if not (params.T_c > 0 and params.T_m > 0):
        raise TemperatureError("entropy production needs T_c > 0 and T_m > 0")
    M = _matrix(rho, gen)
    J_c = heat_current(gen, M, "optical")
    J_m = heat_current(gen, M, "mechanical")
    dSdt = entropy_derivative(gen, M)
    flux = J_c / params.theta_c + J_m / params.theta_m
    if steady:
        if abs(dSdt) > STEADY_DSDT_TOL:
            raise ThermoError(f"state is not stationary: dS/dt = {dSdt:.3g}")
        xi = -flux
    else:
        xi = dSdt - flux
    denom = max(abs(J_c), abs(J_m), current_floor)
    return ThermoReport(J_c=J_c, J_m=J_m, xi=xi, dSdt=dSdt,
                        first_law_residual=abs(J_c + J_m) / denom,
                        second_law_ok=bool(xi >= -second_law_tol))


def first_law_check(report: ThermoReport, tol: float = 1e-8) -> bool:
    return report.first_law_residual <= tol
