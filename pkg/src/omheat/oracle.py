"""Closed-form moment dynamics, heat currents and entropy production.

This is an implementation of the optomechanical moment hierarchy that is
independent of the Liouvillian machinery.  It is exact for the local (SME,
α = 0) and dressed-state (DSME, α = g/ω_m) equations because the photon
number decouples, so the ten tracked moments form a closed set.

Conventions: q = b + b†, p = i(b† − b), so that dq/dt = ω_m p for the free
oscillator; see :func:`momentum_operator`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .fock import mode_operators
from .params import PhysicalParams

ORACLE_MODELS = ("SME", "DSME")
FIELDS = ("mean_nc", "mean_p", "mean_q", "var_nc", "corr_nc_p", "corr_nc_q",
          "mean_nm", "mom_nc_p", "mom_nc_q", "mom_nc2")


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class MomentState:
    """The ten tracked expectation values.

    ``corr_*`` are connected correlations ⟨x y⟩ − ⟨x⟩⟨y⟩, ``mom_*`` raw
    moments.  Both are kept so that their consistency can be checked.
    """

    mean_nc: float
    mean_p: float
    mean_q: float
    var_nc: float
    corr_nc_p: float
    corr_nc_q: float
    mean_nm: float
    mom_nc_p: float
    mom_nc_q: float
    mom_nc2: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FIELDS], dtype=float)

    @classmethod
    def from_array(cls, x) -> "MomentState":
        x = np.asarray(x, dtype=float)
        if x.shape != (len(FIELDS),):
            raise OracleError(f"expected {len(FIELDS)} moments, got shape {x.shape}")
        return cls(*map(float, x))

    def consistency_errors(self) -> dict:
        """Deviations of the raw/central identities (all zero for a physical state)."""
        return {
            "corr_nc_p": self.corr_nc_p - (self.mom_nc_p - self.mean_nc * self.mean_p),
            "corr_nc_q": self.corr_nc_q - (self.mom_nc_q - self.mean_nc * self.mean_q),
            "var_nc": self.var_nc - (self.mom_nc2 - self.mean_nc**2),
        }

    def check(self, tol: float = 1e-10) -> "MomentState":
        if self.var_nc < -tol:
            raise OracleError(f"negative photon-number variance {self.var_nc}")
        if self.mom_nc2 < self.mean_nc**2 - 1e-12:
            raise OracleError("⟨n_c²⟩ below ⟨n_c⟩²")
        bad = {k: v for k, v in self.consistency_errors().items() if abs(v) > tol}
        if bad:
            raise OracleError(f"inconsistent moments: {bad}")
        return self


def _model(model: str) -> str:
    m = str(model).upper()
    if m not in ORACLE_MODELS:
        raise OracleError(f"closed forms exist for {ORACLE_MODELS} only, got {model!r}")
    return m


def _alpha(params: PhysicalParams, model: str) -> float:
    # the local equation is the α → 0 case of every formula
    return 0.0 if _model(model) == "SME" else params.alpha


def moment_rhs(state: MomentState, params: PhysicalParams, model: str) -> MomentState:
    """Time derivative of every tracked moment."""
    s = state
    al = _alpha(params, model)
    g, wm = params.g, params.omega_m
    kc, km, k = params.kappa_c, params.kappa_m, params.kappa
    nc_bar, nm_bar = params.nbar_c, params.nbar_m
    return MomentState(
        mean_nc=kc * (nc_bar - s.mean_nc),
        mean_p=-wm * s.mean_q - km / 2 * s.mean_p + 2 * g * s.mean_nc,
        mean_q=wm * s.mean_p - km / 2 * s.mean_q + km * al * s.mean_nc,
        var_nc=kc * nc_bar + (2 * kc * nc_bar + kc) * s.mean_nc - 2 * kc * s.var_nc,
        corr_nc_p=-k * s.corr_nc_p - wm * s.corr_nc_q + 2 * g * s.var_nc,
        corr_nc_q=-k * s.corr_nc_q + wm * s.corr_nc_p + km * al * s.var_nc,
        mean_nm=(-km * (s.mean_nm - nm_bar)
                 + g * (s.corr_nc_p + s.mean_nc * s.mean_p)
                 + km / 2 * al * (s.corr_nc_q + s.mean_nc * s.mean_q)),
        mom_nc_p=-k * s.mom_nc_p - wm * s.mom_nc_q + 2 * g * s.mom_nc2 + kc * nc_bar * s.mean_p,
        mom_nc_q=-k * s.mom_nc_q + al * km * s.mom_nc2 + kc * nc_bar * s.mean_q + wm * s.mom_nc_p,
        mom_nc2=kc * nc_bar - 2 * kc * s.mom_nc2 + kc * (4 * nc_bar + 1) * s.mean_nc,
    )


def moment_steady_state(params: PhysicalParams, model: str) -> MomentState:
    """Stationary values of all ten moments.

    ``corr_nc_p`` uses (2gκ − αω_mκ_m) in the numerator, which is what the
    stationary equations give for either model; it reduces to 2gκ_c only when
    αω_m = g.
    """
    al = _alpha(params, model)
    g, wm = params.g, params.omega_m
    kc, km, k = params.kappa_c, params.kappa_m, params.kappa
    nc_bar, nm_bar = params.nbar_c, params.nbar_m

    nc = nc_bar
    den_mean = 4 * wm**2 + km**2
    q = (8 * g * wm + 2 * al * km**2) / den_mean * nc
    p = (4 * g * km - 4 * al * wm * km) / den_mean * nc
    var = nc_bar * (nc_bar + 1)
    A = 1.0 / (k**2 + wm**2)
    c_p = (2 * g * k - al * wm * km) * A * var
    c_q = (2 * g * wm + al * km * k) * A * var
    nm = nm_bar + g / km * (c_p + nc * p) + al / 2 * (c_q + nc * q)
    nc2 = nc_bar * (2 * nc_bar + 1)
    m_q = A * (kc * nc_bar * (k * q + wm * p) + (k * al * km + 2 * g * wm) * nc2)
    m_p = A * (kc * nc_bar * (k * p - wm * q) + (2 * k * g - al * km * wm) * nc2)
    return MomentState(nc, p, q, var, c_p, c_q, nm, m_p, m_q, nc2)


def thermal_moments(params: PhysicalParams) -> MomentState:
    """Moments of the uncoupled product Gibbs state."""
    nc, nm = params.nbar_c, params.nbar_m
    return MomentState(nc, 0.0, 0.0, nc * (nc + 1), 0.0, 0.0, nm, 0.0, 0.0, nc * (2 * nc + 1))


def integrate_moments(state0: MomentState, params: PhysicalParams, model: str, t_grid, *,
                      rtol: float = 1e-10, atol: float = 1e-12,
                      method: str = "BDF") -> list[MomentState]:
    """Integrate :func:`moment_rhs` and return the moments at each time in ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0 or t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    _model(model)
    if len(t) == 1:
        return [state0]

    def rhs(_t, y):
        return moment_rhs(MomentState.from_array(y), params, model).to_array()

    sol = solve_ivp(rhs, (t[0], t[-1]), state0.to_array(), method=method, t_eval=t,
                    rtol=rtol, atol=atol)
    if sol.status != 0:
        raise OracleError(f"moment integration failed: {sol.message}")
    return [MomentState.from_array(y) for y in sol.y.T]


def heat_currents_time(state: MomentState, params: PhysicalParams, model: str,
                       *, displayed: bool = False) -> tuple[float, float]:
    """Instantaneous (J_c, J_m) for the given moments.

    The mechanical current is, for either model,
    ω_mκ_m(n̄_m − ⟨n_m⟩) + ½(g + αω_m)κ_m⟨n_c q⟩ − gακ_m⟨n_c²⟩.
    ``displayed=True`` uses gκ_m⟨n_c q⟩ for the middle term instead, which
    agrees with the general form only when αω_m = g (the dressed model).
    """
    al = _alpha(params, model)
    g, wm = params.g, params.omega_m
    kc, km = params.kappa_c, params.kappa_m
    s = state
    J_c = kc * (1.0 - g * s.mean_q) * (params.nbar_c - s.mean_nc) + g * kc * s.corr_nc_q
    nc_q = s.corr_nc_q + s.mean_nc * s.mean_q
    nc2 = s.var_nc + s.mean_nc**2
    middle = g if displayed else 0.5 * (g + al * wm)
    J_m = wm * km * (params.nbar_m - s.mean_nm) + middle * km * nc_q - g * al * km * nc2
    return float(J_c), float(J_m)


def heat_currents_closed(params: PhysicalParams, model: str) -> tuple[float, float]:
    """Stationary (J_c, J_m) = (gκ_c⟨n_c,q⟩, −gκ_c⟨n_c,q⟩)."""
    J_c = params.g * params.kappa_c * moment_steady_state(params, model).corr_nc_q
    return float(J_c), float(-J_c)


def entropy_rate_closed(params: PhysicalParams, model: str) -> float:
    """Stationary entropy production in units of k_B ω_c.

    gκ_c (2gω_m + ακ_mκ)/(ω_m² + κ²) n̄_c(n̄_c + 1) (1/θ_m − 1/θ_c).
    """
    if not (params.T_c > 0 and params.T_m > 0):
        raise OracleError("entropy production needs T_c > 0 and T_m > 0")
    al = _alpha(params, model)
    g, wm, k, km = params.g, params.omega_m, params.kappa, params.kappa_m
    nc = params.nbar_c
    corr = (2 * g * wm + al * km * k) / (wm**2 + k**2) * nc * (nc + 1)
    return float(g * params.kappa_c * corr * (1 / params.theta_m - 1 / params.theta_c))


def momentum_operator(dims):
    """p = i(b† − b) on the joint space (sparse)."""
    b = mode_operators(dims).b
    return (1j * (b.conj().T - b)).tocsr()


def full_matrix_moments(gen, rho) -> MomentState:
    """Evaluate the ten moments on a lab-frame density matrix."""
    if gen.frame != "lab":
        raise OracleError("moments are defined for lab-frame states")
    M = np.asarray(getattr(rho, "matrix", rho))
    ops = mode_operators(gen.dims)
    q = (ops.b + ops.b.conj().T).tocsr()
    p = momentum_operator(gen.dims)
    n = ops.n_c

    def ev(op):
        return float(np.real((op.multiply(M.T)).sum()))

    nc, mp, mq = ev(n), ev(p), ev(q)
    # n_c commutes with q and p, so the products are Hermitian
    nc_p, nc_q, nc2 = ev(n @ p), ev(n @ q), ev(n @ n)
    return MomentState(
        mean_nc=nc, mean_p=mp, mean_q=mq,
        var_nc=nc2 - nc**2, corr_nc_p=nc_p - nc * mp, corr_nc_q=nc_q - nc * mq,
        mean_nm=ev(ops.n_m), mom_nc_p=nc_p, mom_nc_q=nc_q, mom_nc2=nc2,
    )


#: p and q are the two components of one phase-space vector, so each p/q
#: pair is compared on the scale of the pair's length (p vanishes exactly for
#: the dressed model, where a bare relative error would divide by zero).
QUADRATURE_PAIRS = (("mean_p", "mean_q"), ("corr_nc_p", "corr_nc_q"), ("mom_nc_p", "mom_nc_q"))


def relative_errors(a: MomentState, b: MomentState, abs_floor: float = 1e-300) -> dict:
    """Per-field |a − b| / scale, with ``b`` the reference.

    The scale is |b| for scalar moments and the Euclidean length of the
    reference (p, q) pair for quadrature moments.
    """
    scale = {f: abs(getattr(b, f)) for f in FIELDS}
    for fp, fq in QUADRATURE_PAIRS:
        s = float(np.hypot(getattr(b, fp), getattr(b, fq)))
        scale[fp] = scale[fq] = s
    return {f: abs(getattr(a, f) - getattr(b, f)) / max(scale[f], abs_floor) for f in FIELDS}


__all__ = [
    "FIELDS",
    "MomentState",
    "QUADRATURE_PAIRS",
    "OracleError",
    "entropy_rate_closed",
    "full_matrix_moments",
    "heat_currents_closed",
    "heat_currents_time",
    "integrate_moments",
    "moment_rhs",
    "moment_steady_state",
    "momentum_operator",
    "relative_errors",
    "thermal_moments",
]
