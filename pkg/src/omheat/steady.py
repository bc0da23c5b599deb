"""Steady states, time evolution and Fock-cutoff convergence."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .fock import SystemDims
from .generators import Generator, build_generator, trace_functional, unvec, vec
from .params import PhysicalParams

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-8
# eigenvalues above this are numerical zeros and left untouched
CLIP_THRESHOLD = -1e-12


class SteadyStateError(RuntimeError):
    pass


class DegenerateSteadyStateError(SteadyStateError):
    pass


class NonConvergenceError(SteadyStateError):
    pass


class StiffnessError(SteadyStateError):
    pass


class BudgetExceededError(SteadyStateError):
    def __init__(self, message, last_delta=None):
        super().__init__(message)
        self.last_delta = last_delta


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix on the joint space, tagged with its frame."""

    matrix: np.ndarray
    frame: str = "lab"
    info: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expect(self, op) -> float:
        """Real part of Tr(ρ O)."""
        if sp.issparse(op):
            return float(np.real((op.multiply(self.matrix.T)).sum()))
        return float(np.real(np.einsum("ij,ji->", self.matrix, np.asarray(op))))

    def validate(self, *, trace_tol=TRACE_TOL, herm_tol=HERMITIAN_TOL,
                 eig_tol=NEGATIVE_EIG_TOL) -> "DensityMatrix":
        check_density_matrix(self.matrix, trace_tol=trace_tol, herm_tol=herm_tol,
                             eig_tol=eig_tol)
        return self


def check_density_matrix(rho, *, trace_tol=TRACE_TOL, herm_tol=HERMITIAN_TOL,
                         eig_tol=NEGATIVE_EIG_TOL):
    rho = np.asarray(rho)
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise InvalidStateError(f"not Hermitian: max |ρ − ρ†| = {herm:.3g}")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise InvalidStateError(f"trace {tr.real:.15g} differs from 1")
    lmin = la.eigvalsh(rho).min()
    if lmin < -eig_tol:
        raise InvalidStateError(f"negative eigenvalue {lmin:.3g}")


def trace_distance(rho, sigma) -> float:
    r = np.asarray(getattr(rho, "matrix", rho))
    s = np.asarray(getattr(sigma, "matrix", sigma))
    return 0.5 * float(np.abs(la.eigvalsh(r - s)).sum())


def photon_diagonal_indices(dims: SystemDims) -> np.ndarray:
    """vec indices of the entries |n, m⟩⟨n, m'| (equal photon number on both sides).

    All three generators conserve n_c − n_c' so this block is invariant and
    contains the steady state.
    """
    d, nm = dims.joint, dims.n_m
    blocks = []
    for n in range(dims.n_c):
        rows = n * nm + np.arange(nm)
        blocks.append((rows[:, None] + d * rows[None, :]).ravel(order="F"))
    return np.concatenate(blocks)


def _clean(rho: np.ndarray):
    """Hermitize and clip tiny negative eigenvalues; returns (rho, min_eig)."""
    rho = 0.5 * (rho + rho.conj().T)
    w, v = la.eigh(rho)
    lmin = float(w.min())
    if lmin < -NEGATIVE_EIG_TOL:
        raise InvalidStateError(f"steady state has eigenvalue {lmin:.3g} below −{NEGATIVE_EIG_TOL}")
    if lmin < CLIP_THRESHOLD:
        log.info("clipping eigenvalues down to %.3g", lmin)
        w = np.clip(w, 0.0, None)
        rho = (v * (w / w.sum())) @ v.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    return rho, lmin


def steady_state(gen: Generator, *, tol: float = 1e-9, sector: bool = True,
                 refine: int = 3) -> DensityMatrix:
    """Steady state of ``gen`` by a direct sparse solve.

    One row of the (block-restricted) generator is replaced by the trace
    functional so that L vec(ρ) = 0, Tr ρ = 1 becomes a regular linear system.
    With ``sector=True`` only the photon-number-diagonal block is solved.
    """
    d = gen.dim
    L = gen.total
    if sector:
        idx = photon_diagonal_indices(gen.dims)
    else:
        idx = np.arange(d * d)
    A = L[idx][:, idx].tocsr()
    tr = trace_functional(d)[idx]
    row = 0  # vec position of |0,0><0,0|
    keep = np.ones(A.shape[0])
    keep[row] = 0.0
    A = (sp.diags(keep) @ A + sp.csr_matrix(
        (tr[tr != 0], (np.zeros(np.count_nonzero(tr), dtype=int), np.flatnonzero(tr))),
        shape=A.shape)).tocsc()
    rhs = np.zeros(A.shape[0], dtype=complex)
    rhs[row] = 1.0
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise DegenerateSteadyStateError(
            f"{gen.model}: generator kernel is not one-dimensional ({exc})") from exc
    x = lu.solve(rhs)
    for _ in range(refine):
        x = x + lu.solve(rhs - A @ x)
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError(f"{gen.model}: non-finite steady-state solution")

    v = np.zeros(d * d, dtype=complex)
    v[idx] = x
    rho, lmin = _clean(unvec(v, d))
    norm = spla.norm(L)
    residual = float(np.linalg.norm(L @ vec(rho)) / norm)
    if residual > tol:
        raise NonConvergenceError(
            f"{gen.model}: steady-state residual {residual:.3g} exceeds {tol:.3g}")
    out = DensityMatrix(rho, gen.frame, {"residual": residual, "min_eig": lmin,
                                         "block_dim": len(idx), "method": "direct"})
    return out.validate()


def steady_state_eig(gen: Generator, k: int = 3, sector: bool = True):
    """Eigenvalues of ``gen.total`` closest to zero and the zero-mode state.

    Intended for degeneracy diagnostics: more than one eigenvalue near zero
    signals a non-unique steady state.
    """
    d = gen.dim
    idx = photon_diagonal_indices(gen.dims) if sector else np.arange(d * d)
    A = gen.total[idx][:, idx].tocsc()
    k = min(k, A.shape[0] - 2)
    vals, vecs = spla.eigs(A, k=k, sigma=0, which="LM")
    order = np.argsort(np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    v = np.zeros(d * d, dtype=complex)
    v[idx] = vecs[:, 0]
    rho = unvec(v, d)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return vals, DensityMatrix(rho, gen.frame, {"method": "eig"})


def kernel_dimension(gen: Generator, tol: float = 1e-10, k: int = 4) -> int:
    vals, _ = steady_state_eig(gen, k=k)
    scale = spla.norm(gen.total)
    return int(np.sum(np.abs(vals) < tol * scale))


# sectors up to this size are propagated with a dense matrix exponential
DENSE_SECTOR_LIMIT = 2500


def photon_difference_sectors(dims: SystemDims) -> dict:
    """vec indices grouped by the photon-number difference n_c − n_c' of the entry.

    Every generator here commutes with the commutator of n_c, so each group
    evolves independently.
    """
    d = dims.joint
    n = np.arange(d) // dims.n_m
    k = (n[:, None] - n[None, :]).ravel(order="F")
    return {int(s): np.flatnonzero(k == s) for s in np.unique(k)}


def _commutes(L, A, scale) -> bool:
    C = L @ A - A @ L
    return C.nnz == 0 or abs(C).max() <= 1e-13 * scale


def _frame_shift(gen: Generator):
    """Largest diagonal operator whose commutator commutes with ``gen.total``.

    Returns ``(diagonal, superoperator)``, or ``(zeros, None)`` when no
    candidate qualifies.  Removing −i[D, ·] from the generator and rotating
    back afterwards is exact and strips the fast free oscillation.
    """
    from .fock import mode_operators
    from .generators import commutator_super

    ops = mode_operators(gen.dims)
    L = gen.total.tocsr()
    scale = abs(L).max()
    candidates = (sp.diags(gen.hamiltonian.diagonal()),
                  ops.n_c + gen.params.omega_m * ops.n_m, ops.n_c)
    for D in candidates:
        A = commutator_super(D)
        if _commutes(L, A, scale):
            return np.asarray(D.diagonal()).real, A
    return np.zeros(gen.dim), None


def _propagate_exact(gen: Generator, y0, t):
    from .fock import mode_operators
    from .generators import commutator_super

    d = gen.dim
    L = gen.total.tocsr()
    conserves = _commutes(L, commutator_super(mode_operators(gen.dims).n_c), abs(L).max())
    sectors = photon_difference_sectors(gen.dims) if conserves else {0: np.arange(d * d)}
    diag, A = _frame_shift(gen)
    if A is not None:
        L = (L - A).tocsr()
    Y = np.zeros((d * d, len(t)), dtype=complex)
    Y[:, 0] = y0
    dts = np.diff(t)
    for idx in sectors.values():
        ys = y0[idx]
        if not np.any(ys):
            continue
        Ls = L[idx][:, idx]
        if len(idx) <= DENSE_SECTOR_LIMIT:
            Ld = Ls.toarray()
            cache = {}
            for i, dt in enumerate(dts, start=1):
                if dt not in cache:
                    cache[dt] = la.expm(Ld * dt)
                ys = cache[dt] @ ys
                Y[idx, i] = ys
        else:
            Ls = Ls.tocsc()
            for i, dt in enumerate(dts, start=1):
                ys = spla.expm_multiply(Ls * dt, ys)
                Y[idx, i] = ys
    # back to the original frame: ρ → e^{−iDt} ρ e^{iDt}
    for i, ti in enumerate(t):
        ph = np.exp(-1j * diag * ti)
        Y[:, i] *= np.kron(ph.conj(), ph)
    return Y


def evolve(gen: Generator, rho0, t_grid, *, rtol: float = 1e-10, atol: float = 1e-12,
           method: str = "exact") -> list[DensityMatrix]:
    """Propagate dρ/dt = L ρ and return ρ at each time in ``t_grid``.

    ``method="exact"`` applies matrix-exponential propagators (scaling and
    squaring, unconditionally stable for stiff generators) sector by sector
    in a frame that removes the free oscillation.  Any ``solve_ivp`` method
    name (e.g. ``"BDF"``) integrates the full equation adaptively instead.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0 or t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    rho0 = np.asarray(getattr(rho0, "matrix", rho0), dtype=complex)
    d = gen.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 has shape {rho0.shape}, generator acts on dimension {d}")
    y0 = vec(rho0).astype(complex)
    if len(t) == 1:
        return [DensityMatrix(rho0.copy(), gen.frame, {"t": 0.0, "trace_drift": 0.0})]

    if method == "exact":
        Y = _propagate_exact(gen, y0, t)
        if not np.all(np.isfinite(Y)):
            raise StiffnessError(f"{gen.model}: propagator produced non-finite values")
    else:
        L = gen.total.tocsr()
        sol = solve_ivp(lambda _t, y: L @ y, (t[0], t[-1]), y0, method=method, t_eval=t,
                        jac=L, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StiffnessError(
                f"{gen.model} integration failed at t={sol.t[-1]:.6g}: {sol.message}")
        Y = sol.y
    tr0 = np.trace(rho0)
    out = []
    for i, ti in enumerate(t):
        rho = unvec(Y[:, i], d)
        drift = abs(np.trace(rho) - tr0)
        out.append(DensityMatrix(rho, gen.frame, {"t": float(ti), "trace_drift": float(drift)}))
    return out


def estimate_memory_mb(dims: SystemDims, model: str = "SME", sidebands: int = 0) -> float:
    """Rough peak memory of generator assembly plus the block factorization."""
    d2 = dims.joint**2
    shifts = 2 * (sidebands // 2) + 1 if model.upper() == "GME" else 1
    nnz_super = d2 * (10 + 4 * shifts) * 2  # total + parts
    block = dims.n_c * dims.n_m**2
    nnz_lu = block * 4 * dims.n_m  # banded fill-in
    return (nnz_super + nnz_lu) * 20 / 2**20


@dataclass
class CutoffConvergence:
    dims: SystemDims
    J_c: float
    trace: list = field(default_factory=list)


def _current(params, dims, model, sidebands, **kw) -> float:
    from .thermo import heat_current

    gen = build_generator(params, dims, model, sidebands, **kw)
    return heat_current(gen, steady_state(gen), "optical")


def converge_cutoffs(params: PhysicalParams, model: str, sidebands: int | None = None,
                     start_dims: SystemDims = SystemDims(6, 25), rel_tol: float = 1e-4, *,
                     memory_budget_mb: float = 4096.0, growth: float = 1.5,
                     abs_floor: float = 1e-14, **gen_kwargs) -> CutoffConvergence:
    """Grow the Fock cutoffs until the steady-state optical current settles.

    Each mode is grown geometrically in turn (phonons first); a step is
    accepted when it changes J_c by more than ``rel_tol`` relatively.  The
    smaller dims of the last non-improving pair are returned.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be > 0")
    seen = {}

    def current(dims):
        # a second sweep over the axes revisits earlier candidates
        if dims not in seen:
            seen[dims] = _current(params, dims, model, sidebands, **gen_kwargs)
            trace.append((dims, seen[dims]))
        return seen[dims]

    trace = []
    dims = start_dims
    J = current(dims)

    def grow(dims, axis):
        if axis == "n_m":
            return SystemDims(dims.n_c, max(dims.n_m + 1, math.ceil(dims.n_m * growth)))
        return SystemDims(max(dims.n_c + 1, math.ceil(dims.n_c * growth)), dims.n_m)

    last_delta = None
    changed = True
    while changed:
        changed = False
        for axis in ("n_m", "n_c"):
            while True:
                cand = grow(dims, axis)
                if estimate_memory_mb(cand, model, sidebands or 0) > memory_budget_mb:
                    raise BudgetExceededError(
                        f"cutoffs {cand} exceed the {memory_budget_mb} MB budget "
                        f"(last relative change {last_delta})", last_delta)
                J_new = current(cand)
                diff = abs(J_new - J)
                scale = max(abs(J_new), abs(J))
                last_delta = diff / scale if scale > 0 else 0.0
                log.debug("cutoffs %s -> %s: J_c %.12g -> %.12g", dims, cand, J, J_new)
                if diff <= rel_tol * scale or diff <= abs_floor:
                    break
                dims, J = cand, J_new
                changed = True
    return CutoffConvergence(dims, J, trace)
