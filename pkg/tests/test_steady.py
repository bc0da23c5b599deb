import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density, scenario_params
from omheat.fock import SystemDims, mode_operators
from omheat.generators import GME_SIDEBANDS, build_generator
from omheat.params import PhysicalParams, thermal_state
from omheat.steady import (
    BudgetExceededError,
    DensityMatrix,
    InvalidStateError,
    check_density_matrix,
    converge_cutoffs,
    evolve,
    kernel_dimension,
    photon_difference_sectors,
    photon_diagonal_indices,
    steady_state,
    steady_state_eig,
    trace_distance,
)

BUILDS = [("SME", None), ("DSME", None)] + [("GME", s) for s in GME_SIDEBANDS]


def test_sme_uncoupled_is_thermal_product():
    p = scenario_params("fig2", g=0.0)
    dims = SystemDims(5, 90)
    rho = steady_state(build_generator(p, dims, "SME"))
    ops = mode_operators(dims)
    assert rho.expect(ops.n_c) == pytest.approx(p.nbar_c, abs=1e-8)
    assert rho.expect(ops.n_m) == pytest.approx(p.nbar_m, abs=1e-8)
    gibbs = np.kron(thermal_state(1.0, p.T_c, 5), thermal_state(p.omega_m, p.T_m, 90))
    assert trace_distance(rho, gibbs) < 1e-10


def test_sme_photon_number_unchanged_by_coupling():
    # the photon number of the standard model stays at the bath value
    p = scenario_params("fig2", g=0.05)
    dims = SystemDims(5, 80)
    rho = steady_state(build_generator(p, dims, "SME"))
    assert rho.expect(mode_operators(dims).n_c) == pytest.approx(p.nbar_c, abs=1e-8)


@given(st.sampled_from(BUILDS), st.floats(0.0, 0.1), st.sampled_from(["fig2", "fig3", "fig4"]))
def test_steady_state_invariants(build, g, scenario):
    gen = build_generator(scenario_params(scenario, g=g), SystemDims(3, 10), *build)
    rho = steady_state(gen)
    M = rho.matrix
    assert np.abs(M - M.conj().T).max() <= 1e-10
    assert abs(np.trace(M) - 1) <= 1e-10
    assert np.linalg.eigvalsh(M).min() >= -1e-8
    assert rho.frame == gen.frame
    assert rho.info["residual"] <= 1e-9
    # idempotence: the output is annihilated by the generator
    assert np.linalg.norm(gen.apply(M)) <= 1e-9 * np.linalg.norm(gen.total.toarray())


@pytest.mark.parametrize("build", BUILDS)
def test_direct_and_eigen_solvers_agree(build):
    gen = build_generator(scenario_params("fig4", g=0.06), SystemDims(3, 12), *build)
    direct = steady_state(gen)
    vals, eig = steady_state_eig(gen)
    assert abs(vals[0]) < 1e-10
    assert trace_distance(direct, eig) < 1e-8
    assert kernel_dimension(gen) == 1


def test_sector_restriction_matches_full_solve():
    gen = build_generator(scenario_params("fig2", g=0.05), SystemDims(3, 8), "GME", 4)
    a = steady_state(gen)
    b = steady_state(gen, sector=False)
    assert trace_distance(a, b) < 1e-12
    assert a.info["block_dim"] == 3 * 64


def test_photon_index_sets():
    dims = SystemDims(3, 4)
    sectors = photon_difference_sectors(dims)
    assert sorted(sectors) == [-2, -1, 0, 1, 2]
    assert sum(len(v) for v in sectors.values()) == dims.joint**2
    assert np.array_equal(np.sort(photon_diagonal_indices(dims)), sectors[0])


def test_density_matrix_validation():
    rho = np.diag([0.5, 0.5]).astype(complex)
    DensityMatrix(rho).validate()
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.diag([0.6, 0.5]))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.diag([1.1, -0.1]))


# --- time evolution ---------------------------------------------------------

def test_evolve_from_steady_state_is_stationary():
    p = scenario_params("fig2", g=0.05)
    gen = build_generator(p, SystemDims(3, 15), "SME")
    rho = steady_state(gen)
    ts = np.linspace(0, 10 / p.kappa_m, 5)
    for out in evolve(gen, rho, ts):
        assert np.abs(out.matrix - rho.matrix).max() < 1e-8


def test_single_photon_decay():
    p = PhysicalParams(g=0.0, T_c=0.0, T_m=0.0)
    dims = SystemDims(3, 4)
    gen = build_generator(p, dims, "SME")
    rho0 = np.zeros((dims.joint, dims.joint), dtype=complex)
    rho0[dims.index(1, 0), dims.index(1, 0)] = 1.0
    ts = np.linspace(0, 200, 11)
    n_c = mode_operators(dims).n_c
    for t, out in zip(ts, evolve(gen, rho0, ts)):
        assert out.expect(n_c) == pytest.approx(np.exp(-p.kappa_c * t), abs=1e-6)


@pytest.mark.parametrize("build", [("SME", None), ("DSME", None), ("GME", 2)])
def test_evolve_preserves_trace_and_hermiticity(build, rng):
    gen = build_generator(scenario_params("fig4", g=0.07), SystemDims(3, 8), *build)
    rho0 = random_density(gen.dim, rng)
    for out in evolve(gen, rho0, np.linspace(0, 300, 7)):
        assert out.info["trace_drift"] <= 1e-10
        assert np.abs(out.matrix - out.matrix.conj().T).max() <= 1e-10
        assert out.frame == gen.frame


@pytest.mark.parametrize("build", [("SME", None), ("GME", 4)])
def test_exact_propagation_matches_adaptive_integration(build, rng):
    gen = build_generator(scenario_params("fig2", g=0.05), SystemDims(2, 6), *build)
    rho0 = random_density(gen.dim, rng)
    ts = [0.0, 5.0, 40.0]
    exact = evolve(gen, rho0, ts)
    bdf = evolve(gen, rho0, ts, method="BDF")
    for a, b in zip(exact, bdf):
        assert trace_distance(a, b) < 1e-7


def test_long_time_evolution_reaches_steady_state(rng):
    p = scenario_params("fig2", g=0.05)
    gen = build_generator(p, SystemDims(3, 12), "DSME")
    rho0 = random_density(gen.dim, rng)
    final = evolve(gen, rho0, [0.0, 50 / p.kappa_m])[-1]
    assert trace_distance(final, steady_state(gen)) <= 1e-6


@pytest.mark.parametrize("grid", [[], [1.0, 2.0], [0.0, 2.0, 1.0], [0.0, 0.0]])
def test_evolve_rejects_bad_grids(grid):
    gen = build_generator(scenario_params("fig2"), SystemDims(2, 3), "SME")
    with pytest.raises(ValueError):
        evolve(gen, np.eye(6) / 6, grid)


def test_evolve_rejects_wrong_shape():
    gen = build_generator(scenario_params("fig2"), SystemDims(2, 3), "SME")
    with pytest.raises(ValueError):
        evolve(gen, np.eye(4) / 4, [0.0, 1.0])


# --- cutoff convergence -----------------------------------------------------

def test_uncoupled_converges_at_start():
    res = converge_cutoffs(scenario_params("fig2", g=0.0), "SME")
    assert res.dims == SystemDims(6, 25)


@pytest.fixture(scope="module")
def coupled_convergence():
    p = scenario_params("fig2", g=0.05)
    return (converge_cutoffs(p, "SME", rel_tol=1e-2), converge_cutoffs(p, "SME", rel_tol=1e-4))


def test_coupling_needs_more_phonons(coupled_convergence):
    loose, tight = coupled_convergence
    # recorded when this test was written: the tight run stops at (6, 86)
    assert tight.dims == SystemDims(6, 86)
    assert tight.dims.n_m > 25
    assert loose.dims.n_c <= tight.dims.n_c and loose.dims.n_m <= tight.dims.n_m
    assert len({d for d, _ in tight.trace}) == len(tight.trace)


def test_budget_exceeded():
    with pytest.raises(BudgetExceededError) as info:
        converge_cutoffs(scenario_params("fig2", g=0.05), "SME", start_dims=SystemDims(3, 10),
                         memory_budget_mb=1.0)
    assert info.value.last_delta is None
    with pytest.raises(ValueError):
        converge_cutoffs(scenario_params("fig2"), "SME", rel_tol=0.0)
