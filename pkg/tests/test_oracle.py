import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import root

from conftest import embedded_density, scenario_params
from omheat.fock import SystemDims
from omheat.generators import build_generator
from omheat.oracle import (
    FIELDS,
    MomentState,
    OracleError,
    entropy_rate_closed,
    full_matrix_moments,
    heat_currents_closed,
    heat_currents_time,
    integrate_moments,
    moment_rhs,
    moment_steady_state,
    momentum_operator,
    relative_errors,
    thermal_moments,
)
from omheat.params import PhysicalParams

RAW = ("mean_nc", "mean_p", "mean_q", "mean_nm", "mom_nc_p", "mom_nc_q", "mom_nc2")

params_st = st.builds(
    lambda g, T_c, T_m: PhysicalParams(g=g, T_c=T_c, T_m=T_m),
    st.floats(0.0, 0.1), st.floats(0.05, 0.2), st.floats(0.05, 0.2))


@given(params_st, st.sampled_from(["SME", "DSME"]))
def test_closed_form_is_the_fixed_point(params, model):
    # independent route: numerical root of the stationary equations from the thermal guess
    def rhs(x):
        return moment_rhs(MomentState.from_array(x), params, model).to_array()

    sol = root(rhs, thermal_moments(params).to_array(), method="hybr", tol=1e-14)
    assert np.abs(rhs(sol.x)).max() < 1e-15
    ref = MomentState.from_array(sol.x)
    closed = moment_steady_state(params, model)
    errs = relative_errors(closed, ref, abs_floor=1e-14)
    assert max(errs.values()) < 1e-9, errs
    closed.check()


@pytest.mark.parametrize("model", ["SME", "DSME"])
@pytest.mark.parametrize("g", [0.0, 0.04])
def test_moment_equations_match_generator_action(model, g, rng):
    # d⟨X⟩/dt = Tr[X L ρ] on a state well inside the truncated space
    dims = SystemDims(6, 14)
    p = scenario_params("fig4", g=g)
    gen = build_generator(p, dims, model)
    rho = embedded_density(dims, (3, 7), rng)
    state = full_matrix_moments(gen, rho)
    rate = full_matrix_moments(gen, gen.apply(rho))
    rhs = moment_rhs(state, p, model)
    for f in RAW:
        assert getattr(rhs, f) == pytest.approx(getattr(rate, f), rel=1e-10, abs=1e-14), f
    # connected correlations follow by the product rule
    expect = {
        "var_nc": rate.mom_nc2 - 2 * state.mean_nc * rate.mean_nc,
        "corr_nc_p": rate.mom_nc_p - rate.mean_nc * state.mean_p - state.mean_nc * rate.mean_p,
        "corr_nc_q": rate.mom_nc_q - rate.mean_nc * state.mean_q - state.mean_nc * rate.mean_q,
    }
    for f, v in expect.items():
        assert getattr(rhs, f) == pytest.approx(v, rel=1e-10, abs=1e-14), f


def test_uncoupled_thermal_state_is_stationary():
    p = scenario_params("fig2", g=0.0)
    for model in ("SME", "DSME"):
        assert np.allclose(moment_rhs(thermal_moments(p), p, model).to_array(), 0, atol=1e-16)
        assert np.allclose(moment_steady_state(p, model).to_array(),
                           thermal_moments(p).to_array(), atol=1e-16)


def test_integration_relaxes_to_closed_form():
    p = scenario_params("fig2", g=0.05)
    for model in ("SME", "DSME"):
        traj = integrate_moments(thermal_moments(p), p, model, [0.0, 100.0, 200 / p.kappa_m])
        errs = relative_errors(traj[-1], moment_steady_state(p, model), abs_floor=1e-14)
        assert max(errs.values()) < 1e-8
        J_c, J_m = heat_currents_time(traj[-1], p, model)
        Jc_ss, Jm_ss = heat_currents_closed(p, model)
        assert J_c == pytest.approx(Jc_ss, rel=1e-6) and J_m == pytest.approx(Jm_ss, rel=1e-6)


def test_dressed_model_momentum_moments():
    p = scenario_params("fig2", g=0.05)
    st_ = moment_steady_state(p, "DSME")
    assert st_.mean_p == 0.0
    var = p.nbar_c * (p.nbar_c + 1)
    assert st_.corr_nc_p == pytest.approx(
        2 * p.g * p.kappa_c / (p.omega_m**2 + p.kappa**2) * var, rel=1e-13)
    # the local model keeps the extra −αω_mκ_m piece at α = 0, i.e. 2gκ rather than 2gκ_c
    sme = moment_steady_state(p, "SME")
    assert sme.corr_nc_p == pytest.approx(2 * p.g * p.kappa / (p.omega_m**2 + p.kappa**2) * var,
                                          rel=1e-13)


@given(params_st, st.sampled_from(["SME", "DSME"]))
def test_closed_currents_and_entropy_consistent(params, model):
    J_c, J_m = heat_currents_closed(params, model)
    assert J_m == -J_c
    Jc_t, Jm_t = heat_currents_time(moment_steady_state(params, model), params, model)
    assert Jc_t == pytest.approx(J_c, rel=1e-9, abs=1e-18)
    assert Jm_t == pytest.approx(J_m, rel=1e-9, abs=1e-18)
    xi = entropy_rate_closed(params, model)
    assert xi == pytest.approx(-(J_c / params.theta_c + J_m / params.theta_m), rel=1e-12, abs=1e-20)


def test_dressed_entropy_rate_sign():
    # the dressed model produces entropy of either sign depending on the bath ordering
    for scenario in ("fig2", "fig4"):
        assert entropy_rate_closed(scenario_params(scenario, g=0.05), "DSME") != 0


def test_oracle_errors():
    p = scenario_params("fig2", g=0.05)
    with pytest.raises(OracleError):
        moment_steady_state(p, "GME")
    with pytest.raises(OracleError):
        entropy_rate_closed(PhysicalParams(g=0.05, T_c=0.0, T_m=0.1), "SME")
    with pytest.raises(OracleError):
        MomentState.from_array(np.zeros(9))
    with pytest.raises(OracleError):
        MomentState(0.1, 0, 0, -1.0, 0, 0, 1.0, 0, 0, 0.0).check()
    with pytest.raises(OracleError):
        MomentState(0.1, 0, 0, 0.5, 0.3, 0, 1.0, 0, 0, 0.51).check()
    with pytest.raises(ValueError):
        integrate_moments(thermal_moments(p), p, "SME", [1.0, 2.0])


def test_momentum_operator():
    dims = SystemDims(2, 5)
    P = momentum_operator(dims).toarray()
    assert np.allclose(P, P.conj().T)
    # ⟨p⟩ > 0 for the state (|0⟩ + i|1⟩)/√2 in the phonon mode
    psi = np.zeros(dims.joint, dtype=complex)
    psi[0], psi[1] = 1 / np.sqrt(2), 1j / np.sqrt(2)
    assert np.real(psi.conj() @ P @ psi) == pytest.approx(1.0)


def test_relative_errors_pair_scaling():
    ref = MomentState(1.0, 0.0, 2.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0, 2.0)
    other = MomentState.from_array(ref.to_array() + np.r_[0, 1e-3, 0, 0, 0, 0, 0, 0, 0, 0])
    errs = relative_errors(other, ref)
    assert errs["mean_p"] == pytest.approx(5e-4)
    assert set(errs) == set(FIELDS)
