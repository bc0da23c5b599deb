import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omheat.fock import SystemDims, mode_operators
from omheat.params import (
    OMEGA_C_PHYS,
    ParameterError,
    PhysicalParams,
    bose_einstein,
    current_to_si,
    entropy_rate_to_si,
    hamiltonian,
    polaron_hamiltonian,
    polaron_unitary,
    reduced_temperature,
    spectral_G,
    spectral_density_zero,
    thermal_populations,
)

mp.mp.dps = 40
# SI-defining constants (exact), independent of scipy.constants
H_PLANCK = mp.mpf("6.62607015e-34")
K_BOLTZ = mp.mpf("1.380649e-23")
HBAR_MP = H_PLANCK / (2 * mp.pi)
WC_MP = 2 * mp.pi * mp.mpf("1e10")


def nbar_oracle(omega, T):
    x = HBAR_MP * mp.mpf(omega) * WC_MP / (K_BOLTZ * mp.mpf(T))
    return float(1 / mp.expm1(x))


def test_bose_einstein_optical_mode():
    # frozen from the high-precision oracle at x = 4.52759
    assert bose_einstein(1.0, 0.106) == pytest.approx(0.010924773441205770, rel=1e-12)
    assert bose_einstein(1.0, 0.106) == pytest.approx(nbar_oracle(1, "0.106"), rel=1e-12)


def test_bose_einstein_mechanical_mode():
    # frozen from the high-precision oracle at x = 0.285104
    assert bose_einstein(0.06, 0.101) == pytest.approx(3.0312240570483494, rel=1e-12)


def test_bose_einstein_zero_temperature_and_domain():
    assert bose_einstein(0.3, 0.0) == 0.0
    for bad in (0.0, -1.0):
        with pytest.raises(ParameterError):
            bose_einstein(bad, 0.1)
    with pytest.raises(ParameterError):
        bose_einstein(1.0, -0.1)


@given(st.floats(1e-3, 5), st.floats(1e-3, 2.0))
def test_bose_einstein_matches_oracle(omega, T):
    assert bose_einstein(omega, T) == pytest.approx(nbar_oracle(omega, T), rel=1e-11)


# T >= 20 mK keeps e^{-x} clear of underflow across the range
@given(st.floats(1e-3, 5), st.floats(0.02, 2), st.floats(1.01, 3))
def test_bose_einstein_monotone(omega, T, factor):
    n = bose_einstein(omega, T)
    assert bose_einstein(omega * factor, T) < n
    assert bose_einstein(omega, T * factor) > n


def test_spectral_G_examples():
    assert spectral_G(0.02, 1.0, 0.0) == 0.02
    assert spectral_G(0.02, -1.0, 0.0) == 0.0
    # κ n̄ with n̄ from the oracle above
    assert spectral_G(0.005, -0.06, 0.101) == pytest.approx(0.015156120285241747, rel=1e-12)
    with pytest.raises(ParameterError):
        spectral_G(0.02, 0.0, 0.1)


@given(st.floats(1e-3, 1), st.floats(1e-3, 3), st.floats(1e-3, 1.0))
def test_detailed_balance(kappa, omega, T):
    x = HBAR_MP * mp.mpf(omega) * WC_MP / (K_BOLTZ * mp.mpf(T))
    ratio = spectral_G(kappa, -omega, T) / spectral_G(kappa, omega, T)
    assert ratio == pytest.approx(float(mp.exp(-x)), rel=1e-12)


def test_spectral_density_zero():
    p = PhysicalParams(kappa_m=0.005, omega_m=0.06, T_m=0.106)
    # 4 κ_m θ_m / ω_m with θ_m = 0.220868 from the oracle constants
    assert spectral_density_zero(p) == pytest.approx(0.073622720902424091, rel=1e-12)
    assert spectral_density_zero(p.replace(T_m=0.0)) == 0.0
    assert spectral_density_zero(p.replace(T_m=0.212)) == pytest.approx(
        2 * spectral_density_zero(p), rel=1e-14)
    assert spectral_density_zero(p.replace(gm0_override=0.5)) == 0.5


def test_reduced_units():
    theta = reduced_temperature(0.106)
    assert theta == pytest.approx(float(K_BOLTZ * mp.mpf("0.106") / (HBAR_MP * WC_MP)), rel=1e-13)
    assert current_to_si(1.0) == pytest.approx(float(HBAR_MP * WC_MP**2), rel=1e-13)
    assert entropy_rate_to_si(1.0) == pytest.approx(float(K_BOLTZ * WC_MP), rel=1e-13)
    assert OMEGA_C_PHYS == 2 * math.pi * 1e10


def test_derived_quantities():
    p = PhysicalParams(g=0.03, omega_m=0.06, kappa_c=0.02, kappa_m=0.005)
    assert p.alpha == pytest.approx(0.5)
    assert p.kappa == pytest.approx(0.0225)
    with pytest.raises(Exception):
        p.g = 0.1  # frozen


@pytest.mark.parametrize("field,value", [
    ("omega_c_phys", 0.0), ("omega_m", 0.0), ("omega_m", 1.0), ("g", -0.1),
    ("kappa_c", 0.0), ("kappa_m", -1.0), ("T_c", -0.01), ("T_m", -0.01), ("gm0_override", -1.0),
])
def test_param_validation(field, value):
    with pytest.raises(ParameterError):
        PhysicalParams(**{field: value})


def test_hamiltonian_examples():
    dims = SystemDims(3, 4)
    H0 = hamiltonian(PhysicalParams(g=0.0), dims)
    ops = mode_operators(dims)
    expected = (ops.n_c + 0.06 * ops.n_m).toarray()
    assert np.array_equal(H0, expected)
    H = hamiltonian(PhysicalParams(g=0.07), dims)
    assert np.array_equal(H, H.conj().T)
    assert H[0, 0] == 0
    assert np.array_equal(hamiltonian(PhysicalParams(g=0.07), dims, sparse=True).toarray(), H)


def test_polaron_hamiltonian_examples():
    dims = SystemDims(3, 4)
    assert np.array_equal(polaron_hamiltonian(PhysicalParams(g=0.0), dims),
                          hamiltonian(PhysicalParams(g=0.0), dims))
    p = PhysicalParams(g=0.05)
    Ht = polaron_hamiltonian(p, dims)
    assert np.count_nonzero(Ht - np.diag(np.diag(Ht))) == 0
    assert Ht[dims.index(1, 0), dims.index(1, 0)] == pytest.approx(1 - 0.05**2 / 0.06, rel=1e-15)


def test_polaron_unitary():
    dims = SystemDims(3, 40)
    assert np.array_equal(polaron_unitary(PhysicalParams(g=0.0), dims), np.eye(dims.joint))
    p = PhysicalParams(g=0.03)
    S = polaron_unitary(p, dims)
    assert np.allclose(S.conj().T @ S, np.eye(dims.joint), atol=1e-10)
    nc = mode_operators(dims).n_c.toarray()
    assert np.allclose(S @ nc @ S.conj().T, nc, atol=1e-12)


def test_polaron_frame_spectrum_matches_lab_frame():
    # unitary equivalence, checked on levels far from the phonon cutoff
    p = PhysicalParams(g=0.02)
    dims = SystemDims(3, 60)
    lab = np.sort(np.linalg.eigvalsh(hamiltonian(p, dims)))
    pol = np.sort(np.diag(polaron_hamiltonian(p, dims)).real)
    low = pol < 1.5  # photon number <= 1 and phonon number well below the cutoff
    assert np.allclose(lab[low], pol[low], rtol=1e-8, atol=1e-12)


def test_thermal_populations():
    p = thermal_populations(0.06, 0.101, 200)
    nbar = float(np.arange(200) @ p)
    assert nbar == pytest.approx(bose_einstein(0.06, 0.101), rel=1e-12)
    assert np.array_equal(thermal_populations(1.0, 0.0, 3), [1.0, 0.0, 0.0])
