"""Heat transport through a single-mode optomechanical system.

Three open-system generators are provided (standard local, dressed-state and
global/sideband master equations) together with steady-state solvers, bath
resolved heat currents, entropy production and a closed-form moment oracle for
the two local models.
"""

__version__ = "0.1.0"

from .fock import SystemDims, annihilation, creation, matrix_exp, tensor
from .params import (
    PhysicalParams,
    bose_einstein,
    hamiltonian,
    polaron_hamiltonian,
    polaron_unitary,
    spectral_G,
    spectral_density_zero,
)
from .generators import (
    Generator,
    JumpChannel,
    build_dsme,
    build_generator,
    build_gme,
    build_sme,
    dissipator_super,
    sideband_channels,
)
from .steady import DensityMatrix, converge_cutoffs, evolve, steady_state
from .thermo import (
    ThermoReport,
    entropy_production_rate,
    entropy_vn,
    first_law_check,
    heat_current,
)
from .oracle import MomentState, entropy_rate_closed, heat_currents_closed, moment_steady_state
from .config import RunConfig, load_config, parse_config
from .sweep import SweepRow, emit_csv, read_csv, run_sweep

__all__ = [
    "__version__",
    "SystemDims",
    "annihilation",
    "creation",
    "matrix_exp",
    "tensor",
    "PhysicalParams",
    "bose_einstein",
    "hamiltonian",
    "polaron_hamiltonian",
    "polaron_unitary",
    "spectral_G",
    "spectral_density_zero",
    "Generator",
    "JumpChannel",
    "build_dsme",
    "build_generator",
    "build_gme",
    "build_sme",
    "dissipator_super",
    "sideband_channels",
    "DensityMatrix",
    "converge_cutoffs",
    "evolve",
    "steady_state",
    "ThermoReport",
    "entropy_production_rate",
    "entropy_vn",
    "first_law_check",
    "heat_current",
    "MomentState",
    "entropy_rate_closed",
    "heat_currents_closed",
    "moment_steady_state",
    "RunConfig",
    "load_config",
    "parse_config",
    "SweepRow",
    "emit_csv",
    "read_csv",
    "run_sweep",
]
