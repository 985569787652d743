"""Flux-qubit/resonator simulator for ultrastrong-coupling spectroscopy.

Exact, rotating-wave, and dispersive (Bloch-Siegert) eigensystems of the
coupled system; dressed-state transition matrix elements and selection-rule
diagnostics; driven-dissipative steady states from a second-order
time-convolutionless master equation; spectroscopy sweeps with an
experiment-facing readout transduction.
"""

from ._version import __version__
from .constants import HBAR, H_PLANCK, K_B, PHI_0
from .operators import (
    HilbertSpace,
    TruncationError,
    annihilation,
    expectation,
    fock_space,
    number_operator,
    parity_operator,
    pauli,
    quadrature_x,
)
from .models import (
    EigenSystem,
    LabelingError,
    PerturbativeValidityError,
    SystemParams,
    bs_dressed_states,
    bs_eigenvalues,
    bs_ground_energy,
    bs_hamiltonian,
    doublet_params,
    eigensystem,
    jc_hamiltonian,
    label_dressed,
    qubit_from_flux,
    rabi_hamiltonian,
)
from .transitions import (
    TransitionTable,
    bs_element_qubit,
    bs_element_resonator,
    multiphoton_scaling_check,
    numeric_matrix_element,
    ratio_curve,
    transition_table,
)
from .dynamics import (
    BathChannel,
    Dissipators,
    DriveSpec,
    SteadyStateCriteria,
    SteadyStateTimeoutError,
    bose_occupation,
    build_dissipators,
    evolve,
    steady_state,
    tcpom_rhs,
    thermal_state,
    trace_distance,
)
from .spectroscopy import (
    SweepConfig,
    SweepResult,
    TransductionMap,
    calibrate,
    excited_probability,
    line_trace,
    observable_sigma_z,
    qubit_excited_population,
    sweep,
    transduce,
)
from .config import ConfigError, RunConfig
from .presets import PRESETS

__all__ = [name for name in dir() if not name.startswith("_")]
