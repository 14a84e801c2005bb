"""Conditional photon-count measurement protocols for W and Bell state generation
in n two-level emitters sharing one cavity mode."""

from .closed_form import (
    chain_amplitudes,
    node_times,
    p_and_f,
    p_and_f_two_qw,
    purification_yield,
    superop_eigenvalue,
)
from .conditional import (
    ConditionalOperator,
    SpectralReport,
    completeness_defect,
    conditional_operator,
    eigen_residual,
    spectrum,
)
from .errors import NumericalError, ParameterError
from .hamiltonian import HermitianOperator, UnitaryOperator, evolve, hamiltonian, propagator
from .protocol import (
    ProtocolTrace,
    initialize_two_photon,
    rabi_amplitudes,
    run_conditional,
    two_quanta_frequency_check,
)
from .sector import (
    DensityMatrix,
    PureState,
    QubitConfig,
    QubitSpace,
    SectorBasis,
    canonical_state,
    enumerate_sector,
    fidelity_to,
    maximally_mixed,
    parse_ket,
)
from .trajectories import TrajectoryStats, run_trajectories

__version__ = "0.1.0"
