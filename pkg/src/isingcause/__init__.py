"""Common-cause analysis of Bell-violating correlations in the local quantum Ising model."""
from . import algebra, classical, net, qcausal, search
from .algebra import ONE, ZERO, AlgebraElement, U, adjoint, from_matrix, mul, rep, trace
from .errors import *  # noqa: F401,F403
from .net import (
    LatticeState,
    region_A,
    region_B,
    region_C,
    spin_projection_A,
    spin_projection_B,
    state_rho,
)
from .qcausal import (
    PartitionOfUnit,
    ch_value,
    chsh_value,
    correlation,
    verify_ccs,
    verify_joint_ccs,
)
from .search import (
    STANDARD_DIRECTIONS,
    CandidateC,
    SearchConfig,
    bell_maximize,
    build_candidate,
    search_commuting,
    search_noncommuting,
    verify_prop3,
)

__version__ = "0.1.0"
