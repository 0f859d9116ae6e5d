"""Pure Markov tripartite states, recovery-map reduced dynamics, and
correlation measures.

Construct canonical pure Markov states, build the recovery map and the
reduced-dynamics channel it induces for any joint unitary, verify complete
positivity and trace preservation on the system support, and compute
entanglement of formation, discord and classical correlations, all of which
collapse to the environment entropy on Markov inputs.
"""

from .backend import BACKEND
from .channel import (
    ChannelVerification,
    HolevoDecomposition,
    QuantumChannel,
    choi_and_verify,
    choi_matrix,
    evolve_tripartite,
    holevo_decompose,
    kraus_operators,
    reduced_channel_apply,
)
from .correlations import (
    POVM,
    CorrelationBound,
    CorrelationReport,
    Ensemble,
    OptimizerConfig,
    classical_correlation,
    discord,
    eof,
    identity_suite,
    steer,
)
from .entropy import (
    EntropyReport,
    MarkovCheck,
    conditional_mutual_information,
    entropy_report,
    is_markov_state,
    mutual_information,
    von_neumann_entropy,
)
from .linalg import (
    EigenDecomposition,
    hermitian_eig,
    matrix_func_on_support,
    partial_trace,
    tensor,
    trace_norm_distance,
)
from .markovscan import (
    Hamiltonian,
    ScanReport,
    divisibility_check,
    product_residual,
    scan,
    trajectory,
)
from .qstate import (
    DensityMatrix,
    PureMarkovSpec,
    PureState,
    RankReport,
    SystemLayout,
    make_pure_markov,
    marginal,
    markov_spec_from_state,
    purify,
    random_markov_spec,
    random_state,
    random_unitary,
    rank_report,
)
from .recovery import PetzMap, petz_apply, reconstruct_tripartite, recovery_residual

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelVerification",
    "CorrelationBound",
    "CorrelationReport",
    "DensityMatrix",
    "EigenDecomposition",
    "Ensemble",
    "EntropyReport",
    "Hamiltonian",
    "HolevoDecomposition",
    "MarkovCheck",
    "OptimizerConfig",
    "POVM",
    "PetzMap",
    "PureMarkovSpec",
    "PureState",
    "QuantumChannel",
    "RankReport",
    "ScanReport",
    "SystemLayout",
    "choi_and_verify",
    "choi_matrix",
    "classical_correlation",
    "conditional_mutual_information",
    "discord",
    "divisibility_check",
    "entropy_report",
    "eof",
    "evolve_tripartite",
    "hermitian_eig",
    "holevo_decompose",
    "identity_suite",
    "is_markov_state",
    "kraus_operators",
    "make_pure_markov",
    "marginal",
    "markov_spec_from_state",
    "matrix_func_on_support",
    "mutual_information",
    "partial_trace",
    "petz_apply",
    "product_residual",
    "purify",
    "random_markov_spec",
    "random_state",
    "random_unitary",
    "rank_report",
    "reconstruct_tripartite",
    "recovery_residual",
    "reduced_channel_apply",
    "scan",
    "steer",
    "tensor",
    "trace_norm_distance",
    "trajectory",
    "von_neumann_entropy",
]
