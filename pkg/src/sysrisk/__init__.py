"""Systemic-risk toolkit for interbank networks.

Propagates small shocks through exposure networks, decomposes the
macroeconomic shock multiplier into node-local and network terms, and
searches for exposure configurations with extremal systemic risk under
fixed single-bank totals.
"""

from .amplification import (
    PsiReport,
    SystemLossReport,
    h_infinity_general,
    psi_full,
    psi_local_terms,
    risk_matrix,
)
from .analytic import (
    TwoTypeModel,
    constant_leverage_psi,
    constant_leverage_psi_limit,
    two_type_bank_set,
    two_type_exposure_matrix,
    two_type_lambda_matrix,
    two_type_psi,
    two_type_spectral_radius,
)
from .core import (
    BankSet,
    ExposureMatrix,
    LambdaMatrix,
    ValidationReport,
    build_bank_set,
    lambda_from_exposures,
    spectral_radius,
    validate_exposures,
    validate_margins,
)
from .errors import (
    ConvergenceFailure,
    DegenerateBank,
    DegenerateProperty,
    DimensionMismatch,
    ExposureConstraintError,
    InfeasibleMargins,
    InvalidSpec,
    KappaOutOfRange,
    MarketImbalance,
    NegativeExposure,
    NonPositiveEquity,
    ParseError,
    SelfLoopEdge,
    SupercriticalSystem,
    SupercriticalWarning,
    SysriskError,
    UnknownNodeId,
)
from .experiment import (
    ChainSpec,
    ExperimentConfig,
    MetricsSpec,
    NetworkInput,
    load_experiment_config,
    run_chain,
    run_experiment,
)
from .generators import PopulationSpec, generate_population, reconstruct_equity
from .io import LoadedNetwork, load_network, write_network
from .metrics import (
    AssortativityResult,
    NetworkSummary,
    edge_property_correlation,
    network_summary,
    scalar_assortativity,
)
from .optimizer import (
    AnnealConfig,
    AnnealResult,
    AnnealTrace,
    DMove,
    anneal,
    apply_d_move,
    initial_feasible_matrix,
    objective,
    propose_d_move,
)
from .propagation import (
    InitialShock,
    PropagationState,
    ShockSampleSummary,
    h_infinity_exact,
    initial_shock_from_target,
    propagate,
    sample_no_bankruptcy_shocks,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
