"""Frequency-based Kelly-optimal portfolios over finite scenario return models."""

from .certificates import (
    DominanceReport,
    OptimalityCertificate,
    dominance_condition,
    expected_ratio_asset,
    expected_relative_wealth,
    find_dominant,
    kkt_certify,
)
from .elg import ElgValue, elg_exact, elg_gradient, elg_mc, log_growth_realized
from .errors import (
    EnumerationCapError,
    InsufficientHistoryError,
    InvalidInputError,
    KellyError,
    ModeMismatchError,
    NonFiniteObjectiveError,
)
from .returns_model import (
    CompoundReturnDistribution,
    JointReturnDistribution,
    compound_exact,
    compound_sample,
    load_distribution,
    new_joint_distribution,
    returns_from_prices,
    with_riskless,
)
from .solver import OptimizationResult, SolverOptions, grid_oracle, project_to_simplex, solve

__version__ = "0.1.0"
