"""Pareto-optimal reinsurance under unknown dependence.

Layout:
    distributions   loss laws with exact quantile/layer integrals
    risk_measures   VaR / RVaR / ES on losses and on ceded parts
    contracts       the admissible indemnity families
    worst_case      dependence-uncertainty bounds and coupling oracles
    objectives      finite-level optimizers for the reinsurer problems
    asymptotic      CLT regime: closed-form retentions for many insurers
    search          deterministic grid/golden-section utilities
    cli             entry point for the table/figure reproductions
"""

__version__ = "0.1.0"

from .distributions import (
    Discrete,
    Distribution,
    DivergenceError,
    Exponential,
    Lomax,
    Normal,
    PointMass,
    TailShape,
    Uniform,
)
from .objectives import OptimizeResult, Scenario, minimize, total_risk
from .risk_measures import RiskLevels

__all__ = [
    "Discrete",
    "Distribution",
    "DivergenceError",
    "Exponential",
    "Lomax",
    "Normal",
    "OptimizeResult",
    "PointMass",
    "RiskLevels",
    "Scenario",
    "TailShape",
    "Uniform",
    "minimize",
    "total_risk",
    "__version__",
]
