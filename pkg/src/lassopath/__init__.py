"""Pathwise Lasso by LARS homotopy, with error-tolerant variants and certificates."""

from .core import Event, Kink, LassoProblem, RegularisationPath, lambda_max, lasso_cost, path_eval
from .lars import ApproxConfig, lars_approx, lars_exact, lars_quantum_simple, solve
from .oracle import QueryLedger
from .verify import certify_path, duality_gap, kkt_check, lasso_oracle

__version__ = "0.1.0"

__all__ = [
    "Event", "Kink", "LassoProblem", "RegularisationPath", "lambda_max", "lasso_cost", "path_eval",
    "ApproxConfig", "lars_approx", "lars_exact", "lars_quantum_simple", "solve", "QueryLedger",
    "certify_path", "duality_gap", "kkt_check", "lasso_oracle",
]
