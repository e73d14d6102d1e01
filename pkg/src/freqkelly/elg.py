"""
Expected logarithmic growth per step for a rebalancing period n:

    g_n(K) = (1/n) E[log(1 + K . C)]

where C is the compound return vector over one period. Exact evaluation
sums over enumerated outcomes; Monte Carlo evaluation averages over drawn
outcomes and reports a standard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ModeMismatchError
from .returns_model import CompoundReturnDistribution


@dataclass(frozen=True)
class ElgValue:
    value: float
    stderr: float
    mode: str

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "mode": self.mode}


def _require_exact(compound: CompoundReturnDistribution) -> None:
    if not compound.is_exact:
        raise ModeMismatchError("operation requires an exact-mode compound distribution")


def portfolio_returns(outcomes: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Portfolio return ``K . x`` for every outcome row, checked to exceed -1."""
    r = np.asarray(outcomes, dtype=np.float64) @ np.asarray(K, dtype=np.float64)
    if np.any(~(r > -1.0)):
        raise InvalidInputError("1 + K.x must be positive for every outcome", "weights")
    return r


def log_growth_realized(K, x) -> float:
    """``log(1 + K . x)`` for a single compound return vector."""
    r = float(np.dot(np.asarray(K, dtype=np.float64), np.asarray(x, dtype=np.float64)))
    if not r > -1.0:
        raise InvalidInputError(f"1 + K.x = {1.0 + r!r} is not positive", "x")
    return float(np.log1p(r))


def elg_exact(compound: CompoundReturnDistribution, K) -> ElgValue:
    _require_exact(compound)
    logs = np.log1p(portfolio_returns(compound.outcomes, K))
    return ElgValue(float(compound.probabilities @ logs) / compound.period, 0.0, "exact")


def elg_mc(compound: CompoundReturnDistribution, K) -> ElgValue:
    """Monte Carlo estimate with standard error ``std / sqrt(count) / n``."""
    if compound.is_exact:
        raise ModeMismatchError("elg_mc requires a sampled compound distribution")
    if compound.count < 2:
        raise InvalidInputError("need at least 2 samples for a standard error", "count")
    logs = np.log1p(portfolio_returns(compound.outcomes, K))
    n = compound.period
    stderr = float(np.std(logs, ddof=1)) / np.sqrt(compound.count) / n
    return ElgValue(float(np.mean(logs)) / n, stderr, "sampled")


def elg_gradient(compound: CompoundReturnDistribution, K) -> np.ndarray:
    """Gradient of g_n: component i is ``(1/n) E[C_i / (1 + K . C)]``."""
    _require_exact(compound)
    denom = 1.0 + portfolio_returns(compound.outcomes, K)
    w = compound.probabilities / denom
    return (w @ compound.outcomes) / compound.period
