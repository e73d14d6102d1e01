"""
Optimality certificates for long-only Kelly portfolios.

A weight vector K on the unit simplex maximizes g_n exactly when the
expected ratios

    rho_i(K) = E[(1 + C_i) / (1 + K . C)]

equal 1 on every held asset and do not exceed 1 on every asset that is
not held. Because sum_i K_i rho_i(K) = 1 for any K, the Lagrange
multiplier of the budget constraint is always 1 and the multiplier of the
bound on asset i is 1 - rho_i.

The one-step pairwise ratio E[(1 + X_i) / (1 + X_j)] decides when the
optimum is a single asset j: that happens if and only if the ratio is at
most 1 for every other asset i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elg import _require_exact, portfolio_returns
from .errors import InvalidInputError
from .returns_model import CompoundReturnDistribution, JointReturnDistribution, validate_weights

DEFAULT_TOL = 1e-6
DEFAULT_SUPPORT_EPS = 1e-9
DEFAULT_DOMINANCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class OptimalityCertificate:
    weights: np.ndarray
    ratios: np.ndarray
    supported: np.ndarray
    residuals: np.ndarray
    max_residual: float
    passed: bool
    tol: float
    support_eps: float

    @property
    def verdicts(self) -> list[str]:
        """Per asset: which condition applies and whether it holds."""
        out = []
        for held, res in zip(self.supported, self.residuals):
            kind = "equality" if held else "inequality"
            out.append(f"{kind}:{'pass' if res <= self.tol else 'fail'}")
        return out

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "ratios": self.ratios.tolist(),
            "supported": [bool(s) for s in self.supported],
            "verdicts": self.verdicts,
            "residuals": self.residuals.tolist(),
            "max_residual": self.max_residual,
            "pass": self.passed,
            "tol": self.tol,
            "support_eps": self.support_eps,
        }


@dataclass(frozen=True, eq=False)
class DominanceReport:
    """``matrix[i, j]`` is E[(1 + X_i) / (1 + X_j)]."""

    matrix: np.ndarray
    dominant: int | None
    tol: float
    assets: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "assets": list(self.assets),
            "matrix": self.matrix.tolist(),
            "dominant": self.dominant,
            "dominant_asset": None if self.dominant is None else self.assets[self.dominant],
            "tol": self.tol,
        }


def expected_ratios(compound: CompoundReturnDistribution, K) -> np.ndarray:
    """Vector of E[(1 + C_i) / (1 + K . C)] over all assets."""
    _require_exact(compound)
    K = validate_weights(K, compound.asset_count)
    w = compound.probabilities / (1.0 + portfolio_returns(compound.outcomes, K))
    return w @ (1.0 + compound.outcomes)


def expected_ratio_asset(compound: CompoundReturnDistribution, K, i: int) -> float:
    if not 0 <= i < compound.asset_count:
        raise InvalidInputError(f"asset index {i} out of range", "i")
    return float(expected_ratios(compound, K)[i])


def kkt_residuals(ratios: np.ndarray, K: np.ndarray, support_eps: float = DEFAULT_SUPPORT_EPS) -> np.ndarray:
    """Per-asset violation: ``|rho - 1|`` on held assets, ``max(rho - 1, 0)`` elsewhere."""
    held = np.asarray(K) > support_eps
    return np.where(held, np.abs(ratios - 1.0), np.maximum(ratios - 1.0, 0.0))


def kkt_certify(
    compound: CompoundReturnDistribution,
    K,
    tol: float = DEFAULT_TOL,
    support_eps: float = DEFAULT_SUPPORT_EPS,
) -> OptimalityCertificate:
    K = validate_weights(K, compound.asset_count)
    ratios = expected_ratios(compound, K)
    res = kkt_residuals(ratios, K, support_eps)
    worst = float(res.max())
    return OptimalityCertificate(
        weights=K,
        ratios=ratios,
        supported=K > support_eps,
        residuals=res,
        max_residual=worst,
        passed=bool(worst <= tol),
        tol=tol,
        support_eps=support_eps,
    )


def _check_index(dist: JointReturnDistribution, i: int, name: str) -> None:
    if not 0 <= i < dist.asset_count:
        raise InvalidInputError(f"asset index {i} out of range for {dist.asset_count} assets", name)


def dominance_condition(dist: JointReturnDistribution, i: int, j: int) -> float:
    """One-step expected ratio E[(1 + X_i) / (1 + X_j)]; exactly 1 when i == j."""
    _check_index(dist, i, "i")
    _check_index(dist, j, "j")
    if i == j:
        return 1.0
    x = dist.scenarios
    return float(dist.probabilities @ ((1.0 + x[:, i]) / (1.0 + x[:, j])))


def dominance_matrix(dist: JointReturnDistribution) -> np.ndarray:
    g = 1.0 + dist.scenarios
    mat = np.einsum("s,si,sj->ij", dist.probabilities, g, 1.0 / g)
    np.fill_diagonal(mat, 1.0)
    return mat


def find_dominant(dist: JointReturnDistribution, tol: float = DEFAULT_DOMINANCE_TOL) -> DominanceReport:
    """Smallest j whose column satisfies ratio(i, j) <= 1 + tol for all i != j."""
    mat = dominance_matrix(dist)
    dominant = None
    for j in range(dist.asset_count):
        if np.all(np.delete(mat[:, j], j) <= 1.0 + tol):
            dominant = j
            break
    return DominanceReport(mat, dominant, tol, dist.assets)


def expected_relative_wealth(compound: CompoundReturnDistribution, K, K_star) -> float:
    """E[(1 + K . C) / (1 + K* . C)]; at most 1 for every K when K* is optimal."""
    _require_exact(compound)
    K = validate_weights(K, compound.asset_count)
    K_star = validate_weights(K_star, compound.asset_count)
    num = 1.0 + portfolio_returns(compound.outcomes, K)
    den = 1.0 + portfolio_returns(compound.outcomes, K_star)
    return float(compound.probabilities @ (num / den))


def expected_log_relative_wealth(compound: CompoundReturnDistribution, K, K_star) -> float:
    """E[log((1 + K . C) / (1 + K* . C))]; non-positive for every K when K* is optimal."""
    _require_exact(compound)
    K = validate_weights(K, compound.asset_count)
    K_star = validate_weights(K_star, compound.asset_count)
    logs = np.log1p(portfolio_returns(compound.outcomes, K)) - np.log1p(
        portfolio_returns(compound.outcomes, K_star)
    )
    return float(compound.probabilities @ logs)
