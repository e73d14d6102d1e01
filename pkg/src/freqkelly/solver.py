"""
Maximize g_n(K) over the unit simplex.

``solve`` runs projected-gradient ascent with Armijo backtracking from the
uniform portfolio and stops on the expected-ratio optimality residual
rather than on a gradient norm. ``grid_oracle`` is an independent brute
force over a regular simplex lattice, intended for testing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .certificates import DEFAULT_SUPPORT_EPS, expected_ratios, kkt_residuals
from .elg import elg_exact, elg_gradient, portfolio_returns
from .errors import InvalidInputError, NonFiniteObjectiveError
from .returns_model import (
    DEFAULT_ENUMERATION_CAP,
    CompoundReturnDistribution,
    JointReturnDistribution,
    compound_exact,
)

log = logging.getLogger(__name__)

GRID_MAX_ASSETS = 4
GRID_MAX_RESOLUTION = 200


@dataclass
class SolverOptions:
    kkt_tol: float = 1e-8
    max_iters: int = 10_000
    support_eps: float = DEFAULT_SUPPORT_EPS
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    # After a step accepted without backtracking the next trial step doubles,
    # up to this cap. Keeps low-variance models from crawling.
    max_step: float = 1e8
    min_step: float = 1e-30
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    record_iterates: bool = False


@dataclass(eq=False)
class OptimizationResult:
    weights: np.ndarray
    optimal_value: float
    iterations: int
    kkt_residual: float
    converged: bool
    period: int
    history: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] | None = None

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "optimal_value": self.optimal_value,
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
            "n": self.period,
        }


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto {K : K >= 0, sum(K) = 1} by sort-and-threshold."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidInputError("projection needs a non-empty finite vector", "v")
    if np.all(v >= 0.0) and np.sum(v) == 1.0:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _log_gain(compound: CompoundReturnDistribution, K: np.ndarray, step: np.ndarray) -> float:
    """g(K + step) - g(K), evaluated without subtracting two nearly equal sums.

    Uses the scale-free form E[log(K . R)] - log(sum K) with R = 1 + C, which
    equals g on the simplex and is blind to rounding drift in sum(K).
    """
    k_sum, d_sum = float(np.sum(K)), float(np.sum(step))
    base = k_sum + portfolio_returns(compound.outcomes, K)
    rel = (d_sum + compound.outcomes @ step) / base
    gain = float(compound.probabilities @ np.log1p(rel)) - np.log1p(d_sum / k_sum)
    return gain / compound.period


def solve_compound(
    compound: CompoundReturnDistribution, opts: SolverOptions | None = None
) -> OptimizationResult:
    """Maximize g_n over the simplex for an enumerated compound distribution."""
    opts = opts or SolverOptions()
    m = compound.asset_count
    K = np.full(m, 1.0 / m)
    f = elg_exact(compound, K).value
    if not np.isfinite(f):
        raise NonFiniteObjectiveError("objective is not finite at the uniform portfolio")
    history = [f]
    iterates = [K.copy()] if opts.record_iterates else None

    t = opts.initial_step
    residual = float(kkt_residuals(expected_ratios(compound, K), K, opts.support_eps).max())
    it = 0
    while residual > opts.kkt_tol and it < opts.max_iters:
        grad = elg_gradient(compound, K)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteObjectiveError(f"gradient is not finite at iteration {it}")
        # Projection ignores shifts along the all-ones vector; dropping that
        # component keeps K + t * grad from swamping K when t is large.
        grad = grad - grad.mean()
        backtracked = False
        while True:
            K_new = project_to_simplex(K + t * grad)
            d = K_new - K
            gain = _log_gain(compound, K, d)
            if not np.isfinite(gain):
                raise NonFiniteObjectiveError(f"objective is not finite at iteration {it}")
            if gain >= opts.armijo * float(grad @ d):
                break
            t *= opts.shrink
            backtracked = True
            if t < opts.min_step:
                break
        if t < opts.min_step:
            log.debug("line search stalled at iteration %d, residual %.3e", it, residual)
            break
        it += 1
        K = K_new
        f = elg_exact(compound, K).value
        history.append(f)
        if iterates is not None:
            iterates.append(K.copy())
        residual = float(kkt_residuals(expected_ratios(compound, K), K, opts.support_eps).max())
        if not backtracked:
            t = min(2.0 * t, opts.max_step)

    converged = residual <= opts.kkt_tol
    if not converged:
        log.warning("solver stopped after %d iterations with residual %.3e", it, residual)
    return OptimizationResult(
        weights=K,
        optimal_value=f,
        iterations=it,
        kkt_residual=residual,
        converged=converged,
        period=compound.period,
        history=history,
        iterates=iterates,
    )


def solve(dist: JointReturnDistribution, n: int, opts: SolverOptions | None = None) -> OptimizationResult:
    """Kelly-optimal weights for rebalancing period ``n``.

    Raises EnumerationCapError when ``S**n`` exceeds ``opts.enumeration_cap``.
    """
    opts = opts or SolverOptions()
    return solve_compound(compound_exact(dist, n, cap=opts.enumeration_cap), opts)


def simplex_lattice(m: int, resolution: int) -> np.ndarray:
    """Integer compositions of ``resolution`` into ``m`` parts, in lexicographic order."""
    if m == 1:
        return np.array([[resolution]], dtype=np.int64)
    blocks = []
    for first in range(resolution + 1):
        rest = simplex_lattice(m - 1, resolution - first)
        blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class GridResult:
    weights: np.ndarray
    value: float
    resolution: int


def grid_oracle(dist: JointReturnDistribution, n: int, resolution: int) -> GridResult:
    """Exhaustive argmax of g_n on the lattice K_i = k_i / resolution.

    Ties go to the lexicographically smallest lattice point.
    """
    m = dist.asset_count
    if m > GRID_MAX_ASSETS or not 1 <= resolution <= GRID_MAX_RESOLUTION:
        raise InvalidInputError(
            f"grid limited to m <= {GRID_MAX_ASSETS} and 1 <= resolution <= {GRID_MAX_RESOLUTION}",
            "resolution",
        )
    compound = compound_exact(dist, n)
    points = simplex_lattice(m, resolution)
    weights = points / resolution
    values = np.empty(points.shape[0])
    chunk = max(1, 2_000_000 // max(1, compound.count))
    for start in range(0, points.shape[0], chunk):
        w = weights[start : start + chunk]
        values[start : start + chunk] = (
            np.log1p(w @ compound.outcomes.T) @ compound.probabilities / compound.period
        )
    best = int(np.argmax(values))
    return GridResult(weights[best], float(values[best]), resolution)
