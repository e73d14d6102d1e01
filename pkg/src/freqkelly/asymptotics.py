"""
Simulated account trajectories and the relative-wealth growth bound.

Accounts rebalance to fixed weights every ``period`` steps and let each
asset's holding ride in between, so with period n the account after one
period is ``V(0) * (1 + K . C)`` for the n-step compound return C.

For an optimal K*, the probability that the per-step log-wealth ratio of
any K against K* exceeds ``2 log(n) / n`` is at most ``1 / n**2`` at step
n. ``check_asymptotic_bound`` counts how often simulated paths cross that
threshold.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import atomic_write_text
from .errors import InvalidInputError
from .returns_model import (
    JointReturnDistribution,
    compound_floor,
    draw_scenarios,
    scenario_stream,
    validate_weights,
)


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """``values[p, n-1]`` is (1/n) log(W_K(n) / W_K*(n)) on path p."""

    values: np.ndarray
    seed: int
    K: np.ndarray
    K_star: np.ndarray
    period: int = 1

    @property
    def paths(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    @property
    def steps(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)


@dataclass(frozen=True, eq=False)
class AccountTrajectory:
    values: np.ndarray
    weights: np.ndarray
    initial_value: float
    period: int = 1


@dataclass(frozen=True, eq=False)
class BoundCheck:
    steps: np.ndarray
    mean: np.ndarray
    max: np.ndarray
    violations: np.ndarray
    paths: int
    last_violation: int | None
    tail_start: int
    tail_violation_fraction: float

    @property
    def violation_fraction(self) -> np.ndarray:
        return self.violations / self.paths

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "mean", "max", "violation_fraction"])
        for n, mean, mx, frac in zip(self.steps, self.mean, self.max, self.violation_fraction):
            w.writerow([int(n), repr(float(mean)), repr(float(mx)), repr(float(frac))])
        return buf.getvalue()

    def to_csv(self, path: str | Path) -> None:
        atomic_write_text(path, self.csv_text())


def log_wealth_path(factors: np.ndarray, K: np.ndarray, period: int = 1) -> np.ndarray:
    """Cumulative log wealth ``log(V(k)/V(0))`` for k = 1..N.

    ``factors`` has shape ``(N, m)`` holding 1 + X(k). Weights reset to K
    at the start of each period; within a period each holding compounds
    with its own asset.
    """
    N = factors.shape[0]
    if period == 1:
        return np.cumsum(np.log1p((factors - 1.0) @ K))
    out = np.empty(N)
    level = 0.0
    for start in range(0, N, period):
        block = factors[start : start + period]
        growth = np.cumprod(block, axis=0)
        out[start : start + block.shape[0]] = level + np.log(growth @ K)
        level = out[start + block.shape[0] - 1]
    return out


def wealth_path(factors: np.ndarray, K: np.ndarray, period: int = 1) -> np.ndarray:
    """Wealth multiple ``V(k)/V(0)`` for k = 1..N, same semantics as :func:`log_wealth_path`."""
    if period == 1:
        return np.cumprod(factors @ K)
    out = np.empty(factors.shape[0])
    level = 1.0
    for start in range(0, factors.shape[0], period):
        block = factors[start : start + period]
        out[start : start + block.shape[0]] = level * (np.cumprod(block, axis=0) @ K)
        level = out[start + block.shape[0] - 1]
    return out


def _check_common(horizon: int, period: int) -> None:
    if int(horizon) != horizon or horizon < 1:
        raise InvalidInputError(f"horizon must be a positive integer, got {horizon!r}", "horizon")
    if int(period) != period or period < 1:
        raise InvalidInputError(f"period must be a positive integer, got {period!r}", "period")


def simulate_relative_paths(
    dist: JointReturnDistribution,
    K,
    K_star,
    horizon: int = 10_000,
    paths: int = 1000,
    seed: int = 0,
    period: int = 1,
) -> PathEnsemble:
    """Per-step relative log growth of K against K_star along simulated paths.

    Each path draws its returns from a stream keyed by ``(seed, path)``, so
    paths can be generated in any order or in parallel.
    """
    K = validate_weights(K, dist.asset_count)
    K_star = validate_weights(K_star, dist.asset_count)
    _check_common(horizon, period)
    if horizon < 2:
        raise InvalidInputError("horizon must be at least 2", "horizon")
    if int(paths) != paths or paths < 1:
        raise InvalidInputError(f"paths must be a positive integer, got {paths!r}", "paths")

    steps = np.arange(1, horizon + 1)
    values = np.empty((int(paths), int(horizon)))
    if period == 1:
        # Per-scenario log ratio table; paths then only need index lookups.
        table = np.log1p(dist.scenarios @ K) - np.log1p(dist.scenarios @ K_star)
    factors = 1.0 + dist.scenarios
    for p in range(int(paths)):
        idx = draw_scenarios(dist, scenario_stream(seed, p), int(horizon))
        if period == 1:
            rel = np.cumsum(table[idx])
        else:
            f = factors[idx]
            rel = log_wealth_path(f, K, period) - log_wealth_path(f, K_star, period)
        values[p] = rel / steps
    return PathEnsemble(values, int(seed), K, K_star, int(period))


def check_asymptotic_bound(ensemble: PathEnsemble, tail_start: int = 100) -> BoundCheck:
    """Count paths whose value exceeds ``2 log(n) / n`` at each step n.

    Step 1 has threshold 0 and is reported but excluded from
    ``last_violation``, which covers n >= 2.
    """
    n = ensemble.steps
    threshold = 2.0 * np.log(n) / n
    above = ensemble.values > threshold
    counts = above.sum(axis=0)
    hit = np.nonzero(counts[1:])[0]
    last = int(n[1:][hit[-1]]) if hit.size else None
    tail = above[:, n >= tail_start]
    tail_frac = float(np.count_nonzero(tail.any(axis=1))) / ensemble.paths if tail.size else 0.0
    return BoundCheck(
        steps=n,
        mean=ensemble.values.mean(axis=0),
        max=ensemble.values.max(axis=0),
        violations=counts,
        paths=ensemble.paths,
        last_violation=last,
        tail_start=int(tail_start),
        tail_violation_fraction=tail_frac,
    )


def account_trajectory(
    dist: JointReturnDistribution,
    K,
    V0: float = 1.0,
    horizon: int = 100,
    seed: int = 0,
    period: int = 1,
) -> AccountTrajectory:
    """Simulate V(0..horizon) for fixed weights rebalanced every ``period`` steps."""
    K = validate_weights(K, dist.asset_count)
    _check_common(horizon, period)
    if not V0 > 0:
        raise InvalidInputError(f"initial value must be positive, got {V0!r}", "V0")
    idx = draw_scenarios(dist, scenario_stream(seed), int(horizon))
    growth = wealth_path(1.0 + dist.scenarios[idx], K, int(period))
    values = np.concatenate([[float(V0)], float(V0) * growth])
    return AccountTrajectory(values, K, float(V0), int(period))


def survival_lower_bound(dist: JointReturnDistribution, K, n: int) -> float:
    """Worst-case wealth multiple after n steps: ``1 + min_i ((1 + X_min,i)**n - 1)``.

    Holds for every realization and every K in the simplex, whether or not
    the account rebalances within the n steps.
    """
    validate_weights(K, dist.asset_count)
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n!r}", "n")
    return float(1.0 + np.min(compound_floor(dist.x_min, int(n))))
