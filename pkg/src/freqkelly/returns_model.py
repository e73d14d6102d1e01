"""
Finite scenario return models and their n-step compound distributions.

A one-step model is a finite set of joint return vectors X (one rate of
return per asset) with probabilities. Returns are i.i.d. across steps, so
the compound return over a rebalancing period of n steps,

    C_i = prod_{k=0}^{n-1} (1 + X_i(k)) - 1,

has an exactly enumerable distribution over S**n product scenarios. When
that product is too large, ``compound_sample`` draws compound vectors from
a seeded counter-based stream instead.

Arrays are ``float64`` with shape ``(scenarios, assets)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EnumerationCapError, InvalidInputError

PROBABILITY_TOL = 1e-9
DEFAULT_ENUMERATION_CAP = 10**6

# Draws per independently keyed random block in compound_sample.
_SAMPLE_BLOCK = 1 << 16


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class JointReturnDistribution:
    """One-step joint return distribution over a finite scenario set.

    Build instances with :func:`new_joint_distribution`; the constructor
    itself does not validate.
    """

    scenarios: np.ndarray
    probabilities: np.ndarray
    assets: tuple[str, ...] = ()

    @property
    def asset_count(self) -> int:
        return self.scenarios.shape[1]

    @property
    def scenario_count(self) -> int:
        return self.scenarios.shape[0]

    @property
    def x_min(self) -> np.ndarray:
        return self.scenarios.min(axis=0)

    @property
    def x_max(self) -> np.ndarray:
        return self.scenarios.max(axis=0)

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return [(float(lo), float(hi)) for lo, hi in zip(self.x_min, self.x_max)]

    def to_dict(self) -> dict:
        return {
            "assets": list(self.assets),
            "scenarios": self.scenarios.tolist(),
            "probabilities": self.probabilities.tolist(),
        }


@dataclass(frozen=True, eq=False)
class CompoundReturnDistribution:
    """Distribution of the compound return vector over ``period`` steps.

    In ``"exact"`` mode ``probabilities`` holds the weight of each outcome.
    In ``"sampled"`` mode every outcome is an equally weighted draw and
    ``probabilities`` is None.
    """

    period: int
    mode: str
    outcomes: np.ndarray
    probabilities: np.ndarray | None = None
    seed: int | None = None
    assets: tuple[str, ...] = field(default=())

    @property
    def asset_count(self) -> int:
        return self.outcomes.shape[1]

    @property
    def count(self) -> int:
        return self.outcomes.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"


def new_joint_distribution(
    scenarios: Sequence[Sequence[float]] | np.ndarray,
    probabilities: Sequence[float] | np.ndarray,
    assets: Sequence[str] | None = None,
) -> JointReturnDistribution:
    """Validate scenario data and build a distribution.

    Probabilities must be positive and sum to 1 within 1e-9; they are then
    renormalized to sum to 1. Every return must exceed -1 and be finite.
    """
    try:
        x = np.array(scenarios, dtype=np.float64)
        p = np.array(probabilities, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"not a numeric array ({exc})", "scenarios") from None

    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise InvalidInputError("expected a non-empty list of equal-length return vectors", "scenarios")
    if p.ndim != 1 or p.shape[0] != x.shape[0]:
        raise InvalidInputError(
            f"expected {x.shape[0]} probabilities, got shape {p.shape}", "probabilities"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("returns must be finite", "scenarios")
    if np.any(x <= -1.0):
        raise InvalidInputError("every return must exceed -1 (prices stay positive)", "scenarios")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise InvalidInputError("probabilities must be positive", "probabilities")
    total = float(np.sum(p))
    if abs(total - 1.0) > PROBABILITY_TOL:
        raise InvalidInputError(f"probabilities sum to {total!r}, not 1", "probabilities")

    if assets is None:
        names = tuple(f"asset{i + 1}" for i in range(x.shape[1]))
    else:
        names = tuple(str(a) for a in assets)
        if len(names) != x.shape[1]:
            raise InvalidInputError(
                f"{len(names)} asset names for {x.shape[1]} return columns", "assets"
            )
    return JointReturnDistribution(_readonly(x), _readonly(p / total), names)


def with_riskless(
    dist: JointReturnDistribution, r: float, name: str = "cash"
) -> JointReturnDistribution:
    """Append a riskless asset returning ``r`` in every scenario."""
    if not np.isfinite(r) or r < 0:
        raise InvalidInputError(f"riskless rate must be >= 0, got {r!r}", "r")
    col = np.full((dist.scenario_count, 1), float(r))
    return JointReturnDistribution(
        _readonly(np.hstack([dist.scenarios, col])),
        dist.probabilities,
        dist.assets + (name,),
    )


def compound_floor(x_min: np.ndarray | float, n: int) -> np.ndarray:
    """Smallest attainable compound return per asset, ``(1 + x_min)**n - 1``.

    Evaluated with the same multiplication order as the compound
    enumeration so that the floor is never above a realized outcome, even
    in floating point.
    """
    x_min = np.asarray(x_min, dtype=np.float64)
    if n == 1:
        return x_min.copy()
    base = 1.0 + x_min
    g = base.copy()
    for _ in range(n - 1):
        g = g * base
    return g - 1.0


def _merge_rows(growth: np.ndarray, prob: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Merge bit-identical rows, keeping first-occurrence order.
    _, first, inverse = np.unique(growth, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    merged_p = np.bincount(inverse, weights=prob, minlength=first.size)
    order = np.argsort(first, kind="stable")
    return growth[first[order]], merged_p[order]


def compound_exact(
    dist: JointReturnDistribution,
    n: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
    merge: bool = True,
) -> CompoundReturnDistribution:
    """Enumerate the exact compound return distribution for period ``n``.

    Product scenarios are ordered lexicographically by their step-scenario
    indices. With ``merge`` set, bit-identical outcome vectors are collapsed
    and their probabilities summed. For ``n == 1`` the one-step scenarios
    are returned unchanged.

    Raises:
        EnumerationCapError: if ``S**n`` exceeds ``cap``.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError(f"period must be an integer >= 1, got {n!r}", "n")
    n = int(n)
    s = dist.scenario_count
    if s**n > cap:
        raise EnumerationCapError(
            f"{s}**{n} = {s**n} compound scenarios exceed the enumeration cap {cap}; use sampling"
        )
    if n == 1:
        return CompoundReturnDistribution(
            1, "exact", dist.scenarios, dist.probabilities, assets=dist.assets
        )

    factors = 1.0 + dist.scenarios
    growth, prob = factors, dist.probabilities
    for _ in range(n - 1):
        growth = (growth[:, None, :] * factors[None, :, :]).reshape(-1, dist.asset_count)
        prob = (prob[:, None] * dist.probabilities[None, :]).reshape(-1)
        if merge:
            growth, prob = _merge_rows(growth, prob)
    return CompoundReturnDistribution(
        n, "exact", _readonly(growth - 1.0), _readonly(prob), assets=dist.assets
    )


def scenario_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *key)``.

    Streams for distinct keys are independent, so work can be split across
    blocks or workers without changing results.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def draw_scenarios(dist: JointReturnDistribution, rng: np.random.Generator, shape) -> np.ndarray:
    """Draw i.i.d. scenario indices with the model's probabilities."""
    cdf = np.cumsum(dist.probabilities)
    u = rng.random(shape)
    return np.minimum(np.searchsorted(cdf, u, side="right"), dist.scenario_count - 1)


def compound_sample(
    dist: JointReturnDistribution, n: int, count: int, seed: int
) -> CompoundReturnDistribution:
    """Draw ``count`` i.i.d. compound return vectors over ``n`` steps.

    Draws are generated in fixed-size blocks, each with its own stream
    keyed by ``(seed, block)``, so the output depends only on
    ``(seed, count, n)``.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError(f"period must be an integer >= 1, got {n!r}", "n")
    if int(count) != count or count < 1:
        raise InvalidInputError(f"count must be a positive integer, got {count!r}", "count")
    n, count = int(n), int(count)

    factors = 1.0 + dist.scenarios
    out = np.empty((count, dist.asset_count))
    for block, start in enumerate(range(0, count, _SAMPLE_BLOCK)):
        stop = min(start + _SAMPLE_BLOCK, count)
        idx = draw_scenarios(dist, scenario_stream(seed, block), (stop - start, n))
        if n == 1:
            out[start:stop] = dist.scenarios[idx[:, 0]]
            continue
        g = factors[idx[:, 0]]
        for k in range(1, n):
            g = g * factors[idx[:, k]]
        out[start:stop] = g - 1.0
    return CompoundReturnDistribution(n, "sampled", _readonly(out), None, int(seed), dist.assets)


def returns_from_prices(prices: Sequence[float] | np.ndarray) -> np.ndarray:
    """Simple returns ``(s[k+1] - s[k]) / s[k]``.

    Accepts a 1-D price sequence or a 2-D ``(time, assets)`` matrix.
    """
    s = np.asarray(prices, dtype=np.float64)
    if s.ndim not in (1, 2) or s.shape[0] < 2:
        raise InvalidInputError("need at least 2 prices", "prices")
    if not np.all(np.isfinite(s)) or np.any(s <= 0.0):
        raise InvalidInputError("prices must be finite and strictly positive", "prices")
    return (s[1:] - s[:-1]) / s[:-1]


def validate_weights(weights, m: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """Return ``weights`` as a float array after checking it lies in the unit simplex."""
    k = np.asarray(weights, dtype=np.float64).reshape(-1)
    if m is not None and k.size != m:
        raise InvalidInputError(f"expected {m} weights, got {k.size}", "weights")
    if not np.all(np.isfinite(k)):
        raise InvalidInputError("weights must be finite", "weights")
    if np.any(k < 0.0):
        raise InvalidInputError("weights must be non-negative (long only)", "weights")
    if abs(float(np.sum(k)) - 1.0) > tol:
        raise InvalidInputError(f"weights sum to {float(np.sum(k))!r}, not 1", "weights")
    return k


def distribution_from_dict(doc: dict) -> JointReturnDistribution:
    if not isinstance(doc, dict):
        raise InvalidInputError("expected a JSON object", "dist")
    for key in ("scenarios", "probabilities"):
        if key not in doc:
            raise InvalidInputError("missing required field", key)
    return new_joint_distribution(doc["scenarios"], doc["probabilities"], doc.get("assets"))


def load_distribution(path: str | Path) -> JointReturnDistribution:
    """Read ``{"assets": [...], "scenarios": [[...]], "probabilities": [...]}``."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON ({exc})", str(path)) from None
    return distribution_from_dict(doc)
