"""
Dominant ratio trading over historical prices.

At each step the pairwise expected ratios E[(1 + x_i) / (1 + x_j)] are
estimated over a sliding window of the M most recent realized returns.
If some asset j has estimated ratio <= 1 against every other asset, the
whole account goes into j; otherwise a configurable fallback applies.

Timing is causal: the signal decided at price index t uses returns
x(t-M) .. x(t-1) (prices up to s(t)) and is applied to the return
x(t) = s(t+1)/s(t) - 1. The account stays flat during the first M steps.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import atomic_write_text
from .asymptotics import AccountTrajectory
from .errors import InsufficientHistoryError, InvalidInputError
from .returns_model import returns_from_prices, validate_weights

FALLBACKS = ("hold", "riskless", "flat")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    assets: tuple[str, ...]
    dates: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self):
        p = self.prices
        if p.ndim != 2 or p.shape != (len(self.dates), len(self.assets)):
            raise InvalidInputError(
                f"price matrix shape {p.shape} does not match {len(self.dates)} dates x {len(self.assets)} assets",
                "prices",
            )
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
            raise InvalidInputError("prices must be finite and strictly positive", "prices")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise InvalidInputError(f"dates not strictly increasing at {a!r} -> {b!r}", "date")

    @property
    def returns(self) -> np.ndarray:
        return returns_from_prices(self.prices)


@dataclass(frozen=True)
class BacktestConfig:
    window: int = 20
    initial_value: float = 1.0
    fallback: str = "hold"
    riskless_index: int | None = None
    # Dominance is declared when every estimated ratio is <= 1 + tol.
    tol: float = 0.0

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise InvalidInputError(f"window must be an integer >= 1, got {self.window!r}", "window")
        if not self.initial_value > 0:
            raise InvalidInputError(f"initial value must be positive, got {self.initial_value!r}", "v0")
        if self.fallback not in FALLBACKS:
            raise InvalidInputError(f"unknown policy {self.fallback!r}; choose from {FALLBACKS}", "fallback")
        if self.fallback == "riskless" and self.riskless_index is None:
            raise InvalidInputError("riskless fallback needs a riskless asset index", "riskless_index")


@dataclass(eq=False)
class BacktestResult:
    """Row t of ``signals`` is the position held from price t to price t + 1.

    The last row is the position the rule would take next; it has no
    realized return yet. A zero row means no position (account flat).
    """

    assets: tuple[str, ...]
    dates: tuple[str, ...]
    values: np.ndarray
    signals: np.ndarray
    ratios: np.ndarray
    baselines: dict[str, np.ndarray]
    config: BacktestConfig
    summary: dict = field(default_factory=dict)


def load_prices(path: str | Path) -> PriceSeries:
    """Read a CSV with a header row, a date-label first column and one price column per asset."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise InvalidInputError("empty file", str(path))
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or any(not h for h in header):
        raise InvalidInputError("header needs a date column and at least one asset name", "header")
    assets = tuple(header[1:])
    dates, prices = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InvalidInputError(f"line {lineno}: expected {len(header)} cells, got {len(row)}", "row")
        dates.append(row[0].strip())
        vals = []
        for name, cell in zip(assets, row[1:]):
            cell = cell.strip()
            if not cell:
                raise InvalidInputError(f"line {lineno}: missing price", name)
            try:
                v = float(cell)
            except ValueError:
                raise InvalidInputError(f"line {lineno}: not a number: {cell!r}", name) from None
            if not math.isfinite(v) or v <= 0.0:
                raise InvalidInputError(f"line {lineno}: price must be positive, got {cell!r}", name)
            vals.append(v)
        prices.append(vals)
    if not prices:
        raise InvalidInputError("no price rows", str(path))
    return PriceSeries(assets, tuple(dates), np.array(prices, dtype=np.float64))


def _window(returns: np.ndarray, k: int, M: int) -> np.ndarray:
    if int(M) != M or M < 1:
        raise InvalidInputError(f"window must be >= 1, got {M!r}", "window")
    if k >= returns.shape[0]:
        raise InvalidInputError(f"step {k} outside returns of length {returns.shape[0]}", "k")
    if k < M - 1:
        raise InsufficientHistoryError(f"window of {M} ending at step {k} needs {M} returns, only {k + 1} observed")
    return 1.0 + returns[k - M + 1 : k + 1]


def sliding_expected_ratio(returns: np.ndarray, i: int, j: int, k: int, M: int) -> float:
    """R_ij(k) = (1/M) sum_{l=0}^{M-1} (1 + x_i(k-l)) / (1 + x_j(k-l))."""
    g = _window(np.asarray(returns, dtype=np.float64).reshape(len(returns), -1), k, M)
    if i == j:
        return 1.0
    return float(np.mean(g[:, i] / g[:, j]))


def ratio_matrix(returns: np.ndarray, k: int, M: int) -> np.ndarray:
    """All R_ij(k) at once; ``[i, j]`` entry matches :func:`sliding_expected_ratio`."""
    g = _window(returns, k, M)
    mat = np.mean(g[:, :, None] / g[:, None, :], axis=0)
    np.fill_diagonal(mat, 1.0)
    return mat


def dominant_column(ratios: np.ndarray, tol: float = 0.0) -> int | None:
    """Smallest j with ratios[i, j] <= 1 + tol for every i != j."""
    m = ratios.shape[0]
    for j in range(m):
        if np.all(np.delete(ratios[:, j], j) <= 1.0 + tol):
            return j
    return None


def _signal(R: np.ndarray, config: BacktestConfig, previous: np.ndarray | None) -> np.ndarray:
    m = R.shape[0]
    j = dominant_column(R, config.tol)
    if j is not None:
        return np.eye(m)[j]
    if config.fallback == "riskless":
        return np.eye(m)[config.riskless_index]
    if config.fallback == "hold" and previous is not None:
        return previous.copy()
    return np.zeros(m)


def dominant_ratio_signal(
    returns: np.ndarray,
    k: int,
    M: int,
    config: BacktestConfig | None = None,
    previous: np.ndarray | None = None,
) -> np.ndarray:
    """Position for the window ending at return index ``k``.

    Returns e_j for the dominant asset, otherwise the fallback: the
    ``previous`` position ("hold"), the riskless asset ("riskless"), or no
    position at all ("flat", also "hold" before any trade).
    """
    config = config or BacktestConfig(window=M)
    returns = np.asarray(returns, dtype=np.float64)
    m = returns.shape[1]
    if config.riskless_index is not None and not 0 <= config.riskless_index < m:
        raise InvalidInputError(f"riskless index {config.riskless_index} out of range", "riskless_index")
    return _signal(ratio_matrix(returns, k, M), config, previous)


def buy_and_hold(series: PriceSeries, weights, V0: float = 1.0) -> AccountTrajectory:
    """Allocate ``V0 * K_i`` to each asset once and never rebalance."""
    K = validate_weights(weights, len(series.assets))
    if not V0 > 0:
        raise InvalidInputError(f"initial value must be positive, got {V0!r}", "V0")
    rel = series.prices / series.prices[0]
    return AccountTrajectory(float(V0) * (rel @ K), K, float(V0), period=len(series.dates))


def run_backtest(series: PriceSeries, config: BacktestConfig | None = None) -> BacktestResult:
    config = config or BacktestConfig()
    M = config.window
    T, m = series.prices.shape
    if T < M + 1:
        raise InsufficientHistoryError(f"window {M} needs at least {M + 1} prices, got {T}")
    if config.riskless_index is not None and not 0 <= config.riskless_index < m:
        raise InvalidInputError(f"riskless index {config.riskless_index} out of range", "riskless_index")

    x = series.returns
    values = np.empty(T)
    values[0] = config.initial_value
    signals = np.zeros((T, m))
    ratios = np.full((T, m, m), np.nan)
    previous = None
    for t in range(T):
        if t >= M:
            R = ratio_matrix(x, t - 1, M)
            K = _signal(R, config, previous)
            ratios[t] = R
            signals[t] = K
            if K.any():
                previous = K
        if t < T - 1:
            values[t + 1] = values[t] * (1.0 + signals[t] @ x[t])

    baselines = {
        f"bh_{name}": buy_and_hold(series, np.eye(m)[i], config.initial_value).values
        for i, name in enumerate(series.assets)
    }
    baselines["bh_equal"] = buy_and_hold(series, np.full(m, 1.0 / m), config.initial_value).values

    traded = values[M + 1 :] / values[M:-1] if T > M + 1 else np.empty(0)
    summary = {
        "total_return": float(values[-1] / values[0] - 1.0),
        "final_value": float(values[-1]),
        "mean_log_growth": float(np.mean(np.log(traded))) if traded.size else None,
        "window": M,
        "fallback": config.fallback,
        "warmup": M,
        "steps": T - 1,
        "baseline_total_returns": {k: float(v[-1] / v[0] - 1.0) for k, v in baselines.items()},
    }
    return BacktestResult(series.assets, series.dates, values, signals, ratios, baselines, config, summary)


def result_csv_text(result: BacktestResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    m = len(result.assets)
    w.writerow(["date", "V", *[f"K_{i + 1}" for i in range(m)], *result.baselines])
    for t, date in enumerate(result.dates):
        row = [date, repr(float(result.values[t]))]
        row += [repr(float(k)) for k in result.signals[t]]
        row += [repr(float(b[t])) for b in result.baselines.values()]
        w.writerow(row)
    return buf.getvalue()


def write_backtest(result: BacktestResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``result.csv`` and ``summary.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "result.csv", out / "summary.json"
    csv_text = result_csv_text(result)
    json_text = json.dumps(result.summary, indent=2, allow_nan=False) + "\n"
    atomic_write_text(csv_path, csv_text)
    atomic_write_text(json_path, json_text)
    return csv_path, json_path


def read_result_csv(path: str | Path) -> dict[str, list]:
    """Load a ``result.csv`` back into columns; dates stay strings, the rest floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list] = {h: [] for h in header}
        for row in reader:
            cols["date"].append(row[0])
            for h, cell in zip(header[1:], row[1:]):
                cols[h].append(float(cell))
    return cols
