import math

import numpy as np
import pytest
from _models import random_dominant_model, random_model

from freqkelly.certificates import find_dominant, kkt_certify
from freqkelly.elg import elg_exact
from freqkelly.errors import EnumerationCapError, InvalidInputError
from freqkelly.returns_model import compound_exact, new_joint_distribution
from freqkelly.solver import (
    SolverOptions,
    grid_oracle,
    project_to_simplex,
    simplex_lattice,
    solve,
)

G1_STAR = 0.5 * math.log(4 / 3) + 0.5 * math.log(0.8)


def line_search_1d(dist, n, points=200_001):
    """Dense 1-D scan of the stock fraction for a stock/cash model."""
    f = np.linspace(0.0, 1.0, points)
    c = compound_exact(dist, n)
    vals = np.log1p(np.outer(f, c.outcomes[:, 0]) + np.outer(1 - f, c.outcomes[:, 1])) @ c.probabilities
    return f[np.argmax(vals)]


class TestProjection:
    def test_feasible_unchanged(self):
        v = np.array([0.25, 0.75])
        np.testing.assert_array_equal(project_to_simplex(v), v)

    def test_symmetric(self):
        np.testing.assert_array_equal(project_to_simplex([0.8, 0.8]), [0.5, 0.5])

    def test_corner(self):
        np.testing.assert_array_equal(project_to_simplex([2.0, -1.0]), [1.0, 0.0])

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            project_to_simplex([np.inf, 0.0])

    def test_is_nearest_point(self, rng):
        # compare against the projection found by scanning a fine lattice
        lattice = simplex_lattice(3, 200) / 200
        for _ in range(30):
            v = rng.normal(size=3)
            p = project_to_simplex(v)
            assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-12)
            best = lattice[np.argmin(((lattice - v) ** 2).sum(axis=1))]
            assert np.sum((p - v) ** 2) <= np.sum((best - v) ** 2) + 1e-12


class TestSolve:
    def test_stock_cash(self, stock_cash):
        res = solve(stock_cash, 1)
        assert res.converged
        np.testing.assert_allclose(res.weights, [2 / 3, 1 / 3], atol=1e-6)
        assert res.optimal_value == pytest.approx(G1_STAR, abs=1e-9)
        assert line_search_1d(stock_cash, 1) == pytest.approx(2 / 3, abs=1e-5)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_stock_cash_other_periods_match_scan(self, stock_cash, n):
        res = solve(stock_cash, n)
        assert res.converged
        assert res.weights[0] == pytest.approx(line_search_1d(stock_cash, n), abs=1e-5)

    def test_deterministic_corner(self):
        d = new_joint_distribution([[0.2, 0.0]], [1.0])
        res = solve(d, 1)
        np.testing.assert_allclose(res.weights, [1.0, 0.0], atol=1e-12)

    def test_identical_assets(self, two_point_stock):
        x = two_point_stock.scenarios[:, 0]
        d = new_joint_distribution(np.column_stack([x, x]), [0.5, 0.5])
        res = solve(d, 2)
        single = elg_exact(compound_exact(two_point_stock, 2), [1.0]).value
        assert res.optimal_value == pytest.approx(single, abs=1e-15)
        cert = kkt_certify(compound_exact(d, 2), res.weights)
        assert cert.passed and np.all(cert.supported)

    def test_cap(self, stock_cash):
        with pytest.raises(EnumerationCapError):
            solve(stock_cash, 30)

    def test_iterates_feasible_and_monotone(self, rng):
        opts = SolverOptions(record_iterates=True)
        for _ in range(20):
            d = random_model(rng)
            res = solve(d, int(rng.integers(1, 3)), opts)
            for K in res.iterates:
                assert np.all(K >= 0) and abs(K.sum() - 1.0) <= 1e-10
            assert np.all(np.diff(res.history) >= -1e-15)

    def test_low_variance_model_converges(self):
        # daily-scale returns: curvature ~1e-4, so a fixed unit step would crawl
        d = new_joint_distribution([[0.004, 0.0], [-0.0035, 0.0]], [0.5, 0.5])
        res = solve(d, 1)
        assert res.converged and res.iterations < 500

    def test_max_iters_reported(self, stock_cash):
        res = solve(stock_cash, 1, SolverOptions(max_iters=1))
        assert res.iterations == 1 and not res.converged
        assert res.kkt_residual > 1e-8


class TestGridOracle:
    def test_too_fine(self, stock_cash):
        with pytest.raises(InvalidInputError):
            grid_oracle(stock_cash, 1, 300)

    def test_too_many_assets(self):
        d = new_joint_distribution([[0.1] * 5], [1.0])
        with pytest.raises(InvalidInputError):
            grid_oracle(d, 1, 10)

    def test_stock_cash(self, stock_cash):
        res = grid_oracle(stock_cash, 1, 30)
        assert res.weights[0] == 20 / 30

    def test_all_cash_tie_break(self):
        d = new_joint_distribution([[0.0, 0.0, 0.0]], [1.0])
        res = grid_oracle(d, 2, 7)
        assert res.value == 0.0
        np.testing.assert_array_equal(res.weights, [0.0, 0.0, 1.0])

    def test_lattice_order_and_size(self):
        pts = simplex_lattice(3, 4)
        assert pts.shape == (15, 3)
        assert np.all(pts.sum(axis=1) == 4)
        assert [tuple(p) for p in pts] == sorted(tuple(p) for p in pts)


class TestProperties:
    def test_oracle_agreement(self, rng):
        for _ in range(50):
            d = random_model(rng)
            n = int(rng.integers(1, 3))
            res = solve(d, n)
            oracle = grid_oracle(d, n, 100)
            assert res.optimal_value >= oracle.value - 1e-6

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_dominance_frequency_invariance(self, rng, n):
        for _ in range(15):
            d = random_dominant_model(rng)
            j = find_dominant(d).dominant
            assert j == 0
            assert solve(d, n).weights[j] >= 1 - 1e-6
