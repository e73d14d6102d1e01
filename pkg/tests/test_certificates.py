import json

import numpy as np
import pytest
from _models import random_model, random_weights

from freqkelly.certificates import (
    dominance_condition,
    expected_log_relative_wealth,
    expected_ratio_asset,
    expected_ratios,
    expected_relative_wealth,
    find_dominant,
    kkt_certify,
)
from freqkelly.errors import InvalidInputError, ModeMismatchError
from freqkelly.returns_model import compound_exact, compound_sample, new_joint_distribution
from freqkelly.solver import solve

K_STAR = [2 / 3, 1 / 3]


@pytest.fixture
def c1(stock_cash):
    return compound_exact(stock_cash, 1)


class TestExpectedRatio:
    def test_stock(self, c1):
        # 0.5 * 1.5/(4/3) + 0.5 * 0.7/0.8 = 0.5625 + 0.4375
        assert expected_ratio_asset(c1, K_STAR, 0) == pytest.approx(1.0, abs=1e-15)

    def test_cash(self, c1):
        # 0.5 * 1/(4/3) + 0.5 * 1/0.8 = 0.375 + 0.625
        assert expected_ratio_asset(c1, K_STAR, 1) == pytest.approx(1.0, abs=1e-15)

    def test_unit_vector(self, rng):
        for _ in range(10):
            d = random_model(rng)
            c = compound_exact(d, int(rng.integers(1, 4)))
            i = int(rng.integers(d.asset_count))
            # each term is exactly 1; only the probability sum rounds
            assert expected_ratio_asset(c, np.eye(d.asset_count)[i], i) == pytest.approx(1.0, abs=4e-16)

    def test_errors(self, c1, stock_cash):
        with pytest.raises(InvalidInputError):
            expected_ratio_asset(c1, K_STAR, 2)
        with pytest.raises(ModeMismatchError):
            expected_ratio_asset(compound_sample(stock_cash, 1, 5, seed=1), K_STAR, 0)

    def test_weighted_sum_identity(self, rng):
        for _ in range(200):
            d = random_model(rng)
            c = compound_exact(d, int(rng.integers(1, 4)))
            K = random_weights(rng, d.asset_count)
            assert abs(K @ expected_ratios(c, K) - 1.0) <= 1e-12


class TestKktCertify:
    def test_optimum_passes(self, c1):
        cert = kkt_certify(c1, K_STAR)
        assert cert.passed
        assert cert.max_residual <= 1e-12
        assert cert.verdicts == ["equality:pass", "equality:pass"]

    def test_suboptimal_fails(self, c1):
        cert = kkt_certify(c1, [0.9, 0.1])
        # 0.5 * 1.5/1.45 + 0.5 * 0.7/0.73
        assert cert.ratios[0] == pytest.approx(0.5 * 1.5 / 1.45 + 0.5 * 0.7 / 0.73, abs=1e-15)
        assert abs(cert.ratios[0] - 1.0) > 1e-6
        assert not cert.passed

    def test_dominant_corner_passes(self):
        d = new_joint_distribution([[0.0, 0.2]], [1.0])
        cert = kkt_certify(compound_exact(d, 1), [0.0, 1.0])
        assert cert.passed
        assert cert.verdicts[0] == "inequality:pass"
        assert cert.ratios[0] == pytest.approx(1 / 1.2, abs=1e-15)

    def test_serializes(self, c1):
        doc = json.loads(json.dumps(kkt_certify(c1, K_STAR).to_dict()))
        assert doc["pass"] is True and len(doc["ratios"]) == 2

    def test_mode_mismatch(self, stock_cash):
        with pytest.raises(ModeMismatchError):
            kkt_certify(compound_sample(stock_cash, 1, 5, seed=1), K_STAR)


class TestDominance:
    def test_self_ratio(self, stock_cash):
        assert dominance_condition(stock_cash, 1, 1) == 1.0

    def test_deterministic(self):
        d = new_joint_distribution([[0.0, 0.2]], [1.0])
        assert dominance_condition(d, 0, 1) == pytest.approx(1 / 1.2, abs=1e-15)
        rep = find_dominant(d)
        assert rep.dominant == 1
        np.testing.assert_array_equal(np.diag(rep.matrix), 1.0)

    def test_stock_cash_none(self, stock_cash):
        assert dominance_condition(stock_cash, 0, 1) == pytest.approx(1.1, abs=1e-15)
        assert dominance_condition(stock_cash, 1, 0) == pytest.approx(0.5 / 1.5 + 0.5 / 0.7, abs=1e-15)
        assert find_dominant(stock_cash).dominant is None

    def test_identical_tie_break(self, two_point_stock):
        x = two_point_stock.scenarios[:, 0]
        d = new_joint_distribution(np.column_stack([x, x, np.zeros(2)]), [0.5, 0.5])
        assert find_dominant(d).dominant is None
        d2 = new_joint_distribution(np.column_stack([x, x]), [0.5, 0.5])
        assert find_dominant(d2).dominant == 0

    def test_matrix_matches_pairwise(self, rng):
        for _ in range(10):
            d = random_model(rng)
            rep = find_dominant(d)
            for i in range(d.asset_count):
                for j in range(d.asset_count):
                    assert rep.matrix[i, j] == pytest.approx(dominance_condition(d, i, j), abs=1e-15)

    def test_index_error(self, stock_cash):
        with pytest.raises(InvalidInputError):
            dominance_condition(stock_cash, 0, 5)

    def test_serializes(self):
        d = new_joint_distribution([[0.0, 0.2]], [1.0], ["cash", "bond"])
        doc = json.loads(json.dumps(find_dominant(d).to_dict()))
        assert doc["dominant_asset"] == "bond"


class TestRelativeWealth:
    def test_identity(self, c1):
        assert expected_relative_wealth(c1, K_STAR, K_STAR) == 1.0

    def test_supported_equality(self, c1):
        assert expected_relative_wealth(c1, [1, 0], K_STAR) == pytest.approx(1.0, abs=1e-15)
        assert expected_relative_wealth(c1, [0, 1], K_STAR) == pytest.approx(1.0, abs=1e-15)

    def test_flags_suboptimal(self, c1):
        val = expected_relative_wealth(c1, [0, 1], [0.9, 0.1])
        assert val == pytest.approx(0.5 / 1.45 + 0.5 / 0.73, abs=1e-15)
        assert val > 1.0

    def test_solved_optimum_certifies_and_dominates(self, rng):
        for _ in range(30):
            d = random_model(rng)
            n = int(rng.integers(1, 3))
            c = compound_exact(d, n)
            K_star = solve(d, n).weights
            assert kkt_certify(c, K_star).passed
            for _ in range(20):
                K = random_weights(rng, d.asset_count)
                assert expected_relative_wealth(c, K, K_star) <= 1 + 1e-8
                assert expected_log_relative_wealth(c, K, K_star) <= 1e-8
