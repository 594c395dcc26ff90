from fractions import Fraction
import math

import numpy as np
import pytest

from spinsim.cli import bsc_joint
from spinsim.info import Distribution, JointDistribution
from spinsim.typicality import (SymbolSequence, TypicalityParams,
                                draw_sequence, draw_typical_sequence,
                                empirical_pair_counts, is_jointly_typical,
                                is_strongly_typical, joint_typicality_rate)


def seq(symbols, n):
    return SymbolSequence(np.array(symbols), n)


class TestPairCounts:
    def test_constant_pair(self):
        c = empirical_pair_counts(seq([0, 0], 2), seq([1, 1], 2))
        assert c.tolist() == [[0, 2], [0, 0]]

    def test_mixed(self):
        c = empirical_pair_counts(seq([0, 1, 0, 1], 2), seq([0, 1, 1, 0], 2))
        assert c.tolist() == [[1, 1], [1, 1]]

    def test_conservation(self):
        rng = np.random.default_rng(0)
        a = seq(rng.integers(0, 3, size=1000), 3)
        b = seq(rng.integers(0, 2, size=1000), 2)
        assert empirical_pair_counts(a, b).sum() == 1000

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            empirical_pair_counts(seq([0], 2), seq([0, 1], 2))


class TestStronglyTypical:
    def test_exact_frequencies(self):
        params = TypicalityParams(4, 0.1, 2, 2)
        assert is_strongly_typical(seq([0, 1, 0, 1], 2), [0.5, 0.5], params)

    def test_constant_sequence_fails(self):
        params = TypicalityParams(4, 0.4, 2, 2)
        assert not is_strongly_typical(seq([0, 0, 0, 0], 2), [0.5, 0.5], params)

    def test_exact_match_any_epsilon(self):
        params = TypicalityParams(10, 1e-12, 2, 2)
        a = seq([0] * 3 + [1] * 7, 2)
        assert is_strongly_typical(a, [0.3, 0.7], params)

    def test_alphabet_mismatch(self):
        params = TypicalityParams(4, 0.1, 3, 2)
        with pytest.raises(ValueError):
            is_strongly_typical(seq([0, 1, 0, 1], 2), [0.5, 0.5], params)

    def test_monotone_in_epsilon(self):
        rng = np.random.default_rng(1)
        p = Distribution(np.array([0.4, 0.6]))
        for _ in range(200):
            a = seq(rng.integers(0, 2, size=50), 2)
            for e0, e1 in ((0.05, 0.2), (0.2, 0.9)):
                if is_strongly_typical(a, p, TypicalityParams(50, e0, 2, 2)):
                    assert is_strongly_typical(a, p, TypicalityParams(50, e1, 2, 2))


class TestJointlyTypical:
    def test_exact_joint_frequencies(self):
        pq = JointDistribution(np.array([[0.25, 0.25], [0.25, 0.25]]))
        params = TypicalityParams(4, 1e-12, 2, 2)
        assert is_jointly_typical(seq([0, 0, 1, 1], 2), seq([0, 1, 0, 1], 2),
                                  pq, params)

    def test_concentrated_pair_fails(self):
        pq = JointDistribution(np.full((2, 2), 0.25))
        params = TypicalityParams(2, 0.8, 2, 2)
        assert not is_jointly_typical(seq([0, 0], 2), seq([0, 0], 2), pq, params)

    def test_joint_implies_marginal(self):
        rng = np.random.default_rng(2)
        pq = bsc_joint(0.3)
        K = 40
        params = TypicalityParams(K, 0.3, 2, 2)
        seen = 0
        for _ in range(500):
            a = seq(rng.integers(0, 2, size=K), 2)
            b = seq(rng.integers(0, 2, size=K), 2)
            if is_jointly_typical(a, b, pq, params):
                seen += 1
                assert is_strongly_typical(a, pq.input_marginal(), params)
        assert seen > 0


def exact_binary_typical_fraction(K, eps):
    """P(|#heads/K - 1/2| < eps/2) for a fair coin, by exact binomial sums."""
    lo = math.floor(K * (0.5 - eps / 2)) + 1
    hi = math.ceil(K * (0.5 + eps / 2)) - 1
    total = sum(math.comb(K, k) for k in range(lo, hi + 1))
    return float(Fraction(total, 2 ** K))


class TestConcentration:
    def test_typical_fraction_grows_and_exceeds(self):
        fracs = [exact_binary_typical_fraction(K, 0.05)
                 for K in (250, 1000, 4000)]
        assert fracs[0] < fracs[1] < fracs[2]
        assert fracs[2] > 0.95

    def test_empirical_matches_exact_binomial(self):
        K, eps = 4000, 0.05
        params = TypicalityParams(K, eps, 2, 2)
        p = Distribution(np.array([0.5, 0.5]))
        hits = sum(is_strongly_typical(draw_sequence(p, K, 7, stream=t), p, params)
                   for t in range(400))
        exact = exact_binary_typical_fraction(K, eps)
        sigma = math.sqrt(exact * (1 - exact) / 400)
        assert abs(hits / 400 - exact) < 4 * sigma + 1e-9


class TestJointTypicalityRate:
    def test_product_distribution_rate_grows_to_one(self):
        pq = JointDistribution(np.outer([0.5, 0.5], [0.4, 0.6]))
        r_small = joint_typicality_rate(pq, TypicalityParams(100, 0.2, 2, 2),
                                        2000, seed=3)
        r_large = joint_typicality_rate(pq, TypicalityParams(1500, 0.2, 2, 2),
                                        2000, seed=3)
        assert r_large > 0.99
        assert r_large >= r_small

    def test_single_trial_is_indicator(self):
        pq = bsc_joint(0.45)
        r = joint_typicality_rate(pq, TypicalityParams(100, 0.05, 2, 2), 1, seed=4)
        assert r in (0.0, 1.0)

    def test_deterministic_for_seed(self):
        pq = bsc_joint(0.45)
        params = TypicalityParams(400, 0.05, 2, 2)
        r1 = joint_typicality_rate(pq, params, 3000, seed=9)
        r2 = joint_typicality_rate(pq, params, 3000, seed=9)
        assert r1 == r2

    def test_typical_input_draw(self):
        pq = bsc_joint(0.45)
        params = TypicalityParams(2000, 0.05, 2, 2)
        a = draw_typical_sequence(pq.input_marginal(), params, 5)
        assert is_strongly_typical(a, pq.input_marginal(), params)
