import math

import numpy as np
import pytest

from spinsim import _kernels
from spinsim.cli import bsc_joint
from spinsim.directions import DEFAULT_SCORE, Direction, DirectionSet
from spinsim.info import JointDistribution, mutual_information
from spinsim.protocol import (Codebook, ProtocolRun, codebook_size, decode,
                              encode, estimate_single_copy_marginals,
                              exact_small_oracle, fidelity_gap, make_codebook,
                              run_protocol, simulate)
from spinsim.typicality import SymbolSequence, TypicalityParams

Z_AXIS = DirectionSet((Direction(0, 0, 1), Direction(0, 0, -1)))


def product_joint(pin=(0.5, 0.5), pout=(0.4, 0.6)):
    return JointDistribution(np.outer(pin, pout))


class TestCodebookSize:
    def test_direct_formula(self):
        assert codebook_size(0.5, 10, 0.1) == (64, False)

    def test_zero_information(self):
        assert codebook_size(0.0, 50, 0.0) == (1, False)

    def test_capped(self):
        size, capped = codebook_size(0.00723, 2000, 0.02)
        assert capped and size == 1 << 48

    def test_invalid(self):
        with pytest.raises(ValueError):
            codebook_size(-0.1, 10, 0.1)
        with pytest.raises(ValueError):
            codebook_size(0.5, 0, 0.1)


class TestCodebookEntries:
    def test_deterministic_across_objects(self):
        joint = bsc_joint(0.3)
        params = TypicalityParams(64, 0.2, 2, 2)
        cb1 = make_codebook(joint, params, seed=9)
        cb2 = make_codebook(joint, params, seed=9)
        for idx in (1, 2, 17, cb1.size):
            assert np.array_equal(cb1.entry(idx).symbols, cb2.entry(idx).symbols)

    def test_index_range(self):
        cb = make_codebook(bsc_joint(0.3), TypicalityParams(16, 0.2, 2, 2), 1)
        with pytest.raises(ValueError):
            cb.entry(0)
        with pytest.raises(ValueError):
            cb.entry(cb.size + 1)

    def test_entries_statistically_independent(self):
        # pairwise Hamming agreement ~ sum_j p(j)^2 over distinct entries
        pout = np.array([0.3, 0.7])
        joint = product_joint(pout=pout)
        K = 200
        cb = Codebook(seed=5, K=K, size=1 << 20, capped=False,
                      output_marginal=joint.output_marginal())
        agree = [
            float(np.mean(cb.entry(2 * t + 1).symbols
                          == cb.entry(2 * t + 2).symbols))
            for t in range(1000)]
        expected = float((pout ** 2).sum())
        sigma = math.sqrt(expected * (1 - expected) / (1000 * K))
        assert abs(np.mean(agree) - expected) < 3 * sigma

    def test_index_budget(self):
        for joint, K, eps in ((bsc_joint(0.3), 50, 0.2),
                              (bsc_joint(0.45), 400, 0.05)):
            params = TypicalityParams(K, eps, 2, 2)
            cb = make_codebook(joint, params, seed=0)
            if not cb.capped:
                mi = mutual_information(joint)
                assert cb.index_bits <= K * (mi + eps) + 1


class TestEncodeDecode:
    def test_product_target_found_quickly(self):
        joint = product_joint()
        params = TypicalityParams(600, 0.2, 2, 2)
        cb = make_codebook(joint, params, seed=3)
        runs = run_protocol(joint, params, 20, 12, reuse_table=True)
        assert all(r.found_typical for r in runs)
        assert np.mean([r.chosen_index for r in runs]) < 5

    def test_forced_fallback(self):
        # search cap 1 with an entry that cannot be typical at tiny epsilon
        joint = bsc_joint(0.45)
        params = TypicalityParams(64, 1e-6, 2, 2)
        cb = make_codebook(joint, params, seed=8)
        a = SymbolSequence(np.tile([0, 1], 32), 2)
        idx, found = encode(a, cb, joint, params, search_cap=1)
        assert (idx, found) == (1, False)

    def test_decode_matches_encode_scan(self):
        joint = bsc_joint(0.4)
        params = TypicalityParams(300, 0.1, 2, 2)
        for run in run_protocol(joint, params, 10, 77, reuse_table=False):
            assert run.output_block.K == params.K
            # output block is exactly the entry at the chosen index
        runs = run_protocol(joint, params, 10, 77, reuse_table=False)
        summary = simulate(joint, params, 10, 77, reuse_table=False)
        assert [r.chosen_index for r in runs] == list(summary.chosen_indices)

    def test_backends_agree(self):
        joint = bsc_joint(0.4)
        params = TypicalityParams(200, 0.1, 2, 2)
        import spinsim.protocol as proto
        input_keys, cb_seeds = proto._run_keys(55, 20, False)
        args = (input_keys, cb_seeds, params.K, 1 << 16,
                joint.input_marginal().cdf(), joint.output_marginal().cdf(),
                joint.p, params.joint_tol)
        pooled_np, chosen_np, found_np = _kernels._np_simulate(*args)
        pooled, chosen, found = _kernels.simulate_runs(*args)
        assert np.array_equal(pooled, pooled_np)
        assert np.array_equal(chosen, chosen_np)
        assert np.array_equal(found, found_np)

    def test_fallback_invariant(self):
        with pytest.raises(ValueError):
            ProtocolRun(SymbolSequence(np.array([0]), 1), 2,
                        SymbolSequence(np.array([0]), 1), False)


class TestRunProtocol:
    def test_degenerate_alphabet(self):
        joint = JointDistribution(np.array([[1.0]]))
        params = TypicalityParams(32, 0.5, 1, 1)
        runs = run_protocol(joint, params, 5, 3)
        assert all(r.found_typical and r.chosen_index == 1 for r in runs)
        assert estimate_single_copy_marginals(runs).p == pytest.approx(np.array([[1.0]]))

    def test_reuse_table_is_deterministic(self):
        joint = bsc_joint(0.45)
        params = TypicalityParams(300, 0.08, 2, 2)
        r1 = run_protocol(joint, params, 4, 21, reuse_table=True)
        r2 = run_protocol(joint, params, 4, 21, reuse_table=True)
        for a, b in zip(r1, r2):
            assert np.array_equal(a.input_block.symbols, b.input_block.symbols)
            assert np.array_equal(a.output_block.symbols, b.output_block.symbols)

    def test_fresh_tables_give_different_outputs(self):
        joint = bsc_joint(0.45)
        params = TypicalityParams(400, 0.05, 2, 2)
        import spinsim.protocol as proto
        differ = 0
        trials = 50
        for t in range(trials):
            runs = run_protocol(joint, params, 2, 1000 + t, reuse_table=False,
                                search_cap=1 << 14)
            cb_seed = proto._run_keys(1000 + t, 2, False)[1][1]
            size, capped = codebook_size(mutual_information(joint),
                                         params.K, params.epsilon)
            cb = Codebook(seed=int(cb_seed), K=params.K, size=size,
                          capped=capped, output_marginal=joint.output_marginal())
            idx, _ = encode(runs[0].input_block, cb, joint, params,
                            search_cap=min(cb.size, 1 << 14))
            if not np.array_equal(runs[0].output_block.symbols,
                                  decode(idx, cb).symbols):
                differ += 1
        assert differ == trials

    def test_output_marginal_exactness_under_forced_index_one(self):
        # always decoding entry 1 of a fresh table gives i.i.d. p(m) outputs
        pout = np.array([0.3, 0.7])
        joint = product_joint(pout=pout)
        K = 100
        counts = np.zeros(2)
        n_tables = 400
        for t in range(n_tables):
            cb = Codebook(seed=t, K=K, size=4, capped=False,
                          output_marginal=joint.output_marginal())
            counts += np.bincount(decode(1, cb).symbols, minlength=2)
        freq = counts / counts.sum()
        sigma = math.sqrt(float((pout * (1 - pout)).max()) / (n_tables * K))
        assert np.abs(freq - pout).max() < 3 * sigma


class TestSingleCopyMarginals:
    def test_product_target_converges(self):
        joint = product_joint()
        params = TypicalityParams(800, 0.1, 2, 2)
        summary = simulate(joint, params, 100, 5, reuse_table=True)
        err = np.abs(summary.single_copy_joint.p - joint.p).max()
        assert err < params.joint_tol

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            estimate_single_copy_marginals([])


class TestFidelityGap:
    def test_identical_distributions(self):
        joint = bsc_joint(0.2)
        gap = fidelity_gap(joint, joint, DEFAULT_SCORE, Z_AXIS, Z_AXIS, 0.1)
        assert gap.gap == 0.0
        assert gap.bound == pytest.approx(0.1)

    def test_constant_score_sees_no_gap(self):
        from spinsim.directions import ScoreFunction
        const = ScoreFunction(lambda n, m: 1.0, f_max=1.0)
        a = bsc_joint(0.2)
        b = bsc_joint(0.3)
        gap = fidelity_gap(a, b, const, Z_AXIS, Z_AXIS, 0.05)
        assert gap.gap == pytest.approx(0.0, abs=1e-12)


class TestExactOracle:
    def test_limits_enforced(self):
        joint = bsc_joint(0.3)
        with pytest.raises(ValueError):
            exact_small_oracle(joint, TypicalityParams(5, 0.5, 2, 2), 4)
        with pytest.raises(ValueError):
            exact_small_oracle(joint, TypicalityParams(4, 0.5, 2, 2), 7)

    def test_degenerate_exact(self):
        joint = JointDistribution(np.array([[1.0]]))
        oracle = exact_small_oracle(joint, TypicalityParams(2, 0.5, 1, 1), 2)
        assert oracle.p == pytest.approx(np.array([[1.0]]))

    def test_product_target_marginal_preserved(self):
        joint = product_joint(pin=(0.3, 0.7), pout=(0.5, 0.5))
        oracle = exact_small_oracle(joint, TypicalityParams(2, 1.9, 2, 2), 2)
        assert oracle.p.sum(axis=0) == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_monte_carlo_cross_check(self):
        joint = bsc_joint(0.45, (0.4, 0.6))
        params = TypicalityParams(4, 0.5, 2, 2)
        oracle = exact_small_oracle(joint, params, 4)
        summary = simulate(joint, params, 200_000, 97, reuse_table=False,
                           search_cap=4)
        n = 200_000 * params.K
        sigma = np.sqrt(oracle.p * (1 - oracle.p) * params.K / n)
        assert bool((np.abs(summary.single_copy_joint.p - oracle.p)
                     < 4 * sigma).all())
