"""Remote distribution preparation: block-encode inputs by pointing into a
shared random table of guess blocks, so the receiver's per-position output
statistics land within the typicality tolerance of the target joint.

The table is virtual: entry `t` is regenerated on demand from (seed, t) by
the counter-mode PRNG, so the nominal 2^{K(I+eps)} entries are never
materialized and only the ~1/rate entries actually scanned cost anything.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from . import _kernels, _prng
from .info import Distribution, JointDistribution, mutual_information
from .typicality import (SymbolSequence, TypicalityParams, empirical_pair_counts,
                         is_jointly_typical)

SIZE_CAP = 1 << 48
DEFAULT_SEARCH_CAP = 1 << 24
_TAG_INPUT = 101
_TAG_CODEBOOK = 102


def codebook_size(mutual_info_bits, K, epsilon):
    """Nominal table size ceil(2^{K(I+eps)}), capped at 2^48.

    Returns (size, capped)."""
    if mutual_info_bits < 0 or K < 1 or epsilon < 0:
        raise ValueError("need I >= 0, K >= 1, epsilon >= 0")
    exponent = K * (mutual_info_bits + epsilon)
    if exponent >= 48:
        return SIZE_CAP, True
    return math.ceil(2.0 ** exponent), False


@dataclass(frozen=True)
class Codebook:
    """Virtual table of `size` length-K blocks, i.i.d. from the output marginal."""

    seed: int
    K: int
    size: int
    capped: bool
    output_marginal: Distribution

    def __post_init__(self):
        if not 1 <= self.size <= SIZE_CAP:
            raise ValueError("codebook size out of range")

    @property
    def index_bits(self):
        return max(1, math.ceil(math.log2(self.size)))

    def entry(self, index):
        """Entry at 1-based index; deterministic in (seed, index)."""
        if not 1 <= index <= self.size:
            raise ValueError(f"index {index} outside table of size {self.size}")
        sym = _kernels.codebook_entry(self.seed, index, self.K,
                                      self.output_marginal.cdf())
        np.minimum(sym, len(self.output_marginal) - 1, out=sym)
        return SymbolSequence(sym, len(self.output_marginal))


def make_codebook(joint, params, seed):
    """Codebook sized from the joint's mutual information at the params' eps."""
    mi = mutual_information(joint)
    size, capped = codebook_size(mi, params.K, params.epsilon)
    if params.K * mi > 24:
        warnings.warn(
            f"expected codebook search effort ~2^{params.K * mi:.1f} entries; "
            "this target is beyond desk scale", RuntimeWarning)
    return Codebook(seed=seed, K=params.K, size=size, capped=capped,
                    output_marginal=joint.output_marginal())


def encode(input_seq, codebook, joint, params, search_cap=DEFAULT_SEARCH_CAP):
    """First table index whose entry is jointly typical with the input block;
    (1, False) when no scanned entry qualifies."""
    if input_seq.alphabet_size != params.n_inputs:
        raise ValueError("input sequence alphabet does not match params")
    if input_seq.K != codebook.K or input_seq.K != params.K:
        raise ValueError("block length mismatch")
    if search_cap > codebook.size:
        raise ValueError("search_cap exceeds the table size")
    cap = min(codebook.size, search_cap)
    return _kernels.scan_codebook(
        input_seq.symbols, codebook.seed, cap,
        codebook.output_marginal.cdf(), joint.p, params.joint_tol)


def decode(index, codebook):
    """The guess block at the transmitted index."""
    return codebook.entry(index)


@dataclass(frozen=True)
class ProtocolRun:
    """One block transmission."""

    input_block: SymbolSequence
    chosen_index: int
    output_block: SymbolSequence
    found_typical: bool

    def __post_init__(self):
        if not self.found_typical and self.chosen_index != 1:
            raise ValueError("fallback runs must carry index 1")


def _run_keys(master_seed, runs, reuse_table):
    input_seed = _prng.derive_seed(master_seed, _TAG_INPUT)
    with np.errstate(over="ignore"):
        input_keys = _prng.mix64(
            _prng.U64(input_seed) * _prng.GOLDEN
            + np.arange(runs, dtype=np.uint64))
    if reuse_table:
        cb = _prng.derive_seed(master_seed, _TAG_CODEBOOK, 0)
        cb_seeds = np.full(runs, cb, dtype=np.uint64)
    else:
        cb_seeds = np.array(
            [_prng.derive_seed(master_seed, _TAG_CODEBOOK, r + 1)
             for r in range(runs)], dtype=np.uint64)
    return input_keys, cb_seeds


def run_protocol(joint, params, runs, master_seed, reuse_table=True,
                 search_cap=DEFAULT_SEARCH_CAP):
    """Execute `runs` full transmissions; returns one ProtocolRun each.

    Inputs are fresh i.i.d. blocks from the joint's input marginal.  With
    reuse_table one codebook seed serves every run; otherwise each run uses
    its own fresh table."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    ni, nj = joint.shape
    if (ni, nj) != (params.n_inputs, params.n_outputs):
        raise ValueError("joint shape does not match params alphabet sizes")
    input_keys, cb_seeds = _run_keys(master_seed, runs, reuse_table)
    cdf_in = joint.input_marginal().cdf()
    size, capped = _sized(joint, params)
    out_marginal = joint.output_marginal()
    out = []
    for r in range(runs):
        sym = np.minimum(_prng.sample_block(input_keys[r], 0, params.K, cdf_in),
                         ni - 1)
        a = SymbolSequence(sym, ni)
        cb = Codebook(seed=int(cb_seeds[r]), K=params.K, size=size,
                      capped=capped, output_marginal=out_marginal)
        idx, found = encode(a, cb, joint, params,
                            search_cap=min(search_cap, cb.size))
        out.append(ProtocolRun(a, idx, decode(idx, cb), found))
    return out


def _sized(joint, params):
    return codebook_size(mutual_information(joint), params.K, params.epsilon)


@dataclass(frozen=True)
class SimulationSummary:
    """Pooled statistics over many runs of the protocol."""

    pooled_counts: np.ndarray
    chosen_indices: np.ndarray
    found_typical: np.ndarray
    runs: int
    K: int

    @property
    def single_copy_joint(self):
        return JointDistribution(self.pooled_counts / self.pooled_counts.sum())

    @property
    def mean_index(self):
        return float(self.chosen_indices.mean())

    @property
    def fallback_rate(self):
        return float(1.0 - self.found_typical.mean())


def simulate(joint, params, runs, master_seed, reuse_table=True,
             search_cap=DEFAULT_SEARCH_CAP):
    """Bulk protocol execution returning pooled pair counts instead of records.

    Identical streams to run_protocol: the r-th run here reproduces the r-th
    ProtocolRun bit for bit."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    ni, nj = joint.shape
    if (ni, nj) != (params.n_inputs, params.n_outputs):
        raise ValueError("joint shape does not match params alphabet sizes")
    size, _ = _sized(joint, params)
    cap = min(size, search_cap)
    input_keys, cb_seeds = _run_keys(master_seed, runs, reuse_table)
    pooled, chosen, found = _kernels.simulate_runs(
        input_keys, cb_seeds, params.K, cap,
        joint.input_marginal().cdf(), joint.output_marginal().cdf(),
        joint.p, params.joint_tol)
    return SimulationSummary(pooled, chosen, found, runs, params.K)


def estimate_single_copy_marginals(runs):
    """Pool every position of every run into the empirical pair distribution."""
    if not runs:
        raise ValueError("need at least one run")
    K = runs[0].input_block.K
    ni = runs[0].input_block.alphabet_size
    nj = runs[0].output_block.alphabet_size
    counts = np.zeros((ni, nj), dtype=np.int64)
    for run in runs:
        if run.input_block.K != K:
            raise ValueError("all runs must share the block length")
        counts += empirical_pair_counts(run.input_block, run.output_block, ni, nj)
    return JointDistribution(counts / counts.sum())


@dataclass(frozen=True)
class FidelityGap:
    """Average scores under the target and simulated joints, and their gap."""

    f_quantum: float
    f_classical: float
    gap: float
    bound: float


def fidelity_gap(target, simulated, score, inputs, guesses, epsilon):
    """Average-score difference |f_Q - f_C| and the eps*f_max bound on it."""
    if target.shape != simulated.shape:
        raise ValueError("target and simulated joints differ in shape")
    f = score.matrix(inputs, guesses)
    if f.shape != target.shape:
        raise ValueError("score table shape does not match the joints")
    fq = float((f * target.p).sum())
    fc = float((f * simulated.p).sum())
    return FidelityGap(fq, fc, abs(fq - fc), epsilon * score.f_max)


def exact_small_oracle(joint, params, table_size):
    """Exact single-copy pair distribution of the protocol, by enumerating
    every codebook realization and every input block.

    Brute force over |j|^(K*T) tables and |i|^K inputs; independent of the
    PRNG-driven simulation path."""
    ni, nj = joint.shape
    K, T = params.K, table_size
    if ni * nj > 4 or K > 4 or T > 6:
        raise ValueError("oracle limits: |i|*|j| <= 4, K <= 4, T <= 6")
    n_out_seqs = nj ** K
    n_in_seqs = ni ** K
    n_tables = n_out_seqs ** T
    if n_tables * n_in_seqs > 2 * 10 ** 7:
        raise ValueError("state space too large for exhaustive enumeration")

    def all_seqs(base, length):
        grids = np.meshgrid(*([np.arange(base)] * length), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    out_seqs = all_seqs(nj, K)                       # (S, K)
    in_seqs = all_seqs(ni, K)                        # (A, K)
    p_m = joint.output_marginal().probabilities
    p_i = joint.input_marginal().probabilities
    w_out = np.prod(p_m[out_seqs], axis=1)           # i.i.d. table-entry weights
    w_in = np.prod(p_i[in_seqs], axis=1)

    # typicality table over (input block, candidate entry)
    typ = np.zeros((n_in_seqs, n_out_seqs), dtype=bool)
    for ai in range(n_in_seqs):
        a = SymbolSequence(in_seqs[ai], ni)
        for si in range(n_out_seqs):
            typ[ai, si] = is_jointly_typical(
                a, SymbolSequence(out_seqs[si], nj), joint, params)

    # all table realizations as T-tuples of entry ids
    grids = np.meshgrid(*([np.arange(n_out_seqs)] * T), indexing="ij")
    tables = np.stack([g.ravel() for g in grids], axis=0)      # (T, R)
    table_w = np.prod(w_out[tables], axis=0)                   # (R,)

    pair_freq = np.zeros((n_in_seqs, n_out_seqs, ni, nj))
    for ai in range(n_in_seqs):
        a = SymbolSequence(in_seqs[ai], ni)
        for si in range(n_out_seqs):
            pair_freq[ai, si] = empirical_pair_counts(
                a, SymbolSequence(out_seqs[si], nj), ni, nj) / K

    p_c = np.zeros((ni, nj))
    for ai in range(n_in_seqs):
        ok = typ[ai][tables]                                   # (T, R)
        any_ok = ok.any(axis=0)
        first = np.argmax(ok, axis=0)
        chosen = tables[first, np.arange(tables.shape[1])]
        chosen = np.where(any_ok, chosen, tables[0])           # fallback: entry 1
        per_entry = np.bincount(chosen, weights=table_w, minlength=n_out_seqs)
        p_c += w_in[ai] * np.tensordot(per_entry, pair_freq[ai], axes=1)
    return JointDistribution(p_c / p_c.sum())
