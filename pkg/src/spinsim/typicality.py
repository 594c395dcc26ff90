"""Strongly (frequency) typical sets for single sequences and joint pairs.

Membership uses the strict tests
    |#(i)/K - p(i)| < eps/|i|              (marginal)
    |#(i,j)/K - p(i,j)| < eps/(|i| |j|)    (joint)
for every symbol / symbol pair.  `joint_typicality_rate` measures how often
an i.i.d.-from-the-output-marginal guess block lands jointly typical with a
fixed typical input block, which is the quantity that sets the codebook
search effort.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels, _prng
from .info import Distribution, JointDistribution


@dataclass(frozen=True)
class SymbolSequence:
    """Block of K alphabet indices."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        s = np.ascontiguousarray(self.symbols, dtype=np.int64)
        object.__setattr__(self, "symbols", s)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("sequence must be a nonempty vector")
        if s.min() < 0 or s.max() >= self.alphabet_size:
            raise ValueError("symbol out of alphabet range")

    def __len__(self):
        return self.symbols.size

    @property
    def K(self):
        return self.symbols.size


@dataclass(frozen=True)
class TypicalityParams:
    """Block length, tolerance, and alphabet sizes for typicality tests."""

    K: int
    epsilon: float
    n_inputs: int
    n_outputs: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("alphabet sizes must be >= 1")

    @property
    def marginal_tol(self):
        return self.epsilon / self.n_inputs

    @property
    def joint_tol(self):
        return self.epsilon / (self.n_inputs * self.n_outputs)


def empirical_pair_counts(a, b, n_inputs=None, n_outputs=None):
    """count[i, j] = number of positions where (a_k, b_k) = (i, j)."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    ni = n_inputs if n_inputs is not None else a.alphabet_size
    nj = n_outputs if n_outputs is not None else b.alphabet_size
    flat = a.symbols * nj + b.symbols
    return np.bincount(flat, minlength=ni * nj).reshape(ni, nj)


def is_strongly_typical(a, p, params):
    """Strict frequency typicality of a single sequence against p."""
    if not isinstance(p, Distribution):
        p = Distribution(np.asarray(p, dtype=float))
    if len(p) != a.alphabet_size or a.alphabet_size != params.n_inputs:
        raise ValueError("alphabet mismatch between sequence, p, and params")
    K = a.K
    freq = np.bincount(a.symbols, minlength=len(p)) / K
    return bool(np.all(np.abs(freq - p.probabilities) < params.marginal_tol))


def is_jointly_typical(a, b, joint, params):
    """Strict joint frequency typicality of a pair of equal-length sequences."""
    if joint.shape != (params.n_inputs, params.n_outputs):
        raise ValueError("joint shape does not match params alphabet sizes")
    if a.alphabet_size != params.n_inputs or b.alphabet_size != params.n_outputs:
        raise ValueError("sequence alphabets do not match params")
    counts = empirical_pair_counts(a, b)
    K = a.K
    return bool(np.all(np.abs(counts / K - joint.p) < params.joint_tol))


def draw_sequence(p, K, seed, stream=0):
    """i.i.d. length-K sequence from p, deterministic in (seed, stream)."""
    if not isinstance(p, Distribution):
        p = Distribution(np.asarray(p, dtype=float))
    key = _prng.stream_key(seed, stream)
    sym = np.minimum(_prng.sample_block(key, 0, K, p.cdf()), len(p) - 1)
    return SymbolSequence(sym, len(p))


def draw_typical_sequence(p, params, seed, max_tries=10_000):
    """First strongly typical i.i.d. draw from p (fresh stream per try)."""
    for t in range(max_tries):
        a = draw_sequence(p, params.K, seed, stream=t)
        if is_strongly_typical(a, p, params):
            return a
    raise RuntimeError(
        f"no strongly typical sequence found in {max_tries} draws; "
        "epsilon or K too small for this distribution")


def joint_typicality_rate(joint, params, trials, seed):
    """Fraction of i.i.d. output-marginal blocks jointly typical with a fixed
    typical input block.  Deterministic for a fixed seed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not isinstance(joint, JointDistribution):
        joint = JointDistribution(np.asarray(joint, dtype=float))
    if joint.shape != (params.n_inputs, params.n_outputs):
        raise ValueError("joint shape does not match params alphabet sizes")
    a = draw_typical_sequence(joint.input_marginal(), params,
                              _prng.derive_seed(seed, tag=1))
    b_seed = _prng.derive_seed(seed, tag=2)
    with np.errstate(over="ignore"):
        b_keys = _prng.mix64(
            _prng.U64(b_seed) * _prng.GOLDEN
            + np.arange(trials, dtype=np.uint64))
    successes = _kernels.count_rate_successes(
        a.symbols, b_keys, joint.output_marginal().cdf(), joint.p,
        params.joint_tol)
    return successes / trials
