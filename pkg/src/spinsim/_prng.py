"""Counter-mode PRNG shared by every stochastic component.

All randomness in the protocol is derived from a 64-bit seed, a stream id,
and a position counter, so any entry of the (astronomically large) virtual
codebook can be regenerated in O(1) by any process.  The generator is a
splitmix64-style counter hash; the numpy and numba code paths evaluate the
same integer arithmetic and therefore produce bit-identical draws.
"""

import numpy as np

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
STEP = U64(0xC2B2AE3D27D4EB4F)
_M1 = U64(0xFF51AFD7ED558CCD)
_M2 = U64(0xC4CEB9FE1A85EC53)
_S33 = U64(33)
_S11 = U64(11)
_INV53 = 1.0 / float(1 << 53)


def mix64(z):
    """murmur3 finalizer; accepts a uint64 scalar or array, wraps mod 2^64."""
    with np.errstate(over="ignore"):
        z = U64(z) if np.isscalar(z) else z.astype(np.uint64, copy=True)
        z ^= z >> _S33
        z = z * _M1
        z ^= z >> _S33
        z = z * _M2
        z ^= z >> _S33
        return z


def stream_key(seed, stream):
    """Key for an independent draw stream (codebook entry, run input, ...)."""
    with np.errstate(over="ignore"):
        return mix64(U64(seed & 0xFFFFFFFFFFFFFFFF) * GOLDEN + U64(stream))


def derive_seed(master_seed, tag, run=0):
    """64-bit child seed for a tagged sub-experiment."""
    with np.errstate(over="ignore"):
        return int(mix64(stream_key(master_seed, tag) + U64(run) * GOLDEN))


def uniform_block(key, start, count):
    """`count` uniforms in [0, 1) at positions start..start+count-1 of a stream."""
    with np.errstate(over="ignore"):
        ctr = key + (U64(start) + np.arange(count, dtype=np.uint64)) * STEP
    return (mix64(ctr) >> _S11) * _INV53


def sample_block(key, start, count, cdf):
    """i.i.d. symbols from the distribution with cumulative weights `cdf`."""
    u = uniform_block(key, start, count)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
