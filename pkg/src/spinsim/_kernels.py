"""Hot inner loops: codebook scanning, bulk protocol runs, typicality trials.

Two interchangeable backends produce bit-identical results:

* a numba ``@njit`` path (default), and
* a pure-numpy batched path, selected by setting the environment variable
  ``SPINSIM_DISABLE_NUMBA=1`` (or automatically if numba is unavailable).

Both evaluate the same splitmix-counter PRNG (see ``_prng``) and the same
strict-inequality typicality test, so chosen codebook indices and pooled
pair counts do not depend on the backend.  ``python -m spinsim.benchmark``
times one against the other.
"""

import os

import numpy as np

from ._prng import GOLDEN, STEP, U64, mix64, sample_block, stream_key, uniform_block

_INV53 = 1.0 / float(1 << 53)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("SPINSIM_DISABLE_NUMBA", "0") != "1"
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _np_entry(cb_seed, index, K, cdf):
    """Codebook entry `index` (1-based): K i.i.d. symbols from cdf."""
    return sample_block(stream_key(cb_seed, index), 0, K, cdf)


def _infeasible(a, p, tol):
    """True when no guess block can be jointly typical with `a`: the joint
    condition summed over j forces |#(i)/K - p(i)| < |j|*tol for every i."""
    ni, nj = p.shape
    freq = np.bincount(a, minlength=ni) / a.size
    return bool(np.any(np.abs(freq - p.sum(axis=1)) >= nj * tol))


def _np_scan(a, cb_seed, start, cap, cdf, p, tol):
    """First index in [start, cap] whose entry is jointly typical with `a`."""
    if _infeasible(a, p, tol):
        return 1, False
    K = a.size
    ni, nj = p.shape
    masks = [a == i for i in range(ni)]
    chunk = max(1, min(cap - start + 1, max(1, 2_000_000 // max(K, 1))))
    idx0 = start
    with np.errstate(over="ignore"):
        while idx0 <= cap:
            c = min(chunk, cap - idx0 + 1)
            indices = np.arange(idx0, idx0 + c, dtype=np.uint64)
            keys = mix64(U64(cb_seed) * GOLDEN + indices)
            ctr = keys[:, None] + np.arange(K, dtype=np.uint64)[None, :] * STEP
            u = (mix64(ctr) >> U64(11)) * _INV53
            b = np.minimum(np.searchsorted(cdf, u.ravel(), side="right"),
                           nj - 1).reshape(c, K)
            ok = np.ones(c, dtype=bool)
            for i in range(ni):
                sub = b[:, masks[i]]
                for j in range(nj):
                    cnt = (sub == j).sum(axis=1)
                    ok &= np.abs(cnt / K - p[i, j]) < tol
            hits = np.nonzero(ok)[0]
            if hits.size:
                return idx0 + int(hits[0]), True
            idx0 += c
    return 1, False


def _np_simulate(input_keys, cb_seeds, K, search_cap, cdf_in, cdf_m, p, tol):
    runs = input_keys.size
    ni, nj = p.shape
    pooled = np.zeros((ni, nj), dtype=np.int64)
    chosen = np.ones(runs, dtype=np.int64)
    found = np.zeros(runs, dtype=bool)
    for r in range(runs):
        a = sample_block(input_keys[r], 0, K, cdf_in)
        np.minimum(a, ni - 1, out=a)
        idx, ok = _np_scan(a, cb_seeds[r], 1, search_cap, cdf_m, p, tol)
        chosen[r] = idx
        found[r] = ok
        b = _np_entry(cb_seeds[r], idx, K, cdf_m)
        np.minimum(b, nj - 1, out=b)
        np.add.at(pooled, (a, b), 1)
    return pooled, chosen, found


def _np_rate(a, b_keys, cdf, p, tol):
    """Number of i.i.d. guess blocks jointly typical with the fixed block `a`."""
    K = a.size
    ni, nj = p.shape
    masks = [a == i for i in range(ni)]
    successes = 0
    chunk = max(1, 2_000_000 // max(K, 1))
    for t0 in range(0, b_keys.size, chunk):
        keys = b_keys[t0:t0 + chunk]
        with np.errstate(over="ignore"):
            ctr = keys[:, None] + np.arange(K, dtype=np.uint64)[None, :] * STEP
        u = (mix64(ctr) >> U64(11)) * _INV53
        b = np.minimum(np.searchsorted(cdf, u.ravel(), side="right"),
                       nj - 1).reshape(keys.size, K)
        ok = np.ones(keys.size, dtype=bool)
        for i in range(ni):
            sub = b[:, masks[i]]
            for j in range(nj):
                cnt = (sub == j).sum(axis=1)
                ok &= np.abs(cnt / K - p[i, j]) < tol
        successes += int(ok.sum())
    return successes


# ---------------------------------------------------------------------------
# numba backend (same arithmetic, scalar loops)
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _nb_mix64(z):
        z ^= z >> np.uint64(33)
        z *= np.uint64(0xFF51AFD7ED558CCD)
        z ^= z >> np.uint64(33)
        z *= np.uint64(0xC4CEB9FE1A85EC53)
        z ^= z >> np.uint64(33)
        return z

    @njit(cache=True, inline="always")
    def _nb_draw(key, k, cdf):
        ctr = key + np.uint64(k) * np.uint64(0xC2B2AE3D27D4EB4F)
        u = (_nb_mix64(ctr) >> np.uint64(11)) * _INV53
        j = 0
        last = cdf.size - 1
        while j < last and u >= cdf[j]:
            j += 1
        return j

    @njit(cache=True, inline="always")
    def _nb_stream_key(seed, stream):
        return _nb_mix64(seed * np.uint64(0x9E3779B97F4A7C15) + stream)

    @njit(cache=True)
    def _nb_scan_counts(a, cb_seed, start, cap, cdf, p, tol, counts):
        K = a.size
        ni, nj = p.shape
        # no entry can be jointly typical when the input's own frequencies
        # already violate the summed-over-j bound; skip the scan entirely
        for i in range(ni):
            freq = 0.0
            row = 0.0
            for k in range(K):
                if a[k] == i:
                    freq += 1.0
            for j in range(nj):
                row += p[i, j]
            if abs(freq / K - row) >= nj * tol:
                return 1, False
        for idx in range(start, cap + 1):
            key = _nb_stream_key(cb_seed, np.uint64(idx))
            counts[:] = 0
            for k in range(K):
                counts[a[k], _nb_draw(key, k, cdf)] += 1
            typ = True
            for i in range(ni):
                for j in range(nj):
                    if abs(counts[i, j] / K - p[i, j]) >= tol:
                        typ = False
                        break
                if not typ:
                    break
            if typ:
                return idx, True
        return 1, False

    @njit(cache=True)
    def _nb_simulate(input_keys, cb_seeds, K, search_cap, cdf_in, cdf_m, p, tol):
        runs = input_keys.size
        ni, nj = p.shape
        pooled = np.zeros((ni, nj), dtype=np.int64)
        chosen = np.ones(runs, dtype=np.int64)
        found = np.zeros(runs, dtype=np.bool_)
        a = np.empty(K, dtype=np.int64)
        counts = np.empty((ni, nj), dtype=np.int64)
        for r in range(runs):
            for k in range(K):
                a[k] = _nb_draw(input_keys[r], k, cdf_in)
            idx, ok = _nb_scan_counts(a, cb_seeds[r], 1, search_cap,
                                      cdf_m, p, tol, counts)
            chosen[r] = idx
            found[r] = ok
            key = _nb_stream_key(cb_seeds[r], np.uint64(idx))
            for k in range(K):
                pooled[a[k], _nb_draw(key, k, cdf_m)] += 1
        return pooled, chosen, found

    @njit(cache=True)
    def _nb_rate(a, b_keys, cdf, p, tol):
        K = a.size
        ni, nj = p.shape
        counts = np.empty((ni, nj), dtype=np.int64)
        successes = 0
        for t in range(b_keys.size):
            counts[:] = 0
            for k in range(K):
                counts[a[k], _nb_draw(b_keys[t], k, cdf)] += 1
            typ = True
            for i in range(ni):
                for j in range(nj):
                    if abs(counts[i, j] / K - p[i, j]) >= tol:
                        typ = False
                        break
                if not typ:
                    break
            if typ:
                successes += 1
        return successes


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def codebook_entry(cb_seed, index, K, cdf):
    """Regenerate codebook entry `index` (1-based) of block length K."""
    return _np_entry(cb_seed, index, K, cdf)


def scan_codebook(a, cb_seed, cap, cdf, p, tol):
    """(index, found): first jointly typical entry in 1..cap, else (1, False)."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    if USE_NUMBA:
        counts = np.empty(p.shape, dtype=np.int64)
        idx, ok = _nb_scan_counts(a, U64(cb_seed), 1, cap, cdf, p, tol, counts)
        return int(idx), bool(ok)
    idx, ok = _np_scan(a, cb_seed, 1, cap, cdf, p, tol)
    return int(idx), bool(ok)


def simulate_runs(input_keys, cb_seeds, K, search_cap, cdf_in, cdf_m, p, tol):
    """Bulk protocol runs; returns (pooled pair counts, chosen indices, found flags)."""
    if USE_NUMBA:
        return _nb_simulate(input_keys, cb_seeds, K, search_cap, cdf_in, cdf_m, p, tol)
    return _np_simulate(input_keys, cb_seeds, K, search_cap, cdf_in, cdf_m, p, tol)


def count_rate_successes(a, b_keys, cdf, p, tol):
    """Count guess blocks (one per key) jointly typical with the fixed block."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    if USE_NUMBA:
        return int(_nb_rate(a, b_keys, cdf, p, tol))
    return int(_np_rate(a, b_keys, cdf, p, tol))
