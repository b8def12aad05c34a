"""Hot per-shot kernels, in numba and pure-numpy flavors.

Everything here is deterministic arithmetic on occupied-site index arrays;
random number generation never happens inside a kernel, so a shot sequence is
bit-identical no matter which backend is active. The two backends agree to
roundoff (different summation orders), which the test suite pins at 1e-13.

Grid conventions: a lattice of N sites maps onto N detector-plane modes. The
first-order profile is sampled at separations l*dx with dk*dx = 2*pi/N, so the
per-shot phasor sum uses the exact rational phases 2*pi*j*l/N. The coincidence
profile lives on the half-step grid dk*dx2 = pi/N, handled through the cosine
table cos(pi*s*l/N).
"""

from functools import lru_cache

import numpy as np

from . import backend


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def pair_counts_numpy(indices, n_sites):
    """Histogram of |a - b| over unordered occupied-site pairs."""
    idx = np.asarray(indices, dtype=np.int64)
    counts = np.zeros(n_sites, dtype=np.int64)
    r = idx.size
    if r < 2:
        return counts
    seps = np.abs(idx[:, None] - idx[None, :])[np.triu_indices(r, k=1)]
    return np.bincount(seps, minlength=n_sites).astype(np.int64)


def batch_pair_counts_numpy(idx_matrix, n_sites):
    idx_matrix = np.asarray(idx_matrix, dtype=np.int64)
    out = np.zeros((idx_matrix.shape[0], n_sites), dtype=np.int64)
    for i in range(idx_matrix.shape[0]):
        out[i] = pair_counts_numpy(idx_matrix[i], n_sites)
    return out


def batch_g1_numpy(idx_matrix, n_sites):
    """Per-shot first-order profiles g1[l] = (1/R) sum_j exp(2i*pi*j*l/N).

    Realized as an inverse FFT of the occupancy indicator, which evaluates the
    same rational-grid phasor sum exactly.
    """
    idx_matrix = np.asarray(idx_matrix, dtype=np.int64)
    runs, r = idx_matrix.shape
    indicator = np.zeros((runs, n_sites))
    indicator[np.arange(runs)[:, None], idx_matrix] = 1.0
    return np.fft.ifft(indicator, axis=1) * (n_sites / r)


def batch_g2_mod_numpy(counts, cos_table, n_pairs):
    """Per-shot coincidence modulation m[l] = (1/n_pairs) sum_s c_s cos(pi*s*l/N)."""
    return counts.astype(np.float64) @ cos_table / n_pairs


def kahan_sum_rows_numpy(mat):
    """Compensated column sum over axis 0, in fixed row order."""
    total = np.zeros(mat.shape[1], dtype=mat.dtype)
    comp = np.zeros_like(total)
    for i in range(mat.shape[0]):
        y = mat[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


# ---------------------------------------------------------------------------
# shared tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def g2_cos_table(n_sites):
    """cos(pi*s*l/N) for s = 0..N-1, l = 0..N; shape (N, N+1)."""
    s = np.arange(n_sites)[:, None]
    ell = np.arange(n_sites + 1)[None, :]
    return np.cos(np.pi * s * ell / n_sites)


@lru_cache(maxsize=8)
def _g1_phase_tables(n_sites):
    """cos/sin(2*pi*j*l/N) as (N, N) site-major tables for the numba path."""
    ang = 2.0 * np.pi * np.outer(np.arange(n_sites), np.arange(n_sites)) / n_sites
    return np.cos(ang), np.sin(ang)


# ---------------------------------------------------------------------------
# numba implementations (defined only when numba is importable)
# ---------------------------------------------------------------------------

if backend.NUMBA_AVAILABLE:
    from numba import njit

    @njit(cache=True)
    def _pair_counts_jit(indices, n_sites):
        counts = np.zeros(n_sites, dtype=np.int64)
        r = indices.shape[0]
        for a in range(r):
            for b in range(a + 1, r):
                d = indices[a] - indices[b]
                if d < 0:
                    d = -d
                counts[d] += 1
        return counts

    @njit(cache=True)
    def _batch_pair_counts_jit(idx_matrix, n_sites):
        runs = idx_matrix.shape[0]
        out = np.zeros((runs, n_sites), dtype=np.int64)
        for i in range(runs):
            r = idx_matrix.shape[1]
            for a in range(r):
                for b in range(a + 1, r):
                    d = idx_matrix[i, a] - idx_matrix[i, b]
                    if d < 0:
                        d = -d
                    out[i, d] += 1
        return out

    @njit(cache=True)
    def _batch_g1_jit(idx_matrix, cos_t, sin_t):
        # row-sequential accumulation: each occupied site contributes one
        # contiguous table row, so the inner loop vectorizes
        runs, r = idx_matrix.shape
        n_sites = cos_t.shape[1]
        out = np.empty((runs, n_sites), dtype=np.complex128)
        re = np.empty(n_sites)
        im = np.empty(n_sites)
        for i in range(runs):
            re[:] = 0.0
            im[:] = 0.0
            for a in range(r):
                j = idx_matrix[i, a]
                for ell in range(n_sites):
                    re[ell] += cos_t[j, ell]
                    im[ell] += sin_t[j, ell]
            for ell in range(n_sites):
                out[i, ell] = complex(re[ell] / r, im[ell] / r)
        return out

    @njit(cache=True)
    def _batch_g2_mod_jit(counts, cos_table, n_pairs):
        runs = counts.shape[0]
        n_sites = counts.shape[1]
        n_ell = cos_table.shape[1]
        out = np.zeros((runs, n_ell))
        for i in range(runs):
            for s in range(n_sites):
                c = counts[i, s]
                if c != 0:
                    cf = float(c)
                    for ell in range(n_ell):
                        out[i, ell] += cf * cos_table[s, ell]
            for ell in range(n_ell):
                out[i, ell] /= n_pairs
        return out

    @njit(cache=True)
    def _kahan_sum_rows_jit(mat):
        rows, cols = mat.shape
        total = np.zeros(cols, dtype=mat.dtype)
        comp = np.zeros(cols, dtype=mat.dtype)
        for i in range(rows):
            for j in range(cols):
                y = mat[i, j] - comp[j]
                t = total[j] + y
                comp[j] = (t - total[j]) - y
                total[j] = t
        return total

    def pair_counts_numba(indices, n_sites):
        return _pair_counts_jit(np.ascontiguousarray(indices, dtype=np.int64),
                                n_sites)

    def batch_pair_counts_numba(idx_matrix, n_sites):
        return _batch_pair_counts_jit(
            np.ascontiguousarray(idx_matrix, dtype=np.int64), n_sites)

    def batch_g1_numba(idx_matrix, n_sites):
        cos_t, sin_t = _g1_phase_tables(n_sites)
        return _batch_g1_jit(np.ascontiguousarray(idx_matrix, dtype=np.int64),
                             cos_t, sin_t)

    def batch_g2_mod_numba(counts, cos_table, n_pairs):
        return _batch_g2_mod_jit(np.ascontiguousarray(counts, dtype=np.int64),
                                 cos_table, float(n_pairs))

    def kahan_sum_rows_numba(mat):
        return _kahan_sum_rows_jit(np.ascontiguousarray(mat))


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------

IMPLEMENTATIONS = {
    "numpy": {
        "pair_counts": pair_counts_numpy,
        "batch_pair_counts": batch_pair_counts_numpy,
        "batch_g1": batch_g1_numpy,
        "batch_g2_mod": batch_g2_mod_numpy,
        "kahan_sum_rows": kahan_sum_rows_numpy,
    },
}
if backend.NUMBA_AVAILABLE:
    IMPLEMENTATIONS["numba"] = {
        "pair_counts": pair_counts_numba,
        "batch_pair_counts": batch_pair_counts_numba,
        "batch_g1": batch_g1_numba,
        "batch_g2_mod": batch_g2_mod_numba,
        "kahan_sum_rows": kahan_sum_rows_numba,
    }

_active = IMPLEMENTATIONS[backend.ACTIVE]
pair_counts = _active["pair_counts"]
batch_pair_counts = _active["batch_pair_counts"]
batch_g1 = _active["batch_g1"]
batch_g2_mod = _active["batch_g2_mod"]
kahan_sum_rows = _active["kahan_sum_rows"]
