"""Jitted inner loops for ensemble simulation.

The update rule and the stream addressing of every uniform are identical
to the pure-python stepper in dynamics.step; tests assert bit-equality of
trajectories between the two paths.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange, uint64

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)
_STEP_STRIDE = uint64(1 << 32)
_INV_2_53 = 2.0**-53
_GAP_SENTINEL = 1 << 62


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> uint64(30))) * _MIX1
    z = (z ^ (z >> uint64(27))) * _MIX2
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def _uniform(key, t, slot):
    c = uint64(t) * _STEP_STRIDE + uint64(slot) + uint64(1)
    return float(_mix64(key + c * _GOLDEN) >> uint64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def _invert(cdf_row, n, u):
    """Smallest j in [0, n) with u < cdf_row[j]; returns n when u exceeds
    the whole row (truncation tail hit, handled by the caller).

    Forward scan: identical result to a binary search over the same cdf,
    but faster here because the mass concentrates at small j.
    """
    j = 0
    while j < n and cdf_row[j] <= u:
        j += 1
    return j


@njit(cache=True)
def run_replica_arrays(key, g, x1, tau, cdf2d, row_len, m_dense):
    """Advance one replica by tau parallel updates, mutating g in place.

    g[0] must hold the front-gap sentinel (free leader); g[i] for i >= 1 is
    the front gap of particle i+1.  Returns (x1, tail_hits, active_front).

    The stream address of particle index i at step t is t * 2^32 + i; the
    address arithmetic is hoisted so the inner loop advances the counter by
    one GOLDEN increment per particle.
    """
    N = g.shape[0]
    inf_row = m_dense + 1
    inf_len = row_len[inf_row]
    inf_cdf = cdf2d[inf_row]
    width = cdf2d.shape[1]
    cdf_flat = cdf2d.ravel()
    tail_hits = 0
    # largest index with positive gap, 0 if none
    last = 0
    for i in range(N - 1, 0, -1):
        if g[i] > 0:
            last = i
            break
    newlast = last
    limit = min(last + 1, N)
    for t in range(tau):
        # counter position of (t, slot 0)
        z = key + (uint64(t) * _STEP_STRIDE + uint64(1)) * _GOLDEN
        u = float(_mix64(z) >> uint64(11)) * _INV_2_53
        j = _invert(inf_cdf, inf_len, u)
        if j >= inf_len:
            tail_hits += 1
            j = inf_len - 1
        x1 += j
        j_prev = j
        newlast = 0
        for i in range(1, limit):
            z += _GOLDEN
            m = g[i]
            row = inf_row if m > m_dense else m
            n = row_len[row]
            u = float(_mix64(z) >> uint64(11)) * _INV_2_53
            off = row * width
            j = 0
            while j < n and cdf_flat[off + j] <= u:
                j += 1
            if j >= n:
                tail_hits += 1
                j = n - 1
                if j > m:
                    j = m
            gi = m + j_prev - j
            g[i] = gi
            if gi > 0:
                newlast = i
            j_prev = j
        if limit < N:
            g[limit] += j_prev
            if g[limit] > 0 and limit > newlast:
                newlast = limit
        limit = min(newlast + 1, N)
    front = newlast + 1 if newlast > 0 else 1
    return x1, tail_hits, front


@njit(cache=True)
def run_step_ensemble_serial(keys, N, tau, cdf2d, row_len, m_dense):
    """X_N(tau) from step initial data, one replica at a time."""
    R = keys.shape[0]
    out = np.empty(R, dtype=np.int64)
    tails = 0
    g = np.empty(N, dtype=np.int64)
    for r in range(R):
        g[:] = 0
        g[0] = _GAP_SENTINEL
        x1, th, _front = run_replica_arrays(
            keys[r], g, -1, tau, cdf2d, row_len, m_dense
        )
        tails += th
        total = x1
        for i in range(1, N):
            total -= g[i] + 1
        out[r] = total
    return out, tails


@njit(cache=True, parallel=True)
def run_step_ensemble(keys, N, tau, cdf2d, row_len, m_dense):
    """X_N(tau) from step initial data, replicas advanced in lockstep
    blocks so the stream mixing vectorizes; blocks run in parallel.

    Because uniforms are addressed by (step, particle) and frozen
    particles resolve to jump 0 without touching their uniform, running a
    replica out to the block-wide scan limit gives bit-identical
    trajectories to the serial kernel, for any thread count or block
    schedule.
    """
    R = keys.shape[0]
    out = np.empty(R, dtype=np.int64)
    tails = 0
    nb_max = 64
    inf_row = m_dense + 1
    inf_len = row_len[inf_row]
    inf_cdf = cdf2d[inf_row]
    width = cdf2d.shape[1]
    cdf_flat = cdf2d.ravel()
    n_blocks = (R + nb_max - 1) // nb_max
    for blk in prange(n_blocks):
        r0 = blk * nb_max
        nb = min(nb_max, R - r0)
        g = np.zeros((N, nb), dtype=np.int32)
        x1 = np.full(nb, -1, dtype=np.int64)
        jprev = np.empty(nb, dtype=np.int32)
        u = np.empty(nb, dtype=np.float64)
        kb = keys[r0 : r0 + nb]
        limit = 1
        for t in range(tau):
            base = (uint64(t) * _STEP_STRIDE + uint64(1)) * _GOLDEN
            for r in range(nb):
                u[r] = float(_mix64(kb[r] + base) >> uint64(11)) * _INV_2_53
            newlast = 0
            for r in range(nb):
                j = _invert(inf_cdf, inf_len, u[r])
                if j >= inf_len:
                    tails += 1
                    j = inf_len - 1
                x1[r] += j
                jprev[r] = j
            for i in range(1, limit):
                base += _GOLDEN
                for r in range(nb):
                    u[r] = float(_mix64(kb[r] + base) >> uint64(11)) * _INV_2_53
                gi_row = g[i]
                for r in range(nb):
                    m = gi_row[r]
                    row = inf_row if m > m_dense else m
                    n = row_len[row]
                    off = row * width
                    u0 = u[r]
                    j = 0
                    while j < n and cdf_flat[off + j] <= u0:
                        j += 1
                    if j >= n:
                        tails += 1
                        j = n - 1
                        if j > m:
                            j = m
                    gi = m + jprev[r] - j
                    gi_row[r] = gi
                    if gi > 0:
                        newlast = i
                    jprev[r] = j
            if limit < N:
                glim = g[limit]
                for r in range(nb):
                    jp = jprev[r]
                    if jp > 0:
                        glim[r] += jp
                        if limit > newlast:
                            newlast = limit
            limit = min(newlast + 1, N)
        for r in range(nb):
            total = x1[r]
            for i in range(1, N):
                total -= g[i, r] + 1
            out[r0 + r] = total
    return out, tails
