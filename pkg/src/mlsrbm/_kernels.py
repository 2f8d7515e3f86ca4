"""Numba inner loops for the path simulators.

One kernel drives everything: plain reflected Euler, the up/down-crossing
segments (stop conditions on a switch level), and hitting-time runs.  The
Gaussian increments are drawn outside with numpy so the RNG streams stay
keyed and reproducible; the kernel only consumes them.

State is carried in two small arrays so a path can span many kernel calls:

    state    = [z, y, y_at_burn_in]
    counters = [global step index, storage write position]

Per step the kernel stands on grid index i with value z, records z into the
thinned storage and the post-burn-in accumulators (occupation integrals,
per-level time, histogram, exp-moment integrals), then advances by one Euler
step.  Stop conditions are evaluated on the post-step value, so counters[0]
ends at the first grid index past the crossing.
"""

from __future__ import annotations

import math

import numba
import numpy as np

STOP_NONE = 0
STOP_AT_OR_ABOVE = 1
STOP_AT_OR_BELOW = 2


@numba.njit(inline="always")
def _level(boundaries, z):
    # index of the half-open level containing z: count of boundaries <= z
    lo = 0
    hi = boundaries.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if boundaries[mid] <= z:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True, nogil=True)
def evolve_block(
    state,
    counters,
    g,
    n_use,
    dt,
    sqrt_dt,
    boundaries,
    sigmas,
    drifts,
    reflect,
    stop_kind,
    stop_level,
    burn_step,
    occ_levels,
    occ_eps,
    occ_sums,
    seg_time,
    hist_nbins,
    hist_inv_w,
    hist_counts,
    thetas,
    exp_sums,
    store_every,
    store_idx,
    store_z,
    store_y,
):
    z = state[0]
    y = state[1]
    i = counters[0]
    spos = counters[1]
    consumed = 0
    stopped = False
    n_occ = occ_levels.shape[0]
    n_theta = thetas.shape[0]
    for m in range(n_use):
        if i % store_every == 0:
            store_idx[spos] = i
            store_z[spos] = z
            store_y[spos] = y
            spos += 1
        j = _level(boundaries, z)
        if i >= burn_step:
            if i == burn_step:
                state[2] = y
            seg_time[j] += dt
            sig2 = sigmas[j] * sigmas[j]
            for q in range(n_occ):
                if abs(z - occ_levels[q]) < occ_eps[q]:
                    occ_sums[q] += sig2 * dt
            if hist_nbins > 0:
                b = int(z * hist_inv_w)
                if b > hist_nbins:
                    b = hist_nbins
                hist_counts[b] += 1.0
            for q in range(n_theta):
                exp_sums[q, j] += math.exp(thetas[q] * z) * dt
        p = z + drifts[j] * dt + sigmas[j] * sqrt_dt * g[m]
        if reflect:
            if p < 0.0:
                y += -p
                z = 0.0
            else:
                z = p
        else:
            z = p if p > 0.0 else 0.0
        i += 1
        consumed = m + 1
        if stop_kind == STOP_AT_OR_ABOVE:
            if z >= stop_level:
                stopped = True
                break
        elif stop_kind == STOP_AT_OR_BELOW:
            if z <= stop_level:
                stopped = True
                break
    state[0] = z
    state[1] = y
    counters[0] = i
    counters[1] = spos
    return consumed, stopped
