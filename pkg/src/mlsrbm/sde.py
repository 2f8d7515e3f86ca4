"""Path simulation: reflected Euler, the up/down-crossing construction,
local-time estimates and hitting times.

Both simulators share one discretization step: freeze the coefficients at
the step's left endpoint, propose p = z + b dt + sigma sqrt(dt) g, then
project (z' = max(p, 0), dy = max(-p, 0)).  The projection is exactly the
discrete Skorokhod map of the cumulative free increments, which is what the
single-level reflection formula Z = X + sup(-X)^+ becomes on a grid.

The crossing construction alternates reflected level-1 segments run until
the path reaches the upper switch level d with free state-dependent
segments run from d until the path drops to the lower switch level c.  Each
segment consumes its own noise stream, keyed (seed, path_index,
segment_index), so the construction uses independent copies the way the
weak-solution recipe stitches them; in law the result must match plain
Euler up to discretization error, which the diagnostics check statistically.

Every estimator that feeds a stationarity identity is accumulated online
inside the kernel (occupation integrals per (level, bandwidth), per-level
occupation time, a histogram, and exp-moment integrals on a theta grid),
restricted to grid times at or after the burn-in point, so horizons like
T = 1e4 at dt = 1e-3 never materialize full-resolution arrays unless the
caller asks for them via store_every = 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import (
    MultiLevelModel,
    NegativeState,
    boundary_arrays,
    coefficients_at,
)

__all__ = [
    "PathRecord",
    "CrossingState",
    "EnsembleStats",
    "HittingTime",
    "InvalidHorizon",
    "InvalidSwitchLevels",
    "UnknownBandwidth",
    "UnknownLevel",
    "euler_step",
    "simulate_path",
    "simulate_crossing_construction",
    "simulate_ensemble",
    "ensemble_from_paths",
    "local_time_estimate",
    "hitting_time",
]

BLOCK = 1 << 20
SEGMENT_BLOCK = 1 << 12


class InvalidHorizon(ValueError):
    """Need 0 < dt <= T."""


class InvalidSwitchLevels(ValueError):
    """The crossing construction needs 0 < c < d < l_1."""


class UnknownBandwidth(ValueError):
    """No occupation accumulator for that bandwidth."""


class UnknownLevel(ValueError):
    """No occupation accumulator at that level."""


@dataclass
class CrossingState:
    """Bookkeeping of the up/down-crossing construction.

    phase is the phase in force at the end of the run; crossing_count is the
    number of completed up-crossings of d; segment_index identifies the
    noise stream of the segment in force (streams are keyed by
    (seed, path_index, segment_index)).
    """

    phase: str
    c: float
    d: float
    crossing_count: int
    segment_index: int


@dataclass(eq=False)
class PathRecord:
    """One simulated trajectory plus its online accumulators.

    times/z/y hold the thinned samples (every store_every-th grid point,
    plus the final one).  The occupation dictionaries, segment_time,
    y_increment, histogram and mgf integrals cover the post-burn-in window
    (burn_in, t_final] only; y itself starts at Y(0) = 0.
    """

    dt: float
    seed: int
    x0: float
    t_final: float
    burn_in: float
    store_every: int
    times: np.ndarray
    z: np.ndarray
    y: np.ndarray
    boundary_occupation: dict
    origin_occupation: dict
    segment_time: np.ndarray
    y_increment: float
    z_final: float
    y_final: float
    histogram_edges: np.ndarray | None
    histogram_counts: np.ndarray | None
    mgf_thetas: np.ndarray
    mgf_integrals: np.ndarray
    crossing: CrossingState | None = None

    @property
    def window(self) -> float:
        """Length of the accumulation window."""
        return self.t_final - self.burn_in


@dataclass(frozen=True)
class HittingTime:
    time: float
    censored: bool


def _stream(seed, path_index: int, segment_index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, path, segment).

    The triple goes straight into the Philox key (a PRF), so distinct
    triples give independent streams without any shared state; ensembles
    are reproducible and order-independent under parallel execution.
    """
    seed = int(seed)
    if not 0 <= seed < 1 << 64:
        raise ValueError(f"seed = {seed} must be an integer in [0, 2**64)")
    path_index = int(path_index)
    segment_index = int(segment_index)
    if not (0 <= path_index < 1 << 32 and 0 <= segment_index < 1 << 32):
        raise ValueError("path and segment indices must be in [0, 2**32)")
    key = np.array([seed, (path_index << 32) | segment_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def euler_step(z: float, model: MultiLevelModel, dt: float, gaussian_increment: float):
    """One projected Euler step: returns (z', dy).

    Coefficients are frozen at the left endpoint z; the proposal
    p = z + b dt + sigma sqrt(dt) g is projected to z' = max(p, 0) with
    regulator increment dy = max(-p, 0).
    """
    if dt <= 0.0:
        raise InvalidHorizon(f"dt = {dt!r} must be > 0")
    sigma, b = coefficients_at(model, z)
    p = z + b * dt + sigma * math.sqrt(dt) * gaussian_increment
    if p < 0.0:
        return 0.0, -p
    return p, 0.0


def _check_horizon(T: float, dt: float) -> int:
    if not (dt > 0.0 and T > 0.0 and dt <= T):
        raise InvalidHorizon(f"need 0 < dt <= T, got dt = {dt!r}, T = {T!r}")
    return int(round(T / dt))


def _occupation_arrays(model: MultiLevelModel, bandwidths):
    levels = [0.0, *model.boundaries]
    eps = [float(e) for e in bandwidths]
    for e in eps:
        if e <= 0.0:
            raise UnknownBandwidth(f"bandwidth {e!r} must be > 0")
    pairs = [(a, e) for a in levels for e in eps]
    occ_levels = np.array([p[0] for p in pairs], dtype=np.float64)
    occ_eps = np.array([p[1] for p in pairs], dtype=np.float64)
    return pairs, occ_levels, occ_eps


def _default_histogram_hi(model: MultiLevelModel) -> float:
    top = model.boundaries[-1] if model.k > 1 else 0.0
    beta_top = model.betas[-1]
    if beta_top < 0.0:
        return top + 10.0 / -beta_top
    # transient or null model: no stationary scale, pick something visible
    return top + 10.0


class _Accumulators:
    """Shared preparation for both simulators."""

    def __init__(self, model, n_steps, burn_step, bandwidths, store_every,
                 histogram_bins, histogram_hi, mgf_thetas):
        self.boundaries, self.sigmas, self.drifts = boundary_arrays(model)
        self.pairs, self.occ_levels, self.occ_eps = _occupation_arrays(model, bandwidths)
        self.occ_sums = np.zeros(len(self.pairs))
        self.seg_time = np.zeros(model.k)
        self.hist_nbins = int(histogram_bins)
        if self.hist_nbins > 0:
            hi = histogram_hi if histogram_hi is not None else _default_histogram_hi(model)
            self.hist_hi = float(hi)
            self.hist_inv_w = self.hist_nbins / self.hist_hi
            self.hist_counts = np.zeros(self.hist_nbins + 1)
        else:
            self.hist_hi = 0.0
            self.hist_inv_w = 0.0
            self.hist_counts = np.zeros(1)
        self.thetas = np.asarray(list(mgf_thetas), dtype=np.float64)
        self.exp_sums = np.zeros((len(self.thetas), model.k))
        self.store_every = int(store_every)
        cap = n_steps // self.store_every + 2
        self.store_idx = np.zeros(cap, dtype=np.int64)
        self.store_z = np.zeros(cap)
        self.store_y = np.zeros(cap)
        self.burn_step = int(burn_step)

    def kernel_args(self, reflect, stop_kind, stop_level):
        return (
            self.boundaries, self.sigmas, self.drifts,
            reflect, stop_kind, stop_level,
            self.burn_step,
            self.occ_levels, self.occ_eps, self.occ_sums,
            self.seg_time,
            self.hist_nbins, self.hist_inv_w, self.hist_counts,
            self.thetas, self.exp_sums,
            self.store_every, self.store_idx, self.store_z, self.store_y,
        )


def _resolve_store_every(store_every, n_steps: int) -> int:
    if store_every is not None:
        se = int(store_every)
        if se < 1:
            raise ValueError(f"store_every = {store_every!r} must be >= 1")
        return se
    return max(1, n_steps // 200_000)


def _resolve_burn(burn_in, T: float, dt: float) -> tuple[float, int]:
    burn = 0.0 if burn_in is None else float(burn_in)
    if not 0.0 <= burn < T:
        raise InvalidHorizon(f"burn_in = {burn!r} must lie in [0, T)")
    return burn, int(round(burn / dt))


def _finish_record(model, acc, state, counters, n_steps, dt, seed, x0, burn,
                   crossing=None) -> PathRecord:
    # append the final grid point, which the kernel never stores
    spos = counters[1]
    acc.store_idx[spos] = n_steps
    acc.store_z[spos] = state[0]
    acc.store_y[spos] = state[1]
    spos += 1
    boundary_occ: dict = {float(a): {} for a in model.boundaries}
    origin_occ: dict = {}
    for (a, e), v in zip(acc.pairs, acc.occ_sums):
        if a == 0.0:
            origin_occ[e] = float(v)
        else:
            boundary_occ[a][e] = float(v)
    if acc.hist_nbins > 0:
        hist_edges = np.linspace(0.0, acc.hist_hi, acc.hist_nbins + 1)
        hist_counts = acc.hist_counts.copy()
    else:
        hist_edges = None
        hist_counts = None
    return PathRecord(
        dt=dt,
        seed=seed,
        x0=x0,
        t_final=n_steps * dt,
        burn_in=burn,
        store_every=acc.store_every,
        times=acc.store_idx[:spos] * dt,
        z=acc.store_z[:spos].copy(),
        y=acc.store_y[:spos].copy(),
        boundary_occupation=boundary_occ,
        origin_occupation=origin_occ,
        segment_time=acc.seg_time.copy(),
        y_increment=float(state[1] - state[2]),
        z_final=float(state[0]),
        y_final=float(state[1]),
        histogram_edges=hist_edges,
        histogram_counts=hist_counts,
        mgf_thetas=acc.thetas.copy(),
        mgf_integrals=acc.exp_sums.copy(),
        crossing=crossing,
    )


def simulate_path(
    model: MultiLevelModel,
    x0: float,
    T: float,
    dt: float,
    seed,
    local_time_bandwidths=(0.01,),
    *,
    burn_in=None,
    store_every=None,
    histogram_bins: int = 0,
    histogram_hi=None,
    mgf_thetas=(),
    path_index: int = 0,
) -> PathRecord:
    """Reflected Euler path over [0, T] on the fixed grid i * dt.

    Accumulators (occupation integrals for each requested bandwidth at the
    origin and every interior boundary, per-level time, optional histogram
    and exp moments) cover grid times >= burn_in; y_increment is
    Y(T) - Y(burn_in).  Bit-reproducible for a fixed (seed, path_index).
    """
    if x0 < 0.0:
        raise NegativeState(f"x0 = {x0!r} must be >= 0")
    n_steps = _check_horizon(T, dt)
    burn, burn_step = _resolve_burn(burn_in, T, dt)
    acc = _Accumulators(
        model, n_steps, burn_step, local_time_bandwidths,
        _resolve_store_every(store_every, n_steps),
        histogram_bins, histogram_hi, mgf_thetas,
    )
    state = np.array([float(x0), 0.0, 0.0])
    counters = np.zeros(2, dtype=np.int64)
    rng = _stream(seed, path_index, 0)
    sqrt_dt = math.sqrt(dt)
    remaining = n_steps
    while remaining > 0:
        block = min(remaining, BLOCK)
        g = rng.standard_normal(block)
        _kernels.evolve_block(
            state, counters, g, block, dt, sqrt_dt,
            *acc.kernel_args(True, _kernels.STOP_NONE, 0.0),
        )
        remaining -= block
    return _finish_record(model, acc, state, counters, n_steps, dt, int(seed), x0, burn)


def simulate_crossing_construction(
    model: MultiLevelModel,
    x0: float,
    T: float,
    seed,
    c=None,
    d=None,
    *,
    dt: float = 1e-3,
    local_time_bandwidths=(0.01,),
    burn_in=None,
    store_every=None,
    histogram_bins: int = 0,
    histogram_hi=None,
    mgf_thetas=(),
    path_index: int = 0,
    reset_to_switch_levels: bool = False,
) -> PathRecord:
    """Build the path by alternating up-crossing and down-crossing segments.

    Up-crossing segments run the reflected level-1 dynamics until the path
    reaches d; since they live below d < l_1 the state-dependent lookup
    always lands on level 1, so the projection step is exactly the
    reflection map of the level-1 free path.  Down-crossing segments run
    the free state-dependent dynamics from d until the path drops to c.
    Each segment draws from its own stream keyed
    (seed, path_index, segment_index).

    On a grid the crossing step overshoots the switch level by O(sqrt(dt)).
    By default the next segment continues from the overshot value, which
    keeps the chain's transition law identical to plain reflected Euler
    (the continuous-time construction concatenates at exactly d and c, and
    the overshoot vanishes with dt).  reset_to_switch_levels=True instead
    restarts each segment exactly at the switch level; that matches the
    continuous description literally but injects an O(sqrt(dt)) occupation
    bias at every switch, visible in two-simulator comparisons.
    """
    if x0 < 0.0:
        raise NegativeState(f"x0 = {x0!r} must be >= 0")
    ell1 = model.boundaries[0] if model.k > 1 else math.inf
    if c is None and d is None and model.k > 1:
        c, d = ell1 / 3.0, 2.0 * ell1 / 3.0
    if c is None or d is None:
        raise InvalidSwitchLevels(
            "both switch levels are required (defaults exist only for k >= 2)"
        )
    c = float(c)
    d = float(d)
    if not 0.0 < c < d < ell1:
        raise InvalidSwitchLevels(
            f"need 0 < c < d < l_1, got c = {c!r}, d = {d!r}, l_1 = {ell1!r}"
        )
    n_steps = _check_horizon(T, dt)
    burn, burn_step = _resolve_burn(burn_in, T, dt)
    acc = _Accumulators(
        model, n_steps, burn_step, local_time_bandwidths,
        _resolve_store_every(store_every, n_steps),
        histogram_bins, histogram_hi, mgf_thetas,
    )
    state = np.array([float(x0), 0.0, 0.0])
    counters = np.zeros(2, dtype=np.int64)
    sqrt_dt = math.sqrt(dt)
    up = x0 < d
    segment_index = 0
    crossing_count = 0
    up_args = acc.kernel_args(True, _kernels.STOP_AT_OR_ABOVE, d)
    down_args = acc.kernel_args(False, _kernels.STOP_AT_OR_BELOW, c)
    while counters[0] < n_steps:
        rng = _stream(seed, path_index, segment_index)
        args = up_args if up else down_args
        stopped = False
        while counters[0] < n_steps and not stopped:
            block = int(min(n_steps - counters[0], SEGMENT_BLOCK))
            g = rng.standard_normal(block)
            _, stopped = _kernels.evolve_block(
                state, counters, g, block, dt, sqrt_dt, *args,
            )
        if stopped:
            if up:
                crossing_count += 1
                if reset_to_switch_levels:
                    state[0] = d
            elif reset_to_switch_levels:
                state[0] = c
            up = not up
            segment_index += 1
    crossing = CrossingState(
        phase="up-crossing" if up else "down-crossing",
        c=c,
        d=d,
        crossing_count=crossing_count,
        segment_index=segment_index,
    )
    return _finish_record(
        model, acc, state, counters, n_steps, dt, int(seed), x0, burn, crossing
    )


def local_time_estimate(path: PathRecord, a: float, eps: float) -> float:
    """Occupation-based local time over the path's accumulation window:
    (1 / 2 eps) * integral of 1(|Z - a| < eps) sigma^2(Z) dt."""
    if a == 0.0:
        table = path.origin_occupation
    else:
        if a not in path.boundary_occupation:
            raise UnknownLevel(
                f"no accumulator at level {a!r}; have 0.0 and "
                f"{sorted(path.boundary_occupation)}"
            )
        table = path.boundary_occupation[a]
    if eps not in table:
        raise UnknownBandwidth(
            f"no accumulator for bandwidth {eps!r} at level {a!r}; have "
            f"{sorted(table)}"
        )
    return table[eps] / (2.0 * eps)


def hitting_time(
    model: MultiLevelModel,
    x0: float,
    a: float,
    seed,
    t_cap: float = 1e6,
    *,
    dt: float = 1e-3,
    path_index: int = 0,
) -> HittingTime:
    """First grid time at which the reflected path crosses level a.

    Crossing means z <= a when x0 > a and z >= a when x0 < a; the returned
    time is the grid point at which the crossing is first seen.  Runs are
    censored at t_cap (the cap exists to survive transient parameter
    choices; stable runs in the tested regimes never reach it).
    """
    if x0 < 0.0 or a < 0.0:
        raise NegativeState(f"x0 = {x0!r} and a = {a!r} must be >= 0")
    if x0 == a:
        return HittingTime(time=0.0, censored=False)
    if not (dt > 0.0 and t_cap > 0.0):
        raise InvalidHorizon(f"need dt > 0 and t_cap > 0, got {dt!r}, {t_cap!r}")
    cap_steps = int(round(t_cap / dt))
    stop_kind = _kernels.STOP_AT_OR_BELOW if x0 > a else _kernels.STOP_AT_OR_ABOVE
    boundaries, sigmas, drifts = boundary_arrays(model)
    state = np.array([float(x0), 0.0, 0.0])
    counters = np.zeros(2, dtype=np.int64)
    rng = _stream(seed, path_index, 0)
    sqrt_dt = math.sqrt(dt)
    empty = np.zeros(0)
    seg_time = np.zeros(model.k)
    exp_sums = np.zeros((0, model.k))
    store = np.zeros(2)
    store_idx = np.zeros(2, dtype=np.int64)
    block = 1 << 11
    while counters[0] < cap_steps:
        n = int(min(cap_steps - counters[0], block))
        g = rng.standard_normal(n)
        _, stopped = _kernels.evolve_block(
            state, counters, g, n, dt, sqrt_dt,
            boundaries, sigmas, drifts,
            True, stop_kind, float(a),
            cap_steps,  # burn never reached: no accumulation
            empty, empty, empty,
            seg_time,
            0, 0.0, np.zeros(1),
            empty, exp_sums,
            cap_steps + 1, store_idx, store, store.copy(),
        )
        if stopped:
            return HittingTime(time=float(counters[0] * dt), censored=False)
        block = min(block * 4, BLOCK)
    return HittingTime(time=float(t_cap), censored=True)


@dataclass(eq=False)
class EnsembleStats:
    """Cross-path estimators, all rates per unit time over the post-burn-in
    window.  Standard errors are across paths (ddof = 1) and NaN when
    n_paths = 1.  histogram_masses has one more entry than bins: the last
    entry is the tail mass above histogram_edges[-1], so the masses sum
    to one.
    """

    n_paths: int
    method: str
    t_final: float
    dt: float
    burn_in: float
    seed: int
    y_rate: float
    y_rate_stderr: float
    local_time_rates: dict
    local_time_stderr: dict
    segment_fraction: np.ndarray
    segment_fraction_stderr: np.ndarray
    histogram_edges: np.ndarray | None
    histogram_masses: np.ndarray | None
    mgf_thetas: np.ndarray
    mgf_means: np.ndarray
    mgf_stderr: np.ndarray
    per_path_y_rate: np.ndarray
    per_path_mgf: np.ndarray
    per_path_local_time: dict = field(repr=False, default_factory=dict)

    @property
    def window(self) -> float:
        return self.t_final - self.burn_in

    def to_dict(self) -> dict:
        def clean(v):
            return None if (isinstance(v, float) and math.isnan(v)) else v

        out = {
            "n_paths": self.n_paths,
            "method": self.method,
            "y_rate": self.y_rate,
            "local_time_rates": {
                repr(a): {repr(e): v for e, v in tbl.items()}
                for a, tbl in self.local_time_rates.items()
            },
            "segment_fraction": [float(v) for v in self.segment_fraction],
            "histogram": None,
            "mgf": {
                "thetas": [float(t) for t in self.mgf_thetas],
                "means": [[float(v) for v in row] for row in self.mgf_means],
            },
            "stderr": {
                "y_rate": clean(self.y_rate_stderr),
                "local_time_rates": {
                    repr(a): {repr(e): clean(v) for e, v in tbl.items()}
                    for a, tbl in self.local_time_stderr.items()
                },
                "segment_fraction": [clean(float(v)) for v in self.segment_fraction_stderr],
                "mgf": [[clean(float(v)) for v in row] for row in self.mgf_stderr],
            },
            "meta": {
                "t_final": self.t_final,
                "dt": self.dt,
                "burn_in": self.burn_in,
                "seed": self.seed,
            },
        }
        if self.histogram_edges is not None:
            out["histogram"] = {
                "edges": [float(v) for v in self.histogram_edges],
                "masses": [float(v) for v in self.histogram_masses],
            }
        return out


def _mean_stderr(values: np.ndarray, axis=0):
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    mean = values.mean(axis=axis)
    if n > 1:
        err = values.std(axis=axis, ddof=1) / math.sqrt(n)
    else:
        err = np.full_like(np.asarray(mean, dtype=float), np.nan)
    return mean, err


def ensemble_from_paths(paths, method: str = "euler", seed: int = 0) -> EnsembleStats:
    """Deterministic reduction of per-path records (order-independent)."""
    if not paths:
        raise ValueError("need at least one path")
    first = paths[0]
    window = first.window
    n = len(paths)
    y_rates = np.array([p.y_increment / window for p in paths])
    y_rate, y_err = _mean_stderr(y_rates)
    levels = [0.0, *sorted(first.boundary_occupation)]
    lt_rates: dict = {}
    lt_err: dict = {}
    per_path_lt: dict = {}
    for a in levels:
        tbl = first.origin_occupation if a == 0.0 else first.boundary_occupation[a]
        lt_rates[a] = {}
        lt_err[a] = {}
        per_path_lt[a] = {}
        for e in sorted(tbl):
            vals = np.array([local_time_estimate(p, a, e) / window for p in paths])
            m, s = _mean_stderr(vals)
            lt_rates[a][e] = float(m)
            lt_err[a][e] = float(s)
            per_path_lt[a][e] = vals
    frac = np.stack([p.segment_time / window for p in paths])
    frac_mean, frac_err = _mean_stderr(frac)
    if first.histogram_edges is not None:
        counts = np.sum([p.histogram_counts for p in paths], axis=0)
        total = counts.sum()
        masses = counts / total if total > 0 else counts
        edges = first.histogram_edges
    else:
        masses = None
        edges = None
    per_path_mgf = np.stack([p.mgf_integrals / window for p in paths])
    mgf_mean, mgf_err = _mean_stderr(per_path_mgf)
    return EnsembleStats(
        n_paths=n,
        method=method,
        t_final=first.t_final,
        dt=first.dt,
        burn_in=first.burn_in,
        seed=seed,
        y_rate=float(y_rate),
        y_rate_stderr=float(y_err),
        local_time_rates=lt_rates,
        local_time_stderr=lt_err,
        segment_fraction=frac_mean,
        segment_fraction_stderr=frac_err,
        histogram_edges=edges,
        histogram_masses=masses,
        mgf_thetas=first.mgf_thetas.copy(),
        mgf_means=mgf_mean,
        mgf_stderr=mgf_err,
        per_path_y_rate=y_rates,
        per_path_mgf=per_path_mgf,
        per_path_local_time=per_path_lt,
    )


def simulate_ensemble(
    model: MultiLevelModel,
    n_paths: int,
    x0: float,
    T: float,
    dt: float,
    seed,
    local_time_bandwidths=(0.01,),
    *,
    burn_in=None,
    histogram_bins: int = 400,
    histogram_hi=None,
    mgf_thetas=(),
    method: str = "euler",
    c=None,
    d=None,
    store_every=None,
    threads: int = 1,
) -> EnsembleStats:
    """n_paths independent paths reduced to EnsembleStats.

    burn_in defaults to T / 10.  Paths are keyed by path index, so the
    result does not depend on scheduling; threads > 1 (0 = machine default)
    runs paths concurrently, which works because the kernels release the
    GIL.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths = {n_paths} must be >= 1")
    burn = T / 10.0 if burn_in is None else burn_in

    def one(idx: int) -> PathRecord:
        kwargs = dict(
            local_time_bandwidths=local_time_bandwidths,
            burn_in=burn,
            store_every=store_every,
            histogram_bins=histogram_bins,
            histogram_hi=histogram_hi,
            mgf_thetas=mgf_thetas,
            path_index=idx,
        )
        if method == "euler":
            return simulate_path(model, x0, T, dt, seed, **kwargs)
        if method == "crossing":
            return simulate_crossing_construction(
                model, x0, T, seed, c, d, dt=dt, **kwargs
            )
        raise ValueError(f"unknown method {method!r}")

    if threads == 1 or n_paths == 1:
        paths = [one(i) for i in range(n_paths)]
    else:
        workers = threads if threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(one, range(n_paths)))
    return ensemble_from_paths(paths, method=method, seed=int(seed))
