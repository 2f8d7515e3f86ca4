"""Exact stationary law of the multi-level reflecting diffusion.

The stationary density is a mixture h(x) = sum_j d_j h_j(x) where h_j is a
truncated exponential with rate beta_j on the bounded level S_j (uniform in
the zero-drift limit b_j = 0) and an ordinary exponential with rate -beta_k
on the top level.  The mixture weights are

    d_j = (eta_j - eta_{j-1}) / (b_j C)   for j < k,
    d_k = -eta_{k-1} / (b_k C),

with C chosen so the weights sum to one.  All weight arithmetic is done in
log space: each unnormalized term is strictly positive (the sign of
e^{beta gap} - 1 matches the sign of b_j, so the signs cancel), which lets
log-sum-exp handle parameter ranges where eta_j itself overflows.

Everything here is a pure function of an immutable model or law; samplers
take the seed explicitly.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .model import (
    MultiLevelModel,
    LevelSpec,
    NegativeState,
    Stability,
    build_model,
    stability_check,
)

__all__ = [
    "StationaryLaw",
    "MgfValue",
    "SegmentKind",
    "Unstable",
    "WrongK",
    "ZeroDriftPresent",
    "PositiveTheta",
    "ConjectureUnstable",
    "InvalidProfile",
    "segment_weights",
    "weights_k2_reference",
    "stationary_law",
    "density_at",
    "density_closed_form",
    "cdf_at",
    "mgf_segment",
    "sample_stationary",
    "stationary_mean",
    "stability_integral",
    "step_profile",
    "conjectured_density_general",
]


class Unstable(ValueError):
    """No stationary law: the top-level drift is >= 0."""


class WrongK(ValueError):
    """The k = 2 reference formulas only apply to two-level models."""


class ZeroDriftPresent(ValueError):
    """The closed-form density requires b_j != 0 on every level."""


class PositiveTheta(ValueError):
    """The top-level transform diverges for positive exponents."""


class ConjectureUnstable(ValueError):
    """The stability integral of the step approximation diverges."""


class InvalidProfile(ValueError):
    """Profile values must be finite with sigma > 0 on every grid cell."""


class SegmentKind(Enum):
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"


@dataclass(frozen=True, eq=False)
class StationaryLaw:
    """Stationary mixture law of a stable model.

    weights are the segment probabilities d_j; log_weights carries the same
    information without underflow.  log_norm is log C.  cdf_at_boundaries
    holds F(l_j) = d_1 + ... + d_j for the interior boundaries.
    """

    model: MultiLevelModel
    weights: np.ndarray
    log_weights: np.ndarray
    segment_kind: tuple[SegmentKind, ...]
    log_norm: float
    cdf_at_boundaries: np.ndarray


@dataclass(frozen=True)
class MgfValue:
    """One transform evaluation; the flag marks a continuous extension at a
    removable singularity (theta = 0 or theta = -beta_j)."""

    theta: float
    value: float
    removable_singularity: bool


def _log_abs_expm1(t: float) -> float:
    """log |e^t - 1|, stable for any finite t; -inf at t = 0."""
    if t > 0.0:
        return t + math.log1p(-math.exp(-t))
    if t < 0.0:
        return math.log(-math.expm1(t))
    return -math.inf


def _log_abs_expm1_arr(t: np.ndarray) -> np.ndarray:
    out = np.full_like(t, -np.inf)
    pos = t > 0.0
    neg = t < 0.0
    out[pos] = t[pos] + np.log1p(-np.exp(-t[pos]))
    out[neg] = np.log(-np.expm1(t[neg]))
    return out


def _geometry(model: MultiLevelModel) -> tuple[np.ndarray, np.ndarray]:
    """Left endpoints and widths of the levels (width inf on top)."""
    left = np.concatenate(([0.0], np.asarray(model.boundaries, dtype=float)))
    width = np.empty(model.k)
    width[:-1] = np.diff(np.concatenate(([0.0], model.boundaries)))
    width[-1] = np.inf
    return left, width


def _log_weight_terms(model: MultiLevelModel) -> np.ndarray:
    """log of the unnormalized weight terms; each term is positive.

    For j < k the term is (eta_j - eta_{j-1}) / b_j; its zero-drift limit
    2 (l_j - l_{j-1}) eta_{j-1} / sigma_j^2 is used in closed form when
    b_j = 0.  The top term is -eta_{k-1} / b_k, positive because the model
    is stable.
    """
    k = model.k
    left, width = _geometry(model)
    out = np.empty(k)
    for j in range(k - 1):
        b = model.drifts[j]
        if b == 0.0:
            out[j] = (
                model.log_etas[j]
                + math.log(2.0 * width[j])
                - 2.0 * math.log(model.sigmas[j])
            )
        else:
            out[j] = (
                model.log_etas[j]
                + _log_abs_expm1(model.betas[j] * width[j])
                - math.log(abs(b))
            )
    out[k - 1] = model.log_etas[k - 1] - math.log(-model.drifts[k - 1])
    return out


def _require_stable(model: MultiLevelModel) -> None:
    if stability_check(model) is not Stability.STABLE:
        raise Unstable(
            f"top-level drift b_k = {model.drifts[-1]!r} must be < 0 for a "
            "stationary law to exist"
        )


def segment_weights(model: MultiLevelModel) -> np.ndarray:
    """Mixture weights d_1..d_k of the stationary law."""
    _require_stable(model)
    log_terms = _log_weight_terms(model)
    return np.exp(log_terms - logsumexp(log_terms))


def weights_k2_reference(model: MultiLevelModel) -> tuple[float, float]:
    """Two-level weights by the direct closed forms.

    Deliberately naive arithmetic (no log space): this exists as an
    independent cross-check path for segment_weights, not for extreme
    parameter ranges.
    """
    if model.k != 2:
        raise WrongK(f"model has k = {model.k}, reference formulas need k = 2")
    _require_stable(model)
    b1, b2 = model.drifts
    ell1 = model.boundaries[0]
    if b1 == 0.0:
        sig1 = model.sigmas[0]
        d1 = -2.0 * b2 * ell1 / (sig1**2 - 2.0 * b2 * ell1)
    else:
        beta1 = model.betas[0]
        grow = math.exp(-beta1 * ell1) - 1.0
        d1 = b2 * grow / (b1 + b2 * grow)
    return d1, 1.0 - d1


def stationary_law(model: MultiLevelModel) -> StationaryLaw:
    """Assemble the StationaryLaw of a stable model."""
    _require_stable(model)
    log_terms = _log_weight_terms(model)
    log_norm = float(logsumexp(log_terms))
    log_weights = log_terms - log_norm
    weights = np.exp(log_weights)
    kinds = tuple(
        SegmentKind.UNIFORM if (j < model.k - 1 and model.drifts[j] == 0.0)
        else SegmentKind.EXPONENTIAL
        for j in range(model.k)
    )
    return StationaryLaw(
        model=model,
        weights=weights,
        log_weights=log_weights,
        segment_kind=kinds,
        log_norm=log_norm,
        cdf_at_boundaries=np.cumsum(weights)[: model.k - 1],
    )


def _density_pieces(law: StationaryLaw) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-segment (log amplitude, rate, left endpoint) so that the density
    on segment j is exp(log_amp[j] + rate[j] * (x - left[j]))."""
    model = law.model
    left, width = _geometry(model)
    k = model.k
    log_amp = np.empty(k)
    rate = np.empty(k)
    for j in range(k - 1):
        if law.segment_kind[j] is SegmentKind.UNIFORM:
            log_amp[j] = law.log_weights[j] - math.log(width[j])
            rate[j] = 0.0
        else:
            beta = model.betas[j]
            log_amp[j] = (
                law.log_weights[j]
                + math.log(abs(beta))
                - _log_abs_expm1(beta * width[j])
            )
            rate[j] = beta
    beta_k = model.betas[k - 1]
    log_amp[k - 1] = law.log_weights[k - 1] + math.log(-beta_k)
    rate[k - 1] = beta_k
    return log_amp, rate, left


def _as_state_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 0.0):
        raise NegativeState("state values must be >= 0")
    return np.atleast_1d(arr), scalar


def density_at(law: StationaryLaw, x) -> float | np.ndarray:
    """Stationary density h(x); accepts a scalar or an array."""
    arr, scalar = _as_state_array(x)
    idx = np.searchsorted(law.model.boundaries, arr, side="right")
    log_amp, rate, left = _density_pieces(law)
    out = np.exp(log_amp[idx] + rate[idx] * (arr - left[idx]))
    return float(out[0]) if scalar else out


def density_closed_form(model: MultiLevelModel, x) -> float | np.ndarray:
    """Stationary density by the closed form
    h(x) = (1 / (C_k sigma^2(x))) exp(int_0^x 2 b / sigma^2 dy),
    valid when no level has zero drift.  Must agree with density_at.
    """
    _require_stable(model)
    for j, b in enumerate(model.drifts):
        if b == 0.0:
            raise ZeroDriftPresent(f"drifts[{j}] = 0; the closed form needs b != 0")
    arr, scalar = _as_state_array(x)
    log_norm = float(logsumexp(_log_weight_terms(model)))
    left, _ = _geometry(model)
    idx = np.searchsorted(model.boundaries, arr, side="right")
    log_eta_prev = np.asarray(model.log_etas)
    sig = np.asarray(model.sigmas)
    beta = np.asarray(model.betas)
    # C_k = C / 2, hence the log 2 up front.
    log_h = (
        math.log(2.0)
        - log_norm
        - 2.0 * np.log(sig[idx])
        + log_eta_prev[idx]
        + beta[idx] * (arr - left[idx])
    )
    out = np.exp(log_h)
    return float(out[0]) if scalar else out


def cdf_at(law: StationaryLaw, x) -> float | np.ndarray:
    """Stationary CDF, piecewise closed form (no quadrature)."""
    arr, scalar = _as_state_array(x)
    model = law.model
    k = model.k
    left, width = _geometry(model)
    idx = np.searchsorted(model.boundaries, arr, side="right")
    cum_prev = np.concatenate(([0.0], np.cumsum(law.weights)[:-1]))
    out = np.empty_like(arr)
    for j in range(k):
        mask = idx == j
        if not mask.any():
            continue
        t = arr[mask] - left[j]
        if j == k - 1:
            frac = -np.expm1(model.betas[j] * t)
        elif law.segment_kind[j] is SegmentKind.UNIFORM:
            frac = t / width[j]
        else:
            beta = model.betas[j]
            with np.errstate(divide="ignore"):
                frac = np.exp(
                    _log_abs_expm1_arr(beta * t) - _log_abs_expm1(beta * width[j])
                )
        out[mask] = cum_prev[j] + law.weights[j] * frac
    return float(out[0]) if scalar else out


def mgf_segment(law: StationaryLaw, j: int, theta: float) -> MgfValue:
    """Transform hat-h_j(theta) of the normalized segment density.

    j is the 1-based level index.  theta <= 0 always works; positive theta
    is allowed on the bounded segments but raises PositiveTheta on the top
    level, where the integral diverges for theta >= -beta_k.  Removable
    singularities (theta = 0, and theta = -beta_j on bounded exponential
    segments) return the continuous extension with the flag set.
    """
    model = law.model
    if not 1 <= j <= model.k:
        raise IndexError(f"segment index {j} outside 1..{model.k}")
    left, width = _geometry(model)
    lo = float(left[j - 1])
    if theta == 0.0:
        return MgfValue(theta=0.0, value=1.0, removable_singularity=True)
    if j == model.k:
        if theta > 0.0:
            raise PositiveTheta(
                f"theta = {theta!r} > 0 diverges on the unbounded top level"
            )
        beta = model.betas[j - 1]
        return MgfValue(
            theta=theta,
            value=beta / (beta + theta) * math.exp(theta * lo),
            removable_singularity=False,
        )
    gap = float(width[j - 1])
    if law.segment_kind[j - 1] is SegmentKind.UNIFORM:
        if abs(theta) < 1e-6:
            # series of (e^{theta gap} - 1) / (theta gap) about theta = 0
            u = theta * gap
            value = math.exp(theta * lo) * (1.0 + u / 2.0 + u * u / 6.0)
            return MgfValue(theta=theta, value=value, removable_singularity=True)
        log_val = theta * lo + _log_abs_expm1(theta * gap) - math.log(abs(theta) * gap)
        return MgfValue(theta=theta, value=math.exp(log_val), removable_singularity=False)
    beta = model.betas[j - 1]
    s = beta + theta
    log_front = math.log(abs(beta)) - _log_abs_expm1(beta * gap) + theta * lo
    if abs(s) < 1e-6:
        # (e^{s gap} - 1) / s expanded about the removable point s = 0
        series = gap * (1.0 + s * gap / 2.0 + (s * gap) ** 2 / 6.0)
        return MgfValue(
            theta=theta,
            value=math.exp(log_front) * series,
            removable_singularity=True,
        )
    log_val = log_front + _log_abs_expm1(s * gap) - math.log(abs(s))
    return MgfValue(theta=theta, value=math.exp(log_val), removable_singularity=False)


def sample_stationary(law: StationaryLaw, seed, n: int) -> np.ndarray:
    """n i.i.d. draws by segment choice plus inverse-CDF within the segment."""
    if n < 1:
        raise ValueError(f"n = {n} must be >= 1")
    model = law.model
    k = model.k
    left, width = _geometry(model)
    rng = np.random.default_rng(seed)
    cum = np.cumsum(law.weights)
    js = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), k - 1)
    u = rng.random(n)
    out = np.empty(n)
    for j in range(k):
        mask = js == j
        if not mask.any():
            continue
        uj = u[mask]
        if j == k - 1:
            out[mask] = left[j] + np.log1p(-uj) / model.betas[j]
        elif law.segment_kind[j] is SegmentKind.UNIFORM:
            out[mask] = left[j] + uj * width[j]
        else:
            beta = model.betas[j]
            t = beta * width[j]
            if t > 0.0:
                # invert via e^{t}(u + (1-u)e^{-t}) to dodge expm1 overflow
                out[mask] = (
                    left[j]
                    + width[j]
                    + np.log(uj + (1.0 - uj) * math.exp(-t)) / beta
                )
            else:
                out[mask] = left[j] + np.log1p(uj * math.expm1(t)) / beta
    return out


def stationary_mean(law: StationaryLaw) -> float:
    """First moment, exact per-segment closed forms."""
    model = law.model
    k = model.k
    left, width = _geometry(model)
    total = 0.0
    for j in range(k):
        if j == k - 1:
            m = left[j] - 1.0 / model.betas[j]
        elif law.segment_kind[j] is SegmentKind.UNIFORM:
            m = left[j] + width[j] / 2.0
        else:
            beta = model.betas[j]
            t = beta * width[j]
            if t < -700.0:
                # mass concentrates at the left endpoint scale 1/|beta|
                m = left[j] - 1.0 / beta
            else:
                m = left[j] + width[j] / (-math.expm1(-t)) - 1.0 / beta
        total += law.weights[j] * m
    return float(total)


def stability_integral(law: StationaryLaw) -> float:
    """The integral deciding stability of the general-profile conjecture;
    finite here by construction (equals C / 2)."""
    return float(np.exp(law.log_norm)) / 2.0


def step_profile(breakpoints, values):
    """Callable step function: values[i] on [breakpoints[i-1], breakpoints[i])
    with the last value extended to infinity.  breakpoints are the interior
    jump locations, so len(values) = len(breakpoints) + 1.
    """
    bp = [float(v) for v in breakpoints]
    vals = [float(v) for v in values]
    if len(vals) != len(bp) + 1:
        raise InvalidProfile(
            f"step profile needs len(values) = len(breakpoints) + 1, got "
            f"{len(vals)} and {len(bp)}"
        )
    if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
        raise InvalidProfile("step profile breakpoints must be strictly increasing")

    def f(x: float) -> float:
        return vals[bisect_right(bp, x)]

    return f


def conjectured_density_general(sigma_fn, b_fn, x_max: float, resolution: int) -> StationaryLaw:
    """Step-profile approximation of the conjectured stationary density for
    general state-dependent coefficients.

    The profiles are sampled at cell midpoints of a uniform grid over
    [0, x_max] with `resolution` cells; the last cell's coefficients extend
    to infinity.  Profiles may be callables or sequences of length
    `resolution` (already-tabulated cell values).  The result is the exact
    stationary law of the sampled k-level model, which is this module's
    reading of the conjecture; it is experimental in exactly the sense that
    no convergence guarantee exists for rough profiles.
    """
    if not (math.isfinite(x_max) and x_max > 0.0):
        raise InvalidProfile(f"x_max = {x_max!r} must be finite and > 0")
    if resolution < 1:
        raise InvalidProfile(f"resolution = {resolution} must be >= 1")
    cell = x_max / resolution
    mids = (np.arange(resolution) + 0.5) * cell

    def tabulate(fn, name):
        if callable(fn):
            vals = np.array([float(fn(x)) for x in mids])
        else:
            vals = np.asarray(fn, dtype=float)
            if vals.shape != (resolution,):
                raise InvalidProfile(
                    f"{name} table has shape {vals.shape}, expected ({resolution},)"
                )
        return vals

    sig = tabulate(sigma_fn, "sigma")
    drift = tabulate(b_fn, "drift")
    for name, vals in (("sigma", sig), ("drift", drift)):
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise InvalidProfile(f"{name} profile is not finite at cell {bad[0]}")
    bad = np.flatnonzero(sig <= 0.0)
    if bad.size:
        raise InvalidProfile(f"sigma profile is <= 0 at cell {bad[0]}")
    if drift[-1] >= 0.0:
        raise ConjectureUnstable(
            f"top-cell drift {drift[-1]!r} >= 0: the stability integral diverges"
        )
    boundaries = cell * np.arange(1, resolution)
    model = build_model(LevelSpec(tuple(boundaries), tuple(sig), tuple(drift)))
    return stationary_law(model)
