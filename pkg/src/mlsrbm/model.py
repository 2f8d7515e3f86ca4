"""Piecewise-constant reflecting diffusion models on the half line.

The state space [0, inf) is partitioned into k levels by interior
boundaries 0 < l_1 < ... < l_{k-1}:

    S_1 = [0, l_1),   S_j = [l_{j-1}, l_j),   S_k = [l_{k-1}, inf),

and the process has constant diffusion scale sigma_j > 0 and drift b_j on
each S_j, with reflection at the origin.  Intervals are half open, so a
state sitting exactly on l_j belongs to level j+1.

This module validates the coefficient table and precomputes the two derived
quantities everything else runs on: the exponent rates beta_j = 2 b_j /
sigma_j**2 and the log boundary weights log eta_j = sum_{i<=j} beta_i
(l_i - l_{i-1}), kept in log space because the products e^{beta l} overflow
for moderate parameters.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LevelSpec",
    "MultiLevelModel",
    "Segment",
    "Stability",
    "NonIncreasingBoundaries",
    "NonPositiveSigma",
    "LengthMismatch",
    "NegativeState",
    "build_model",
    "extract_spec",
    "coefficients_at",
    "stability_check",
    "segments",
]


class NonIncreasingBoundaries(ValueError):
    """Interior boundaries must be finite, strictly positive and increasing."""


class NonPositiveSigma(ValueError):
    """Every level needs a strictly positive, finite diffusion scale."""


class LengthMismatch(ValueError):
    """sigmas and drifts need exactly one more entry than boundaries."""


class NegativeState(ValueError):
    """The process lives on [0, inf); a negative state has no level."""


@dataclass(frozen=True)
class LevelSpec:
    """Raw coefficient table: interior boundaries plus per-level (sigma, drift).

    Values are coerced to float tuples on construction; validation happens
    in build_model, which rejects rather than clamps.
    """

    boundaries: tuple[float, ...]
    sigmas: tuple[float, ...]
    drifts: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(float(v) for v in self.boundaries))
        object.__setattr__(self, "sigmas", tuple(float(v) for v in self.sigmas))
        object.__setattr__(self, "drifts", tuple(float(v) for v in self.drifts))


@dataclass(frozen=True)
class Segment:
    """One level S_j = [lo, hi), with hi = inf for the top level.

    index is the 1-based level number j, matching the S_j notation.
    """

    lo: float
    hi: float
    index: int


@dataclass(frozen=True, eq=False)
class MultiLevelModel:
    """Validated model with derived rates.

    betas[j] is 2 * drifts[j] / sigmas[j]**2 for the 0-based level j.
    log_etas[j] holds log eta_j for j = 0..k-1 with log eta_0 = 0; eta_k is
    0 by convention and never materialized (eta_k_is_zero records this).
    """

    spec: LevelSpec
    betas: tuple[float, ...]
    log_etas: tuple[float, ...]
    eta_k_is_zero: bool = True

    @property
    def k(self) -> int:
        return len(self.spec.sigmas)

    @property
    def boundaries(self) -> tuple[float, ...]:
        return self.spec.boundaries

    @property
    def sigmas(self) -> tuple[float, ...]:
        return self.spec.sigmas

    @property
    def drifts(self) -> tuple[float, ...]:
        return self.spec.drifts


class Stability(enum.Enum):
    STABLE = "stable"
    NULL = "null"
    TRANSIENT = "transient"


def build_model(spec: LevelSpec) -> MultiLevelModel:
    """Validate a LevelSpec and derive betas and log_etas.

    Raises LengthMismatch, NonPositiveSigma or NonIncreasingBoundaries,
    naming the offending index.  Degenerate k = 1 (no interior boundary)
    is accepted; it is plain reflected Brownian motion and serves as a
    collapse check for everything downstream.
    """
    if not isinstance(spec, LevelSpec):
        spec = LevelSpec(*spec)
    k = len(spec.sigmas)
    if k == 0:
        raise LengthMismatch("need at least one level, got empty sigmas")
    if len(spec.drifts) != k:
        raise LengthMismatch(
            f"drifts has length {len(spec.drifts)}, expected {k} to match sigmas"
        )
    if len(spec.boundaries) != k - 1:
        raise LengthMismatch(
            f"boundaries has length {len(spec.boundaries)}, expected {k - 1} "
            f"for {k} levels"
        )
    for i, s in enumerate(spec.sigmas):
        if not math.isfinite(s) or s <= 0.0:
            raise NonPositiveSigma(f"sigmas[{i}] = {s!r} must be finite and > 0")
    for i, b in enumerate(spec.drifts):
        if not math.isfinite(b):
            raise ValueError(f"drifts[{i}] = {b!r} must be finite")
    prev = 0.0
    for i, ell in enumerate(spec.boundaries):
        if not math.isfinite(ell) or ell <= prev:
            raise NonIncreasingBoundaries(
                f"boundaries[{i}] = {ell!r} must be finite and exceed "
                f"{'0' if i == 0 else f'boundaries[{i - 1}] = {prev!r}'}"
            )
        prev = ell

    betas = tuple(2.0 * b / s**2 for b, s in zip(spec.drifts, spec.sigmas))
    log_etas = [0.0]
    prev = 0.0
    for j, ell in enumerate(spec.boundaries):
        log_etas.append(log_etas[-1] + betas[j] * (ell - prev))
        prev = ell
    return MultiLevelModel(spec=spec, betas=betas, log_etas=tuple(log_etas))


def extract_spec(model: MultiLevelModel) -> LevelSpec:
    """Inverse of build_model on valid inputs."""
    return model.spec


def level_index(model: MultiLevelModel, x: float) -> int:
    """0-based level of x, half-open convention: x = l_j belongs to level j+1."""
    if x < 0.0:
        raise NegativeState(f"x = {x!r} is below the reflecting origin")
    return bisect_right(model.boundaries, x)


def coefficients_at(model: MultiLevelModel, x: float) -> tuple[float, float]:
    """(sigma, b) on the level containing x."""
    j = level_index(model, x)
    return model.sigmas[j], model.drifts[j]


def stability_check(model: MultiLevelModel) -> Stability:
    """Positive recurrence is decided by the top-level drift alone."""
    b_top = model.drifts[-1]
    if b_top < 0.0:
        return Stability.STABLE
    if b_top == 0.0:
        return Stability.NULL
    return Stability.TRANSIENT


def segments(model: MultiLevelModel) -> tuple[Segment, ...]:
    """The level partition as explicit intervals (1-based index)."""
    edges = (0.0, *model.boundaries, math.inf)
    return tuple(
        Segment(lo=edges[j], hi=edges[j + 1], index=j + 1) for j in range(model.k)
    )


def boundary_arrays(model: MultiLevelModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(boundaries, sigmas, drifts) as float64 arrays for numeric kernels."""
    return (
        np.asarray(model.boundaries, dtype=np.float64),
        np.asarray(model.sigmas, dtype=np.float64),
        np.asarray(model.drifts, dtype=np.float64),
    )
