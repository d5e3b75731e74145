"""Dynamics indicators and the diagonal row weighting they induce.

For a reference feature g = d^gamma_t d^alpha_x (u^beta) the indicator of
test function h is the leading error coefficient

    r_h = beta * | Q_h( U^(beta-1) * d^gamma_t d^alpha_x phi_h ) |,

large where the local dynamics of g are strong.  Indicators are normalized
to maximum 1 before use; a reference with beta = 1 is constant across rows
and therefore weights all test functions equally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .grid import Dataset
from .library import FeatureSpec
from .testfn import TestFunctionGrid
from .weak import WeakSystem, weak_quadrature

ReferenceFeature = FeatureSpec


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative per-row weights; normalized means max(r) == 1."""

    r: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64).copy()
        if np.any(r < 0):
            raise ValueError("weights must be nonnegative")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


def default_reference_set(spatial_dims: int) -> list[ReferenceFeature]:
    """The reference features driving the ensemble of weighted solves.

    1D: u, u^2, (u^2)_x, (u^2)_xx, (u^2)_t  (M = 5; u stands in for all
    beta=1 references, whose indicators coincide).
    2D: u, u^2, (u^2)_x, (u^2)_y, (u^2)_xx, (u^2)_xy, (u^2)_yy, (u^2)_t
    (M = 8).
    """
    if spatial_dims == 1:
        return [
            FeatureSpec((0,), 1),
            FeatureSpec((0,), 2),
            FeatureSpec((1,), 2),
            FeatureSpec((2,), 2),
            FeatureSpec((0,), 2, gamma=1),
        ]
    if spatial_dims == 2:
        return [
            FeatureSpec((0, 0), 1),
            FeatureSpec((0, 0), 2),
            FeatureSpec((1, 0), 2),
            FeatureSpec((0, 1), 2),
            FeatureSpec((2, 0), 2),
            FeatureSpec((1, 1), 2),
            FeatureSpec((0, 2), 2),
            FeatureSpec((0, 0), 2, gamma=1),
        ]
    raise ValueError(f"spatial_dims must be 1 or 2, got {spatial_dims}")


def uniform_reference_set(spatial_dims: int) -> list[ReferenceFeature]:
    """Single uniform reference (M = 1): the ablated, unweighted pipeline."""
    return [FeatureSpec((0,) * spatial_dims, 1)]


def dynamics_indicator(dataset: Dataset, tfs: TestFunctionGrid,
                       g: ReferenceFeature) -> WeightVector:
    """Normalized dynamics indicator of one reference feature.

    Uses the form with derivatives on the test function, so only the data
    monomial U^(beta-1) is sampled.  An all-zero raw indicator falls back
    to uniform weights.
    """
    raw = g.beta * np.abs(weak_quadrature(dataset, tfs, g.alpha, g.gamma, g.beta - 1))
    peak = raw.max()
    if peak == 0:
        return WeightVector(np.ones(tfs.size))
    return WeightVector(raw / peak)


def apply_weights(sys: WeakSystem, r: np.ndarray | WeightVector) -> WeakSystem:
    """Row-scale the system by a weight vector; the input is untouched."""
    rv = r.r if isinstance(r, WeightVector) else np.asarray(r, dtype=np.float64)
    if rv.shape != (sys.n_rows,):
        raise DimensionMismatch(f"weight length {rv.shape} != row count {sys.n_rows}")
    return WeakSystem(rv[:, None] * sys.W, rv * sys.b, dict(sys.provenance))
