"""Discrete weak-form linear system W a = b assembled by local quadrature.

Each row h integrates the data against derivatives of one localized test
function over its support.  Because the bumps and every derivative used
vanish on the support boundary, the trapezoidal rule coincides with the
plain Riemann sum with cell weight dx*dt, which is what is implemented.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatch
from .grid import Dataset
from .library import Coefficients, FeatureLibrary
from .testfn import TestFunction, TestFunctionGrid, bump_kernel


def _space_first(dataset: Dataset) -> np.ndarray:
    """View of the values with axes reordered to (spatial..., time)."""
    return np.moveaxis(dataset.values, 0, -1)


def _axis_kernels(tfs: TestFunctionGrid, orders: tuple[int, ...]) -> list[np.ndarray]:
    return [bump_kernel(p, d, m, delta)
            for p, d, m, delta in zip(tfs.orders, orders, tfs.halfwidth_cells, tfs.spacings())]


def _outer(kernels: list[np.ndarray]) -> np.ndarray:
    return reduce(np.multiply.outer, kernels)


def weak_quadrature(dataset: Dataset, tfs: TestFunctionGrid,
                    alpha: tuple[int, ...], dt_order: int, power: int) -> np.ndarray:
    """Per-test-function quadrature Q_h(U^power * d^alpha_x d^dt_order_t phi_h).

    Returns a vector of length H in the test-function enumeration order.
    This single kernel backs feature assembly, the dynamics indicators and
    the leading-error scales, which all share this integral form.  The
    separable bump lets the sum factor into one windowed contraction per
    axis.
    """
    if np.isscalar(alpha):
        alpha = (int(alpha),)
    orders = tuple(alpha) + (dt_order,)
    kernels = _axis_kernels(tfs, orders)
    V = _space_first(dataset)
    if power == 0:
        out = np.ones_like(V)
    elif power == 1:
        out = np.ascontiguousarray(V)
    else:
        out = V ** power
    for ax in reversed(range(out.ndim)):
        k = kernels[ax]
        starts = np.asarray(tfs.centers_by_axis[ax]) - tfs.halfwidth_cells[ax]
        idx = starts[:, None] + np.arange(len(k))[None, :]
        arr = np.ascontiguousarray(np.moveaxis(out, ax, -1))
        out = np.moveaxis(arr[..., idx] @ k, -1, ax)
    cell = float(np.prod(tfs.spacings()))
    return out.ravel(order="C") * cell


@dataclass
class WeakSystem:
    """The H x L feature matrix and right-hand side of the weak formulation."""

    W: np.ndarray
    b: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 2 or self.b.ndim != 1 or self.W.shape[0] != self.b.shape[0]:
            raise DimensionMismatch("W must be H x L and b length H")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("weak system entries must be finite")

    @property
    def n_rows(self) -> int:
        return self.W.shape[0]

    @property
    def n_features(self) -> int:
        return self.W.shape[1]


def assemble(dataset: Dataset, library: FeatureLibrary, tfs: TestFunctionGrid) -> WeakSystem:
    """Build W[h,l] = (-1)^|alpha_l| Q_h(U^beta_l d^alpha_l phi_h) and
    b[h] = -Q_h(U d_t phi_h).

    Monomial powers are taken pointwise on the (possibly noisy) data.
    """
    H, L = tfs.size, library.size
    if H < L:
        warnings.warn(f"only H={H} test functions for L={L} features; "
                      "consider a denser placement", stacklevel=2)
    W = np.empty((H, L))
    for l, f in enumerate(library.features):
        q = weak_quadrature(dataset, tfs, f.alpha, 0, f.beta)
        W[:, l] = (-1) ** f.total_order * q
    b = -weak_quadrature(dataset, tfs, (0,) * dataset.grid.spatial_dims, 1, 1)
    prov = {
        "n_rows": H,
        "n_features": L,
        "tf_halfwidth_cells": tfs.halfwidth_cells,
        "tf_orders": tfs.orders,
        "tf_strides": tfs.strides,
        "grid_shape": dataset.grid.shape,
    }
    return WeakSystem(W, b, prov)


def _support_window(dataset: Dataset, tf: TestFunction) -> np.ndarray:
    V = _space_first(dataset)
    sl = tuple(slice(c - m, c + m + 1) for c, m in zip(tf.center_idx, tf.halfwidth_cells))
    return V[sl]


def pointwise_residual(dataset: Dataset, coefficients: Coefficients,
                       tf: TestFunction, library: FeatureLibrary,
                       tfs: TestFunctionGrid) -> np.ndarray:
    """Residual R(U, x, t) on the support of one test function.

    R = U d_t phi + sum_l a_l (-1)^|alpha_l| U^beta_l d^alpha_l phi,
    evaluated pointwise with the derivative transferred to phi.  Returned
    as the (2m+1, ...) window of support grid points, spatial axes first.
    """
    dims = dataset.grid.spatial_dims
    Uw = _support_window(dataset, tf)
    K_t = _outer(_axis_kernels(tfs, (0,) * dims + (1,)))
    R = Uw * K_t
    for l in coefficients.support:
        f = library.features[l]
        K = _outer(_axis_kernels(tfs, tuple(f.alpha) + (0,)))
        term = K if f.beta == 0 else (Uw if f.beta == 1 else Uw ** f.beta) * K
        R = R + coefficients.values[l] * (-1) ** f.total_order * term
    return R


def e_astar(dataset: Dataset, coefficients: Coefficients, tfs: TestFunctionGrid,
            library: FeatureLibrary, weights: np.ndarray | None = None) -> np.ndarray:
    """Per-row residual of the weighted weak system at the given coefficients.

    Computed directly as the windowed sum of the pointwise residual,
    (e)_h = r_h * sum_{support} R(U, x_j, t_k) dx dt, which equals
    diag(r) (W a - b) up to round-off.  ``weights`` defaults to ones.
    """
    if weights is None:
        weights = np.ones(tfs.size)
    if len(weights) != tfs.size:
        raise DimensionMismatch("weights length must equal the test-function count")
    cell = float(np.prod(tfs.spacings()))
    out = np.empty(tfs.size)
    for h, tf in enumerate(tfs.functions):
        R = pointwise_residual(dataset, coefficients, tf, library, tfs)
        out[h] = weights[h] * R.sum() * cell
    return out
