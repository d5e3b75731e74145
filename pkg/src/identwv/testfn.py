"""Localized separable polynomial bump test functions and their placement.

Each test function is a product over axes of even-power bumps

    phi(x, t) = prod_d (1 - ((x_d - c_d)/w_d)^2)^p_d * (1 - ((t - c_t)/w_t)^2)^p_t

supported on |x_d - c_d| <= w_d, |t - c_t| <= w_t and zero outside.  All
derivatives are evaluated in closed form by polynomial differentiation, so
derivatives up to order p-1 vanish exactly on the support boundary.

Axis convention throughout this module: spatial axes first, time axis last.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NoValidCenters, OrderTooHigh
from .grid import Grid


@lru_cache(maxsize=None)
def _bump_poly_coeffs(p: int, order: int) -> tuple[float, ...]:
    """Coefficients (in s) of d^order/ds^order (1 - s^2)^p."""
    c = np.zeros(2 * p + 1)
    for k in range(p + 1):
        c[2 * k] = (-1) ** k * comb(p, k)
    for _ in range(order):
        c = npoly.polyder(c)
    return tuple(c)


def bump_factor(s, p: int, order: int, halfwidth: float):
    """Order-th derivative of (1 - s^2)^p w.r.t. the physical coordinate.

    ``s`` is the normalized offset (x - c)/halfwidth; values with |s| >= 1
    are exactly zero.
    """
    if order > p - 1:
        raise OrderTooHigh(f"derivative order {order} not admissible for bump power {p}")
    s = np.asarray(s, dtype=np.float64)
    vals = npoly.polyval(s, np.array(_bump_poly_coeffs(p, order)))
    vals = vals * halfwidth ** (-order)
    return np.where(np.abs(s) >= 1.0, 0.0, vals)


@lru_cache(maxsize=None)
def bump_kernel(p: int, order: int, m: int, delta: float) -> np.ndarray:
    """Derivative values at the 2m+1 grid offsets spanning one support axis."""
    s = np.arange(-m, m + 1) / m
    k = bump_factor(s, p, order, m * delta)
    k.setflags(write=False)
    return k


@dataclass(frozen=True)
class TestFunction:
    """One localized bump; tuples are ordered (spatial axes..., time axis)."""

    center_idx: tuple[int, ...]
    center: tuple[float, ...]
    halfwidth_cells: tuple[int, ...]
    halfwidth: tuple[float, ...]
    orders: tuple[int, ...]


def eval_derivative(tf: TestFunction, dx_orders: tuple[int, ...], dt_order: int,
                    point: tuple[float, ...]) -> float:
    """Exact mixed derivative of the bump at a space-time point.

    ``dx_orders`` has one entry per spatial axis and ``point`` lists
    coordinates in the same (spatial..., time) order as the test function's
    fields.  Orders must stay below the polynomial power on each axis.
    """
    if np.isscalar(dx_orders):
        dx_orders = (int(dx_orders),)
    orders = tuple(dx_orders) + (dt_order,)
    if len(orders) != len(tf.center):
        raise ValueError("order count does not match test-function dimensionality")
    out = 1.0
    for c, w, p, d, x in zip(tf.center, tf.halfwidth, tf.orders, orders, point):
        out *= float(bump_factor((x - c) / w, p, d, w))
    return out


@dataclass(frozen=True)
class TestFunctionGrid:
    """A tensor-product placement of identical bumps over a grid.

    Test functions are enumerated in C order over per-axis center lists
    (time axis varying fastest), which fixes the row order of every weak
    system assembled from this placement.
    """

    grid: Grid
    functions: tuple[TestFunction, ...]
    halfwidth_cells: tuple[int, ...]
    orders: tuple[int, ...]
    strides: tuple[int, ...]
    centers_by_axis: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.functions)

    @property
    def center_counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.centers_by_axis)

    def spacings(self) -> tuple[float, ...]:
        """Grid spacings per axis, (dx..., dt)."""
        return tuple(self.grid.dx) + (self.grid.dt,)


def _axis_centers(n: int, m: int, s: int) -> list[int]:
    if m < 1 or s < 1:
        raise ValueError("halfwidth and stride must be >= 1")
    return list(range(m, n - m + 1, s))


def place_uniform(grid: Grid, m_x: int, m_t: int, s_x: int | None = None,
                  s_t: int | None = None, p_x: int = 8, p_t: int = 3,
                  m_y: int | None = None, s_y: int | None = None,
                  p_y: int | None = None) -> TestFunctionGrid:
    """Place bumps on a uniform lattice of centers with interior supports.

    Centers run from index m to n-m in steps of the stride (default: the
    halfwidth, giving 50% overlap).  Raises NoValidCenters when a support
    does not fit.
    """
    s_x = m_x if s_x is None else s_x
    s_t = m_t if s_t is None else s_t
    if grid.spatial_dims == 2:
        m_y = m_x if m_y is None else m_y
        s_y = m_y if s_y is None else s_y
        p_y = p_x if p_y is None else p_y
        ms = (m_x, m_y, m_t)
        ss = (s_x, s_y, s_t)
        ps = (p_x, p_y, p_t)
        ns = grid.n_x + (grid.n_t,)
    else:
        ms = (m_x, m_t)
        ss = (s_x, s_t)
        ps = (p_x, p_t)
        ns = grid.n_x + (grid.n_t,)
    spacings = tuple(grid.dx) + (grid.dt,)
    origins = tuple(grid.x_min) + (0.0,)
    centers_by_axis = []
    for n, m, s in zip(ns, ms, ss):
        centers = _axis_centers(n, m, s)
        if not centers:
            raise NoValidCenters(f"halfwidth {m} cells does not fit in {n} intervals")
        centers_by_axis.append(tuple(centers))
    halfwidth = tuple(m * d for m, d in zip(ms, spacings))
    funcs = []
    for idx in itertools.product(*centers_by_axis):
        center = tuple(o + i * d for o, i, d in zip(origins, idx, spacings))
        funcs.append(TestFunction(idx, center, ms, halfwidth, ps))
    return TestFunctionGrid(grid, tuple(funcs), ms, ps, ss, tuple(centers_by_axis))


def default_placement(grid: Grid, alpha_max: int) -> TestFunctionGrid:
    """Default placement: halfwidth n/16 cells (clamped to alpha_max+2),
    stride = halfwidth, bump powers p_x = alpha_max+2 and p_t = 3."""
    p_x = alpha_max + 2
    clamp = alpha_max + 2
    m_t = max(grid.n_t // 16, clamp)
    if grid.spatial_dims == 2:
        m_x = max(grid.n_x[0] // 16, clamp)
        m_y = max(grid.n_x[1] // 16, clamp)
        return place_uniform(grid, m_x, m_t, p_x=p_x, p_t=3, m_y=m_y)
    m_x = max(grid.n_x[0] // 16, clamp)
    return place_uniform(grid, m_x, m_t, p_x=p_x, p_t=3)
