"""Candidate-term enumeration and coefficient-vector bookkeeping.

A feature is a spatial derivative of a monomial, d^alpha_x (u^beta).
Reference features used for dynamics weighting additionally carry a time
derivative order gamma; library features always have gamma = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingFeature, UnsupportedEquation


@dataclass(frozen=True)
class FeatureSpec:
    """One term d^gamma_t d^alpha_x (u^beta).

    ``alpha`` has one entry per spatial dimension.
    """

    alpha: tuple[int, ...]
    beta: int
    gamma: int = 0

    def __post_init__(self):
        if np.isscalar(self.alpha):
            object.__setattr__(self, "alpha", (int(self.alpha),))
        else:
            object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        if any(a < 0 for a in self.alpha) or self.beta < 0 or self.gamma < 0:
            raise ValueError("derivative orders and monomial power must be nonnegative")

    @property
    def total_order(self) -> int:
        return sum(self.alpha)

    @property
    def name(self) -> str:
        return term_name(self)


def term_name(spec: FeatureSpec) -> str:
    """Human-readable term name.

    Grammar: the base is ``1`` for beta=0, ``u`` for beta=1 and ``(u^B)``
    otherwise.  Derivatives append a subscript of ``x`` repeated alpha_x
    times, then ``y``, then ``t``; the subscript is wrapped in braces when
    longer than one character.  Examples: ``u``, ``u_x``, ``u_{xx}``,
    ``(u^2)_x``, ``(u^2)_{xy}``, ``(u^2)_t``.
    """
    if spec.beta == 0:
        base = "1"
    elif spec.beta == 1:
        base = "u"
    else:
        base = f"(u^{spec.beta})"
    sub = "x" * spec.alpha[0]
    if len(spec.alpha) > 1:
        sub += "y" * spec.alpha[1]
    sub += "t" * spec.gamma
    if not sub:
        return base
    return f"{base}_{sub}" if len(sub) == 1 else f"{base}_{{{sub}}}"


def _multi_indices(dims: int, max_total: int) -> list[tuple[int, ...]]:
    """Spatial multi-indices with |alpha| <= max_total, in graded order.

    Within one total order, indices are sorted with the x order decreasing:
    (2,0), (1,1), (0,2).
    """
    if dims == 1:
        return [(a,) for a in range(max_total + 1)]
    out = []
    for total in range(max_total + 1):
        for ay in range(total + 1):
            out.append((total - ay, ay))
    return out


@dataclass(frozen=True)
class FeatureLibrary:
    """Ordered candidate-term list with fixed derivative and monomial caps."""

    features: tuple[FeatureSpec, ...]
    alpha_max: int
    beta_max: int
    spatial_dims: int
    include_constant: bool = False

    @property
    def size(self) -> int:
        return len(self.features)

    def index_of(self, alpha: tuple[int, ...], beta: int) -> int:
        """Position of the feature (alpha, beta); raises MissingFeature."""
        key = (tuple(alpha), beta)
        for i, f in enumerate(self.features):
            if (f.alpha, f.beta) == key:
                return i
        raise MissingFeature(f"library has no feature alpha={alpha}, beta={beta}")

    def names(self) -> list[str]:
        return [f.name for f in self.features]


def build_library(alpha_max: int, beta_max: int, spatial_dims: int,
                  include_constant: bool = False) -> FeatureLibrary:
    """Enumerate all (alpha, beta) with 1 <= beta <= beta_max, |alpha| <= alpha_max.

    The ordering is deterministic: beta ascending, then graded multi-index
    order.  With ``include_constant`` the feature (alpha=0, beta=0) is
    prepended; its recovery scale is fixed to 1.
    """
    if alpha_max < 0 or beta_max < 1:
        raise ValueError("alpha_max must be >= 0 and beta_max >= 1")
    feats: list[FeatureSpec] = []
    if include_constant:
        feats.append(FeatureSpec((0,) * spatial_dims, 0))
    for beta in range(1, beta_max + 1):
        for alpha in _multi_indices(spatial_dims, alpha_max):
            feats.append(FeatureSpec(alpha, beta))
    return FeatureLibrary(tuple(feats), alpha_max, beta_max, spatial_dims, include_constant)


def default_library(spatial_dims: int) -> FeatureLibrary:
    """Default candidate library: 1D uses alpha_max=6, beta_max=6 (L=42);
    2D uses total order <= 2 with beta_max=3 (L=18)."""
    if spatial_dims == 1:
        return build_library(6, 6, 1)
    return build_library(2, 3, 2)


@dataclass(frozen=True)
class Coefficients:
    """Real coefficient vector aligned with a library's feature ordering."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def __len__(self) -> int:
        return len(self.values)


# Ground-truth right-hand sides in library coordinates.  Terms of the form
# u*u_x are expressed in divergence form 0.5*(u^2)_x.
_TRUE_TERMS: dict[str, dict[tuple[tuple[int, ...], int], float]] = {
    "heat": {((2,), 1): 0.1592},
    "transport": {((1,), 1): -1.0},
    "transport_diffusion": {((1,), 1): -10.0, ((2,), 1): 1.0},
    "burgers": {((1,), 2): -0.5},
    "burgers_diffusion": {((1,), 2): -0.5, ((2,), 1): 0.2},
    "kdv": {((3,), 1): -1.0, ((1,), 2): -0.5},
    "ks": {((1,), 2): -0.5, ((2,), 1): -1.0, ((4,), 1): -1.0},
    "pm2d": {((2, 0), 1): 1.0, ((1, 1), 1): -0.8, ((0, 2), 1): 0.3},
}

EQUATION_IDS = tuple(_TRUE_TERMS)


def true_coefficients(equation_id: str, library: FeatureLibrary) -> Coefficients:
    """Ground-truth coefficient vector for a benchmark equation."""
    if equation_id not in _TRUE_TERMS:
        raise UnsupportedEquation(f"unknown equation {equation_id!r}; "
                                  f"supported: {', '.join(EQUATION_IDS)}")
    vec = np.zeros(library.size)
    for (alpha, beta), coef in _TRUE_TERMS[equation_id].items():
        vec[library.index_of(alpha, beta)] = coef
    return Coefficients(vec)
