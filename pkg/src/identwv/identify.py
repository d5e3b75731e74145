"""End-to-end identification: weighted solves, two-stage voting, recovery.

The pipeline assembles the weak system once, runs one sparse solve per
reference feature with its dynamics-indicator row weighting, keeps the
features that occur in at least a fraction rho of the solves, drops those
whose average recovered magnitude falls below a fraction v of the largest,
and finally refits the survivors on the unweighted system rescaled by the
average leading error coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySupport
from .grid import Dataset
from .library import Coefficients, FeatureLibrary
from .solver import SparseSolveParams, solve_sparse
from .testfn import TestFunctionGrid
from .weak import WeakSystem, assemble, weak_quadrature
from .weighting import ReferenceFeature, apply_weights, default_reference_set, dynamics_indicator

# Leading-error scales at or below this fraction of the largest are treated
# as the analytic zeros they are (beta=0, or beta=1 with a derivative) and
# replaced by 1; the restricted least-squares solution is invariant to the
# replacement, only the conditioning changes.
_SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class VotingConfig:
    """Occurrence threshold rho and coefficient threshold v."""

    rho: float = 0.25
    v: float = 0.05

    def __post_init__(self):
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must lie in [0, 1]")
        if not 0 <= self.v < 1:
            raise ValueError("v must lie in [0, 1)")


@dataclass
class IdentResult:
    """Everything the identification run produced."""

    coefficients: Coefficients
    support: np.ndarray
    occurrence_support: np.ndarray
    occurrence: np.ndarray
    avg_magnitude: np.ndarray
    subresults: list[Coefficients]
    diagnostics: dict = field(default_factory=dict)

    @property
    def flags(self) -> list[str]:
        return self.diagnostics.get("flags", [])


def leading_error_scales(dataset: Dataset, library: FeatureLibrary,
                         tfs: TestFunctionGrid) -> np.ndarray:
    """Sanitized average leading error coefficient e<l> per feature.

    e(h,l) = beta_l * |Q_h(U^(beta_l - 1) d^alpha_l phi_h)| shares its
    quadrature kernel with the dynamics indicator at gamma = 0; e<l>
    averages over rows.  Entries that are zero (or negligible relative to
    the largest) are replaced by 1 so the diagonal rescale stays invertible.
    """
    e = np.empty(library.size)
    for l, f in enumerate(library.features):
        if f.beta == 0:
            e[l] = 0.0
        else:
            e[l] = f.beta * np.mean(np.abs(weak_quadrature(dataset, tfs, f.alpha, 0, f.beta - 1)))
    peak = e.max()
    if peak == 0:
        return np.ones(library.size)
    e[e <= _SCALE_FLOOR * peak] = 1.0
    return e


def occurrence_vote(subresults: list[Coefficients], rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of solves in which each feature is active, and the support
    of features reaching at least rho."""
    if not subresults:
        raise ValueError("need at least one subresult")
    stack = np.stack([c.values for c in subresults])
    occurrence = np.mean(stack != 0, axis=0)
    return occurrence, np.flatnonzero(occurrence >= rho)


def coefficient_vote(subresults: list[Coefficients], B: np.ndarray,
                     v: float) -> tuple[np.ndarray, np.ndarray]:
    """Average recovered magnitudes on B and the survivors C.

    C keeps the features of B whose average magnitude is at least v times
    the largest average magnitude in B.
    """
    L = len(subresults[0])
    abar = np.zeros(L)
    if len(B) == 0:
        return abar, np.array([], dtype=int)
    stack = np.stack([np.abs(c.values) for c in subresults])
    abar[B] = stack.mean(axis=0)[B]
    peak = abar[B].max()
    if peak == 0:
        return abar, np.array([], dtype=int)
    C = B[abar[B] >= v * peak]
    return abar, C


def final_recovery(sys: WeakSystem, dataset: Dataset, library: FeatureLibrary,
                   tfs: TestFunctionGrid, C: np.ndarray,
                   scales: np.ndarray | None = None) -> tuple[Coefficients, dict]:
    """Restricted least squares on the support C with diagonal rescaling.

    Solves min ||W D^-1 z - b|| over supp(z) in C and returns a = D^-1 z,
    where D holds the sanitized average leading error coefficients
    (recomputed unless passed in).  In exact arithmetic this equals the
    plain restricted least-squares minimizer; the rescale only improves
    conditioning.
    """
    C = np.asarray(C, dtype=int)
    if C.size == 0:
        raise EmptySupport("cannot recover coefficients on an empty support")
    if scales is None:
        scales = leading_error_scales(dataset, library, tfs)
    A = sys.W[:, C] / scales[C][None, :]
    z, _, rank, _ = np.linalg.lstsq(A, sys.b, rcond=None)
    info = {"rank_deficient": rank < len(C),
            "condition_number": float(np.linalg.cond(A))}
    coefs = np.zeros(library.size)
    coefs[C] = z / scales[C]
    return Coefficients(coefs), info


def identify(dataset: Dataset, library: FeatureLibrary, tfs: TestFunctionGrid,
             refs: list[ReferenceFeature] | None = None,
             solver_params: SparseSolveParams | None = None,
             voting: VotingConfig | None = None) -> IdentResult:
    """Run the full weighted-weak-form identification on one dataset."""
    if refs is None:
        refs = default_reference_set(dataset.grid.spatial_dims)
    if solver_params is None:
        solver_params = SparseSolveParams()
    if voting is None:
        voting = VotingConfig()

    sys = assemble(dataset, library, tfs)
    scales = leading_error_scales(dataset, library, tfs)

    subresults: list[Coefficients] = []
    per_ref: list[dict] = []
    indicators: list[np.ndarray] = []
    for g in refs:
        ind = dynamics_indicator(dataset, tfs, g)
        coefs, diag = solve_sparse(apply_weights(sys, ind), solver_params, col_scale=scales)
        subresults.append(coefs)
        per_ref.append({"reference": g.name, **diag})
        indicators.append(ind.r)

    occurrence, B = occurrence_vote(subresults, voting.rho)
    abar, C = coefficient_vote(subresults, B, voting.v) if len(B) else \
        (np.zeros(library.size), np.array([], dtype=int))

    diagnostics = {
        "per_reference": per_ref,
        "indicators": indicators,
        "rho": voting.rho,
        "v": voting.v,
        "solver_params": solver_params,
        "n_references": len(refs),
        "flags": [],
    }
    if C.size == 0:
        diagnostics["flags"].append("empty_support")
        coefs = Coefficients(np.zeros(library.size))
    else:
        coefs, rec_info = final_recovery(sys, dataset, library, tfs, C, scales=scales)
        diagnostics["final_recovery"] = rec_info
        if rec_info["rank_deficient"]:
            diagnostics["flags"].append("rank_deficient")
    return IdentResult(coefs, C, B, occurrence, abar, subresults, diagnostics)


def format_pde(library: FeatureLibrary, coefficients: Coefficients,
               precision: int = 3) -> str:
    """Render a coefficient vector as a readable equation for u_t."""
    parts = []
    for l in coefficients.support:
        a = coefficients.values[l]
        name = library.features[l].name
        if not parts:
            parts.append(f"{a:.{precision}f} {name}")
        elif a < 0:
            parts.append(f"- {abs(a):.{precision}f} {name}")
        else:
            parts.append(f"+ {a:.{precision}f} {name}")
    return "u_t = " + (" ".join(parts) if parts else "0")
