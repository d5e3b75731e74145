"""Sparse regression on a weak system: subspace pursuit with holdout model
selection and contribution trimming.

The solver is deterministic given its seed.  All sorting uses stable order
so that ties break toward lower feature indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .library import Coefficients
from .weak import WeakSystem


@dataclass(frozen=True)
class SparseSolveParams:
    """Knobs for sparse recovery and model selection.

    ``parsimony_slack`` is the factor by which a smaller support may trail
    the best holdout residual and still be preferred.  ``residual_floor``
    clamps relative holdout residuals from below before comparison:
    residuals at quadrature-error level on noiseless data are already
    perfect fits, and chasing further reduction only selects spurious
    terms.
    """

    s_max: int = 8
    cv_fraction: float = 0.3
    trim_threshold: float = 0.05
    max_sp_iters: int = 20
    seed: int = 0
    parsimony_slack: float = 0.05
    residual_floor: float = 1e-6

    def __post_init__(self):
        if self.s_max < 1:
            raise ValueError("s_max must be >= 1")
        if not 0 < self.cv_fraction < 1:
            raise ValueError("cv_fraction must lie in (0, 1)")
        if not 0 <= self.trim_threshold < 1:
            raise ValueError("trim_threshold must lie in [0, 1)")
        if self.max_sp_iters < 1:
            raise ValueError("max_sp_iters must be >= 1")
        if self.residual_floor < 0:
            raise ValueError("residual_floor must be nonnegative")


def _lstsq(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool]:
    """Least squares with minimum-norm fallback; flags rank deficiency."""
    z, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    return z, rank < A.shape[1]


def _top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores, ties broken toward lower index."""
    return np.argsort(-scores, kind="stable")[:k]


def subspace_pursuit(A: np.ndarray, y: np.ndarray, s: int,
                     max_iters: int = 20) -> tuple[np.ndarray, np.ndarray, dict]:
    """Greedy expand-and-prune support search for ||Az - y|| with ||z||_0 <= s.

    Correlations are ranked on column-normalized A; least-squares fits and
    the returned coefficients use the original column scale.  Zero columns
    are excluded from candidacy.  Returns (support, coefficients, info).
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    H, L = A.shape
    if y.shape != (H,):
        raise DimensionMismatch("y length must match the row count of A")
    colnorm = np.linalg.norm(A, axis=0)
    candidates = colnorm > 0
    n_cand = int(candidates.sum())
    if n_cand == 0:
        return np.array([], dtype=int), np.zeros(L), {"iterations": 0, "rank_deficient": False}
    s = min(s, n_cand, H)
    safe_norm = np.where(candidates, colnorm, 1.0)

    def corr_scores(resid: np.ndarray) -> np.ndarray:
        sc = np.abs(A.T @ resid) / safe_norm
        sc[~candidates] = -np.inf
        return sc

    def restricted_fit(sup: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
        z, deficient = _lstsq(A[:, sup], y)
        return z, y - A[:, sup] @ z, deficient

    info = {"iterations": 0, "rank_deficient": False}
    if s == n_cand:
        sup = np.flatnonzero(candidates)
        z, _, deficient = restricted_fit(sup)
        info["rank_deficient"] = deficient
        coefs = np.zeros(L)
        coefs[sup] = z
        return sup, coefs, info

    support = np.sort(_top_k(corr_scores(y), s))
    seen = {tuple(support)}
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for it in range(1, max_iters + 1):
        info["iterations"] = it
        z, resid, deficient = restricted_fit(support)
        info["rank_deficient"] = info["rank_deficient"] or deficient
        rnorm = float(np.linalg.norm(resid))
        if best is None or rnorm < best[0]:
            best = (rnorm, support, z)
        merged = np.union1d(support, _top_k(corr_scores(resid), s))
        zm, deficient = _lstsq(A[:, merged], y)
        info["rank_deficient"] = info["rank_deficient"] or deficient
        pruned = np.sort(merged[_top_k(np.abs(zm) * safe_norm[merged], s)])
        if tuple(pruned) in seen:
            zp, residp, deficient = restricted_fit(pruned)
            info["rank_deficient"] = info["rank_deficient"] or deficient
            rp = float(np.linalg.norm(residp))
            if rp < best[0]:
                best = (rp, pruned, zp)
            break
        seen.add(tuple(pruned))
        support = pruned
    else:
        z, resid, deficient = restricted_fit(support)
        info["rank_deficient"] = info["rank_deficient"] or deficient
        rnorm = float(np.linalg.norm(resid))
        if rnorm < best[0]:
            best = (rnorm, support, z)

    rnorm, support, z = best
    info["residual"] = rnorm
    coefs = np.zeros(L)
    coefs[support] = z
    return support, coefs, info


def solve_sparse(sys: WeakSystem, params: SparseSolveParams,
                 col_scale: np.ndarray | None = None) -> tuple[Coefficients, dict]:
    """Sparse coefficient recovery with holdout model selection.

    Columns are divided by ``col_scale`` (the sanitized average leading
    error coefficients) before solving, which improves conditioning without
    changing the selected support.  The sparsity level is swept from 1 to
    s_max; the smallest support whose holdout residual is within
    (1 + parsimony_slack) of the best is kept, refit on all rows, trimmed
    by contribution |a_l| * ||w_l||, and refit once more.
    """
    H, L = sys.n_rows, sys.n_features
    if H < 2:
        raise DimensionMismatch("need at least 2 rows for train/holdout selection")
    scale = np.ones(L) if col_scale is None else np.asarray(col_scale, dtype=np.float64)
    if scale.shape != (L,):
        raise DimensionMismatch("col_scale length must equal the feature count")
    A = sys.W / scale[None, :]
    y = sys.b

    rng = np.random.default_rng(params.seed)
    perm = rng.permutation(H)
    n_hold = min(max(1, round(params.cv_fraction * H)), H - 1)
    hold = np.sort(perm[:n_hold])
    train = np.sort(perm[n_hold:])
    y_hold_norm = float(np.linalg.norm(y[hold]))

    diagnostics: dict = {"holdout_residuals": {}, "flags": []}
    sweeps = {}
    rank_flag = False
    for s in range(1, min(params.s_max, L, len(train)) + 1):
        sup, _, info = subspace_pursuit(A[train], y[train], s, params.max_sp_iters)
        rank_flag = rank_flag or info["rank_deficient"]
        if len(sup) == 0:
            res = 1.0 if y_hold_norm > 0 else 0.0
            sweeps[s] = (res, sup)
            continue
        z, deficient = _lstsq(A[np.ix_(train, sup)], y[train])
        rank_flag = rank_flag or deficient
        r = np.linalg.norm(A[np.ix_(hold, sup)] @ z - y[hold])
        res = float(r / y_hold_norm) if y_hold_norm > 0 else float(r)
        sweeps[s] = (res, sup)
    diagnostics["holdout_residuals"] = {s: r for s, (r, _) in sweeps.items()}
    if not sweeps:
        diagnostics["flags"].append("empty_result")
        return Coefficients(np.zeros(L)), diagnostics

    floored = {s: max(r, params.residual_floor) for s, (r, _) in sweeps.items()}
    best_res = min(floored.values())
    s_star = min(s for s, r in floored.items()
                 if r <= (1 + params.parsimony_slack) * best_res)
    support = sweeps[s_star][1]
    diagnostics["selected_sparsity"] = s_star

    def full_fit(sup: np.ndarray) -> np.ndarray:
        nonlocal rank_flag
        z, deficient = _lstsq(A[:, sup], y)
        rank_flag = rank_flag or deficient
        return z

    z = full_fit(support) if len(support) else np.array([])
    colnorm = np.linalg.norm(A, axis=0)
    contrib = np.abs(z) * colnorm[support] if len(support) else np.array([])
    if contrib.size == 0 or contrib.max() == 0:
        diagnostics["flags"].append("empty_result")
        return Coefficients(np.zeros(L)), diagnostics
    keep = contrib >= params.trim_threshold * contrib.max()
    if not np.all(keep):
        support = support[keep]
        z = full_fit(support)
    if rank_flag:
        diagnostics["flags"].append("rank_deficient")
    diagnostics["support"] = support
    diagnostics["condition_number"] = float(np.linalg.cond(A[:, support]))
    coefs = np.zeros(L)
    coefs[support] = z / scale[support]
    return Coefficients(coefs), diagnostics
