"""Support/coefficient scoring and the multi-trial noise-sweep harness.

A benchmark simulates one clean trajectory per equation, then for every
noise level and trial adds seeded Gaussian noise, runs the identification
pipeline and scores the recovered coefficients against the ground truth.
Trials are independent work units keyed by (level index, trial index); the
emitted tables are byte-identical regardless of worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import FormatError, ZeroTruth
from .grid import Dataset, NoiseSpec, add_noise
from .identify import VotingConfig, identify
from .library import Coefficients, FeatureLibrary, build_library, default_library, \
    true_coefficients
from .sim import default_spec, simulate
from .solver import SparseSolveParams
from .testfn import TestFunctionGrid, default_placement, place_uniform
from .weighting import default_reference_set, uniform_reference_set

BENCH_MAGIC = "IDENTWV-BENCH v1"

TRIAL_FIELDS = ("equation", "level", "trial", "seed", "tpr", "ppv", "e2", "flags")
SUMMARY_FIELDS = ("equation", "level", "mean_tpr", "std_tpr", "mean_ppv", "std_ppv",
                  "mean_e2", "std_e2", "n")


@dataclass(frozen=True)
class Score:
    """Support recall (tpr), support precision (ppv) and relative l2 error."""

    tpr: float
    ppv: float
    e2: float
    flags: tuple[str, ...] = ()


def score(truth: Coefficients, recovered: Coefficients) -> Score:
    """Score a recovered coefficient vector against the ground truth.

    An empty recovered support is reported with ppv = 0 and the
    ``empty_recovery`` flag rather than a division by zero.
    """
    if len(truth) != len(recovered):
        raise ValueError("coefficient vectors must have equal length")
    true_sup = set(truth.support.tolist())
    if not true_sup:
        raise ZeroTruth("truth vector has empty support")
    rec_sup = set(recovered.support.tolist())
    hits = len(true_sup & rec_sup)
    tpr = hits / len(true_sup)
    flags: tuple[str, ...] = ()
    if rec_sup:
        ppv = hits / len(rec_sup)
    else:
        ppv, flags = 0.0, ("empty_recovery",)
    e2 = float(np.linalg.norm(truth.values - recovered.values)
               / np.linalg.norm(truth.values))
    return Score(tpr, ppv, e2, flags)


@dataclass(frozen=True)
class BenchConfig:
    """Everything a noise sweep needs; unset overrides fall back to the
    per-equation and per-module defaults, which are echoed in the output."""

    equation: str
    omega: int = 2
    levels: tuple[float, ...] = (0.0,)
    trials: int = 20
    base_seed: int = 0
    refs: str = "default"
    alpha_max: int | None = None
    beta_max: int | None = None
    rho: float = 0.25
    v: float = 0.05
    s_max: int = 8
    cv_fraction: float = 0.3
    trim_threshold: float = 0.05
    n_x: int | None = None
    n_y: int | None = None
    n_t: int | None = None
    t_max: float | None = None
    oversample_x: int | None = None
    oversample_t: int | None = None
    tf_halfwidth_x: int | None = None
    tf_halfwidth_t: int | None = None
    tf_stride_x: int | None = None
    tf_stride_t: int | None = None
    tf_order_x: int | None = None
    tf_order_t: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(l < 0 for l in self.levels):
            raise ValueError("noise levels must be nonnegative")
        if self.refs not in ("default", "uniform"):
            raise ValueError("refs must be 'default' or 'uniform'")
        object.__setattr__(self, "levels", tuple(float(l) for l in self.levels))


def trial_seed(base_seed: int, level_idx: int, trial_idx: int) -> int:
    """Deterministic per-trial seed: base xor an injective index mix."""
    return (base_seed ^ (1000003 * level_idx + 1009 * trial_idx + 101)) & 0x7FFFFFFF


def _build_problem(cfg: BenchConfig) -> tuple[Dataset, FeatureLibrary, TestFunctionGrid, list]:
    overrides = {}
    if cfg.t_max is not None:
        overrides["t_max"] = cfg.t_max
    if cfg.n_t is not None:
        overrides["n_t"] = cfg.n_t
    if cfg.oversample_x is not None:
        overrides["oversample_x"] = cfg.oversample_x
    if cfg.oversample_t is not None:
        overrides["oversample_t"] = cfg.oversample_t
    spec = default_spec(cfg.equation, cfg.omega)
    if cfg.n_x is not None:
        n_y = cfg.n_y if cfg.n_y is not None else cfg.n_x
        overrides["n_x"] = (cfg.n_x,) if len(spec.n_x) == 1 else (cfg.n_x, n_y)
    if overrides:
        spec = default_spec(cfg.equation, cfg.omega, **overrides)
    clean = simulate(spec)
    dims = clean.grid.spatial_dims
    if cfg.alpha_max is None and cfg.beta_max is None:
        library = default_library(dims)
    else:
        base = default_library(dims)
        library = build_library(cfg.alpha_max if cfg.alpha_max is not None else base.alpha_max,
                                cfg.beta_max if cfg.beta_max is not None else base.beta_max,
                                dims)
    if any(v is not None for v in (cfg.tf_halfwidth_x, cfg.tf_halfwidth_t, cfg.tf_stride_x,
                                   cfg.tf_stride_t, cfg.tf_order_x, cfg.tf_order_t)):
        dflt = default_placement(clean.grid, library.alpha_max)
        m_x = cfg.tf_halfwidth_x if cfg.tf_halfwidth_x is not None else dflt.halfwidth_cells[0]
        m_t = cfg.tf_halfwidth_t if cfg.tf_halfwidth_t is not None else dflt.halfwidth_cells[-1]
        s_x = cfg.tf_stride_x
        s_t = cfg.tf_stride_t
        p_x = cfg.tf_order_x if cfg.tf_order_x is not None else dflt.orders[0]
        p_t = cfg.tf_order_t if cfg.tf_order_t is not None else dflt.orders[-1]
        tfs = place_uniform(clean.grid, m_x, m_t, s_x, s_t, p_x, p_t)
    else:
        tfs = default_placement(clean.grid, library.alpha_max)
    refs = default_reference_set(dims) if cfg.refs == "default" else uniform_reference_set(dims)
    return clean, library, tfs, refs


def _run_trial(clean: Dataset, library: FeatureLibrary, tfs: TestFunctionGrid,
               refs: list, cfg: BenchConfig, truth: Coefficients,
               level: float, seed: int) -> tuple[float, float, float, str]:
    try:
        noisy = add_noise(clean, NoiseSpec(level, seed))
        params = SparseSolveParams(s_max=cfg.s_max, cv_fraction=cfg.cv_fraction,
                                   trim_threshold=cfg.trim_threshold, seed=seed)
        result = identify(noisy, library, tfs, refs=refs, solver_params=params,
                          voting=VotingConfig(cfg.rho, cfg.v))
        sc = score(truth, result.coefficients)
        flags = ";".join(sc.flags + tuple(result.flags))
        return sc.tpr, sc.ppv, sc.e2, flags
    except Exception as exc:  # recorded per-trial, never aborts the sweep
        return float("nan"), float("nan"), float("nan"), f"error:{type(exc).__name__}"


def _trial_star(args):
    return _run_trial(*args)


def run_benchmark(cfg: BenchConfig, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Run the noise sweep; returns (trial rows, per-level summary rows).

    The clean trajectory is simulated once and shared across all trials;
    only the noise and solver seeds vary.  Rows are keyed and sorted by
    (level index, trial index), so results do not depend on scheduling.
    """
    clean, library, tfs, refs = _build_problem(cfg)
    truth = true_coefficients(cfg.equation, library)

    tasks = []
    for li, level in enumerate(cfg.levels):
        for ti in range(cfg.trials):
            tasks.append((li, ti, level, trial_seed(cfg.base_seed, li, ti)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(
                _trial_star,
                [(clean, library, tfs, refs, cfg, truth, level, seed)
                 for (_, _, level, seed) in tasks],
                chunksize=1))
    else:
        outcomes = [_run_trial(clean, library, tfs, refs, cfg, truth, level, seed)
                    for (_, _, level, seed) in tasks]

    rows = []
    for (li, ti, level, seed), (tpr, ppv, e2, flags) in zip(tasks, outcomes):
        rows.append({"equation": cfg.equation, "level": level, "trial": ti,
                     "seed": seed, "tpr": tpr, "ppv": ppv, "e2": e2, "flags": flags,
                     "_key": (li, ti)})
    rows.sort(key=lambda r: r["_key"])
    for r in rows:
        del r["_key"]

    summary = []
    for li, level in enumerate(cfg.levels):
        lv = [r for r in rows if r["level"] == level]
        stats = {}
        for m in ("tpr", "ppv", "e2"):
            vals = np.array([r[m] for r in lv])
            ok = vals[~np.isnan(vals)]
            stats[f"mean_{m}"] = float(ok.mean()) if ok.size else float("nan")
            stats[f"std_{m}"] = float(ok.std(ddof=1)) if ok.size > 1 else 0.0
        n_ok = int(np.sum(~np.isnan([r["tpr"] for r in lv])))
        summary.append({"equation": cfg.equation, "level": level, **stats, "n": n_ok})
    return rows, summary


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)  # shortest representation that round-trips
    return str(v)


def write_csv(rows: list[dict], fieldnames: tuple[str, ...], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for r in rows:
            writer.writerow([_fmt_cell(r[k]) for k in fieldnames])


def read_summary_csv(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for r in reader:
            row = dict(r)
            for k in row:
                if k not in ("equation", "flags"):
                    row[k] = float(row[k])
            rows.append(row)
    return rows


# Benchmark config file: the BENCH_MAGIC header line followed by key=value
# lines; ``levels`` is a comma-separated list.  Unset keys keep defaults.

_LIST_KEYS = {"levels"}
_STR_KEYS = {"equation", "refs"}
_FLOAT_KEYS = {"rho", "v", "cv_fraction", "trim_threshold", "t_max"}


def parse_bench_config(path: str) -> BenchConfig:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != BENCH_MAGIC:
        raise FormatError(f"not a bench config (expected header {BENCH_MAGIC!r})")
    known = {f.name for f in fields(BenchConfig)}
    kwargs: dict = {}
    for line in lines[1:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"malformed config line: {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in known:
            raise FormatError(f"unknown config key: {k!r}")
        if k in _LIST_KEYS:
            kwargs[k] = tuple(float(s) for s in v.split(",") if s.strip())
        elif k in _STR_KEYS:
            kwargs[k] = v
        elif k in _FLOAT_KEYS:
            kwargs[k] = float(v)
        else:
            kwargs[k] = int(v)
    if "equation" not in kwargs:
        raise FormatError("config must set 'equation'")
    return BenchConfig(**kwargs)
