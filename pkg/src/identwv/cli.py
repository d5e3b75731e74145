"""Command-line entry point: simulate / identify / bench / plot.

Every run writes a manifest next to its output echoing the fully resolved
configuration, so results can be reproduced from the files alone.  Exit
codes: 0 success, 1 runtime error (one machine-parsable line on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .bench import BenchConfig, SUMMARY_FIELDS, TRIAL_FIELDS, parse_bench_config, \
    read_summary_csv, run_benchmark, write_csv
from .errors import IdentWVError
from .grid import NoiseSpec, add_noise, load_dataset, save_dataset
from .identify import VotingConfig, format_pde, identify
from .library import EQUATION_IDS, build_library, default_library
from .plots import emit_metric_plots, emit_plot
from .sim import default_spec, simulate
from .solver import SparseSolveParams
from .testfn import default_placement, place_uniform

MANIFEST_MAGIC = "IDENTWV-MANIFEST v1"


def write_manifest(path: str, entries: dict) -> None:
    with open(path, "w") as fh:
        fh.write(MANIFEST_MAGIC + "\n")
        for k in sorted(entries):
            fh.write(f"{k}={entries[k]}\n")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="identwv",
                                description="PDE identification from a single noisy "
                                            "trajectory by weighted weak forms with voting")
    p.add_argument("--version", action="version", version=f"identwv {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a clean benchmark trajectory")
    sim.add_argument("--equation", required=True, choices=EQUATION_IDS)
    sim.add_argument("--omega", type=int, default=2,
                     help="initial-condition frequency (ignored by kdv/ks/pm2d)")
    sim.add_argument("--out", required=True)
    sim.add_argument("--nx", type=int)
    sim.add_argument("--ny", type=int)
    sim.add_argument("--nt", type=int)
    sim.add_argument("--tmax", type=float)
    sim.add_argument("--oversample-x", type=int, dest="oversample_x")
    sim.add_argument("--oversample-t", type=int, dest="oversample_t")

    ident = sub.add_parser("identify", help="identify the governing PDE of a dataset")
    ident.add_argument("--in", dest="infile", required=True)
    ident.add_argument("--out", help="result file (default: <in>.result)")
    ident.add_argument("--nsr", type=float, default=0.0,
                       help="add Gaussian noise at this noise-to-signal ratio first")
    ident.add_argument("--seed", type=int, default=0)
    ident.add_argument("--alpha-max", type=int, dest="alpha_max")
    ident.add_argument("--beta-max", type=int, dest="beta_max")
    ident.add_argument("--include-constant", action="store_true")
    ident.add_argument("--tf-halfwidth-x", type=int, dest="tf_halfwidth_x")
    ident.add_argument("--tf-halfwidth-t", type=int, dest="tf_halfwidth_t")
    ident.add_argument("--tf-stride-x", type=int, dest="tf_stride_x")
    ident.add_argument("--tf-stride-t", type=int, dest="tf_stride_t")
    ident.add_argument("--tf-order-x", type=int, dest="tf_order_x")
    ident.add_argument("--tf-order-t", type=int, dest="tf_order_t")
    ident.add_argument("--rho", type=float, default=0.25)
    ident.add_argument("--v", type=float, default=0.05, dest="v_thresh")
    ident.add_argument("--s-max", type=int, default=8, dest="s_max")
    ident.add_argument("--cv-fraction", type=float, default=0.3, dest="cv_fraction")
    ident.add_argument("--trim-threshold", type=float, default=0.05, dest="trim_threshold")
    ident.add_argument("--refs", choices=("default", "uniform"), default="default")
    ident.add_argument("--dump-indicators", dest="dump_indicators",
                       help="directory for per-reference indicator matrices")
    ident.add_argument("--dump-system", dest="dump_system",
                       help="write the assembled W and b to this file")
    ident.add_argument("--verbose", action="store_true")

    bench = sub.add_parser("bench", help="run a multi-trial noise sweep")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True, help="output directory")
    bench.add_argument("--jobs", type=int, default=1)

    plot = sub.add_parser("plot", help="render summary CSVs as error-bar figures")
    plot.add_argument("--in", dest="infiles", action="append", required=True)
    plot.add_argument("--label", dest="labels", action="append", default=None)
    plot.add_argument("--metric", choices=("tpr", "ppv", "e2"), default="e2")
    plot.add_argument("--out", required=True)
    return p


def _cmd_simulate(args) -> int:
    overrides = {}
    if args.nx is not None:
        base = default_spec(args.equation)
        overrides["n_x"] = (args.nx,) if len(base.n_x) == 1 \
            else (args.nx, args.ny if args.ny is not None else args.nx)
    for key, val in (("n_t", args.nt), ("t_max", args.tmax),
                     ("oversample_x", args.oversample_x),
                     ("oversample_t", args.oversample_t)):
        if val is not None:
            overrides[key] = val
    spec = default_spec(args.equation, args.omega, **overrides)
    dataset = simulate(spec)
    save_dataset(dataset, args.out)
    write_manifest(args.out + ".manifest", {
        "command": "simulate", "equation": spec.equation, "omega": spec.omega,
        "n_x": spec.n_x[0], "n_y": spec.n_x[1] if len(spec.n_x) > 1 else "",
        "n_t": spec.n_t, "t_max": repr(spec.t_max),
        "x_min": repr(spec.x_min[0]), "x_max": repr(spec.x_max[0]),
        "oversample_x": spec.oversample_x, "oversample_t": spec.oversample_t,
        "out": args.out,
    })
    print(f"wrote {args.out} ({spec.equation}, grid "
          f"{'x'.join(str(n) for n in spec.n_x)}x{spec.n_t})")
    return 0


def _make_placement(grid, library, args):
    dflt = default_placement(grid, library.alpha_max)
    override = any(getattr(args, k) is not None for k in
                   ("tf_halfwidth_x", "tf_halfwidth_t", "tf_stride_x",
                    "tf_stride_t", "tf_order_x", "tf_order_t"))
    if not override:
        return dflt
    m_x = args.tf_halfwidth_x if args.tf_halfwidth_x is not None else dflt.halfwidth_cells[0]
    m_t = args.tf_halfwidth_t if args.tf_halfwidth_t is not None else dflt.halfwidth_cells[-1]
    p_x = args.tf_order_x if args.tf_order_x is not None else dflt.orders[0]
    p_t = args.tf_order_t if args.tf_order_t is not None else dflt.orders[-1]
    return place_uniform(grid, m_x, m_t, args.tf_stride_x, args.tf_stride_t, p_x, p_t)


def _cmd_identify(args) -> int:
    dataset = load_dataset(args.infile)
    if args.nsr > 0:
        dataset = add_noise(dataset, NoiseSpec(args.nsr, args.seed))
    dims = dataset.grid.spatial_dims
    if args.alpha_max is None and args.beta_max is None and not args.include_constant:
        library = default_library(dims)
    else:
        base = default_library(dims)
        library = build_library(args.alpha_max if args.alpha_max is not None else base.alpha_max,
                                args.beta_max if args.beta_max is not None else base.beta_max,
                                dims, include_constant=args.include_constant)
    tfs = _make_placement(dataset.grid, library, args)
    from .weighting import default_reference_set, uniform_reference_set
    refs = default_reference_set(dims) if args.refs == "default" else uniform_reference_set(dims)
    params = SparseSolveParams(s_max=args.s_max, cv_fraction=args.cv_fraction,
                               trim_threshold=args.trim_threshold, seed=args.seed)
    voting = VotingConfig(args.rho, args.v_thresh)
    result = identify(dataset, library, tfs, refs=refs, solver_params=params, voting=voting)

    print(format_pde(library, result.coefficients))
    if args.verbose:
        for ref in result.diagnostics["per_reference"]:
            print(f"# {ref['reference']}: sparsity {ref.get('selected_sparsity')}, "
                  f"holdout residuals {ref['holdout_residuals']}", file=sys.stderr)

    out = args.out if args.out else args.infile + ".result"
    config_echo = {
        "command": "identify", "in": args.infile, "nsr": repr(args.nsr),
        "seed": args.seed, "alpha_max": library.alpha_max, "beta_max": library.beta_max,
        "include_constant": int(library.include_constant),
        "tf_halfwidth": ",".join(str(m) for m in tfs.halfwidth_cells),
        "tf_stride": ",".join(str(s) for s in tfs.strides),
        "tf_order": ",".join(str(p) for p in tfs.orders),
        "rho": repr(voting.rho), "v": repr(voting.v),
        "s_max": params.s_max, "cv_fraction": repr(params.cv_fraction),
        "trim_threshold": repr(params.trim_threshold), "refs": args.refs,
        "n_test_functions": tfs.size, "n_features": library.size,
    }
    with open(out, "w") as fh:
        fh.write("IDENTWV-RESULT v1\n")
        for k in sorted(config_echo):
            fh.write(f"{k}={config_echo[k]}\n")
        fh.write(f"flags={';'.join(result.flags)}\n")
        fh.write(f"equation={format_pde(library, result.coefficients)}\n")
        fh.write("table\n")
        fh.write("feature occurrence avg_magnitude coefficient\n")
        for l, feat in enumerate(library.features):
            fh.write(f"{feat.name} {repr(float(result.occurrence[l]))} "
                     f"{repr(float(result.avg_magnitude[l]))} "
                     f"{repr(float(result.coefficients.values[l]))}\n")
    write_manifest(out + ".manifest", config_echo)

    if args.dump_indicators:
        os.makedirs(args.dump_indicators, exist_ok=True)
        counts = tfs.center_counts
        for ref, ind in zip(result.diagnostics["per_reference"],
                            result.diagnostics["indicators"]):
            name = ref["reference"].replace("(", "").replace(")", "") \
                .replace("^", "").replace("{", "").replace("}", "")
            mat = np.asarray(ind).reshape(-1, counts[-1])
            np.savetxt(os.path.join(args.dump_indicators, f"indicator_{name}.txt"), mat)
    if args.dump_system:
        from .weak import assemble
        sys_ = assemble(dataset, library, tfs)
        with open(args.dump_system, "w") as fh:
            fh.write(f"# W ({sys_.n_rows} x {sys_.n_features}) then b\n")
            np.savetxt(fh, sys_.W)
            np.savetxt(fh, sys_.b[None, :])
    return 0


def _cmd_bench(args) -> int:
    cfg = parse_bench_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    rows, summary = run_benchmark(cfg, jobs=max(1, args.jobs))
    trials_path = os.path.join(args.out, "trials.csv")
    summary_path = os.path.join(args.out, "summary.csv")
    write_csv(rows, TRIAL_FIELDS, trials_path)
    write_csv(summary, SUMMARY_FIELDS, summary_path)
    figures = emit_metric_plots([(cfg.equation, summary)], args.out)
    manifest = {f"cfg_{k}": v for k, v in vars(cfg).items()}
    manifest.update({"command": "bench", "jobs": max(1, args.jobs),
                     "trials_csv": trials_path, "summary_csv": summary_path,
                     "figures": ",".join(figures)})
    write_manifest(os.path.join(args.out, "manifest.txt"), manifest)
    print(f"wrote {trials_path}, {summary_path} and {len(figures)} figures")
    return 0


def _cmd_plot(args) -> int:
    labels = args.labels or []
    tables = []
    for i, path in enumerate(args.infiles):
        label = labels[i] if i < len(labels) else os.path.splitext(os.path.basename(path))[0]
        tables.append((label, read_summary_csv(path)))
    emit_plot(tables, args.metric, args.out)
    write_manifest(args.out + ".manifest", {
        "command": "plot", "metric": args.metric,
        "inputs": ",".join(args.infiles), "out": args.out,
    })
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "identify":
            return _cmd_identify(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "plot":
            return _cmd_plot(args)
        parser.error(f"unknown command {args.command!r}")
    except IdentWVError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
