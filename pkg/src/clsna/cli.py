"""Command-line front end: simulate, fit, construct, rerun.

Every run writes a manifest.json (sorted keys, no timestamps) holding the
subcommand, resolved flags, seed, toolkit version, and output file list, so
`clsna rerun --manifest <path> --out <dir>` reproduces it bit for bit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .construct import ThresholdPolicy, binarize, restrict_to_persistent_nodes
from .evaluation import (density_report, in_sample_auc, latent_distance_report,
                         posterior_summary, write_auc_report,
                         write_density_report, write_distance_report,
                         write_posterior_summary)
from .experiments import PARAM_NAMES, derive_seed, run_replicates
from .formats import (ParseError, read_adjacency, read_counts,
                      write_adjacency, write_latents)
from .mcmc import McmcConfig, run_mcmc
from .model import AdjacencySeries, latent_array
from .presets import DESIGNS, get_design
from .selection import fit_changepoint, select_changepoint, write_dic_table
from .simulate import simulate, simulate_changepoint


def _changepoint_list(text: str):
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}") from None


def _candidate_range(text: str):
    try:
        first, last = text.split("..")
        first, last = int(first), int(last)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a range like 4..9, got {text!r}") from None
    if last < first:
        raise argparse.ArgumentTypeError(f"empty candidate range {text!r}")
    return (first, last)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(outdir: Path, subcommand: str, flags: dict, outputs: list):
    doc = {
        "format": "clsna-manifest v1",
        "subcommand": subcommand,
        "flags": flags,
        "outputs": sorted(outputs),
        "toolkit_version": __version__,
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def cmd_simulate(args) -> int:
    design = get_design(args.preset)
    outdir = _outdir(args)
    config = design.sim_config(args.seed)
    if design.has_changepoint:
        y, z, _ = simulate_changepoint(config)
    else:
        y, z = simulate(config)
    write_adjacency(outdir / "series.adj", y, design.labels())
    write_latents(outdir / "latents.latent", latent_array(z))
    flags = {"preset": args.preset, "seed": args.seed}
    _write_manifest(outdir, "simulate", flags,
                    ["series.adj", "latents.latent"])
    print(f"wrote simulated series to {outdir}")
    return 0


def _write_fit_outputs(outdir: Path, samples, y, labels) -> list:
    outdir.mkdir(parents=True, exist_ok=True)
    write_posterior_summary(posterior_summary(samples), outdir / "summary.csv")
    write_auc_report(in_sample_auc(samples, y), outdir / "auc.csv")
    write_density_report(density_report(y, labels), outdir / "density.csv")
    write_distance_report(latent_distance_report(samples.latent_mean, labels),
                          outdir / "distances.csv")
    write_latents(outdir / "latent-mean.latent", samples.latent_mean)
    return ["summary.csv", "auc.csv", "density.csv", "distances.csv",
            "latent-mean.latent"]


def _fit_replicate_worker(path: str, config: McmcConfig, outdir_str: str,
                          replicate: int, base_seed: int) -> dict:
    from dataclasses import replace

    y, labels, _ = read_adjacency(path)
    chain = replace(config, seed=derive_seed(base_seed, replicate))
    samples = run_mcmc(y, labels, config=chain)
    rep_dir = Path(outdir_str) / f"rep-{replicate:02d}"
    _write_fit_outputs(rep_dir, samples, y, labels)
    means = {name: float(getattr(samples, name).mean()) for name in PARAM_NAMES}
    means["overall_auc"] = float(in_sample_auc(samples, y).overall)
    return means


def _write_pooled_summary(rows: list, path: Path):
    names = PARAM_NAMES + ("overall_auc",)
    with open(path, "w") as fh:
        fh.write("# per-chain posterior means pooled across replicate chains; "
                 "sd is across chains\n")
        fh.write("name,mean,sd,n_replicates\n")
        for name in names:
            values = np.array([row[name] for row in rows])
            sd = values.std(ddof=1) if values.size > 1 else 0.0
            fh.write(f"{name},{values.mean()!r},{sd!r},{values.size}\n")


def _period_windows(y: AdjacencySeries, change_times):
    boundaries = (1,) + tuple(change_times) + (y.horizon + 1,)
    return [AdjacencySeries(y.matrices[a - 1:b - 1])
            for a, b in zip(boundaries, boundaries[1:])]


def _write_changepoint_outputs(outdir: Path, fit, y, labels) -> list:
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = ["dic.csv"]
    rows = [(fit.change_times, fit.dic)]
    write_dic_table(rows, outdir / "dic.csv")
    for index, (samples, window) in enumerate(
            zip(fit.periods, _period_windows(y, fit.change_times)), start=1):
        sub = f"period-{index}"
        names = _write_fit_outputs(outdir / sub, samples, window, labels)
        outputs.extend(f"{sub}/{name}" for name in names)
    return outputs


def cmd_fit(args) -> int:
    y, labels, _ = read_adjacency(args.input)
    outdir = _outdir(args)
    config = McmcConfig(n_iterations=args.iterations, burn_in=args.burn_in,
                        thin=args.thin, seed=args.seed, latent_dim=args.dim)
    flags = {"input": str(Path(args.input).resolve()), "seed": args.seed,
             "iterations": args.iterations, "burn_in": args.burn_in,
             "thin": args.thin, "dim": args.dim,
             "changepoint": args.changepoint,
             "select_changepoint": args.select_changepoint,
             "replicates": args.replicates, "jobs": args.jobs}

    if args.replicates > 1:
        if args.changepoint or args.select_changepoint:
            raise ValueError("replicated runs support plain fits only")
        arg_tuples = [(flags["input"], config, str(outdir), r, args.seed)
                      for r in range(args.replicates)]
        rows = run_replicates(_fit_replicate_worker, arg_tuples, args.jobs)
        _write_pooled_summary(rows, outdir / "pooled.csv")
        outputs = ["pooled.csv"]
        for r in range(args.replicates):
            outputs.extend(f"rep-{r:02d}/{name}" for name in
                           ["summary.csv", "auc.csv", "density.csv",
                            "distances.csv", "latent-mean.latent"])
    elif args.select_changepoint is not None:
        first, last = args.select_changepoint
        result = select_changepoint(y, labels, None, config,
                                    [[r] for r in range(first, last + 1)])
        write_dic_table(result.table, outdir / "dic.csv")
        outputs = ["dic.csv"]
        best_outputs = _write_changepoint_outputs(outdir / "best", result.best,
                                                  y, labels)
        outputs.extend(f"best/{name}" for name in best_outputs)
        flags["select_changepoint"] = [first, last]
    elif args.changepoint:
        fit = fit_changepoint(y, labels, None, config, args.changepoint)
        outputs = _write_changepoint_outputs(outdir, fit, y, labels)
    else:
        samples = run_mcmc(y, labels, config=config)
        outputs = _write_fit_outputs(outdir, samples, y, labels)
    _write_manifest(outdir, "fit", flags, outputs)
    print(f"wrote fit outputs to {outdir}")
    return 0


def cmd_construct(args) -> int:
    counts = read_counts(args.input)
    outdir = _outdir(args)
    if args.policy == "static":
        if args.theta is None:
            raise ValueError("--policy static requires --theta")
        policy = ThresholdPolicy(kind="static", theta=args.theta)
    else:
        if args.theta is not None:
            raise ValueError("--theta only applies to --policy static")
        policy = ThresholdPolicy(kind="dynamic-mean")
    if args.restrict_active:
        activity = counts.counts.sum(axis=2) > 0
        counts = restrict_to_persistent_nodes(counts, activity)
    result = binarize(counts, policy)
    write_adjacency(outdir / "series.adj", result.series, counts.labels,
                    counts.node_ids)
    with open(outdir / "thresholds.csv", "w") as fh:
        fh.write("# per-time edge threshold actually applied (strict >)\n")
        fh.write("time,threshold\n")
        for t, theta in enumerate(result.thresholds, start=1):
            fh.write(f"{t},{theta!r}\n")
    flags = {"input": str(Path(args.input).resolve()), "policy": args.policy,
             "theta": args.theta, "restrict_active": args.restrict_active}
    _write_manifest(outdir, "construct", flags,
                    ["series.adj", "thresholds.csv"])
    print(f"wrote constructed series to {outdir}")
    return 0


_HANDLERS = {"simulate": cmd_simulate, "fit": cmd_fit, "construct": cmd_construct}

_FLAG_DEFAULTS = {
    "simulate": {},
    "fit": {"changepoint": None, "select_changepoint": None,
            "replicates": 1, "jobs": 1},
    "construct": {},
}


def cmd_rerun(args) -> int:
    with open(args.manifest) as fh:
        doc = json.load(fh)
    subcommand = doc.get("subcommand")
    if subcommand not in _HANDLERS:
        raise ValueError(f"manifest names unknown subcommand {subcommand!r}")
    flags = dict(_FLAG_DEFAULTS[subcommand])
    flags.update(doc["flags"])
    if subcommand == "fit" and flags.get("select_changepoint"):
        flags["select_changepoint"] = tuple(flags["select_changepoint"])
    namespace = argparse.Namespace(out=args.out, **flags)
    return _HANDLERS[subcommand](namespace)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clsna",
        description="simulation and Bayesian fitting of two-group coevolving "
                    "latent space networks")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sim = sub.add_parser("simulate", help="simulate a series from a preset")
    sim.add_argument("--preset", required=True, choices=sorted(DESIGNS),
                     help="experiment design to simulate")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default="clsna-simulate-out")
    sim.set_defaults(handler=cmd_simulate)

    fit = sub.add_parser("fit", help="fit the model to an adjacency series")
    fit.add_argument("--input", required=True, help="series file (clsna-adj)")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--iterations", type=int, default=50_000)
    fit.add_argument("--burn-in", type=int, default=15_000, dest="burn_in")
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--dim", type=int, default=2, help="latent dimension")
    group = fit.add_mutually_exclusive_group()
    group.add_argument("--changepoint", type=_changepoint_list, default=None,
                       help="comma-separated change times, e.g. 6 or 4,7")
    group.add_argument("--select-changepoint", type=_candidate_range,
                       default=None, metavar="A..B",
                       help="try each single change time in A..B, pick by DIC")
    fit.add_argument("--replicates", type=int, default=1,
                     help="independent chains on the same series")
    fit.add_argument("--jobs", type=int, default=1,
                     help="processes for replicate chains")
    fit.add_argument("--out", default="clsna-fit-out")
    fit.set_defaults(handler=cmd_fit)

    con = sub.add_parser("construct",
                         help="threshold interaction counts into networks")
    con.add_argument("--input", required=True, help="counts file (clsna-counts)")
    con.add_argument("--policy", required=True,
                     choices=["static", "dynamic-mean"])
    con.add_argument("--theta", type=float, default=None,
                     help="static threshold value (strict >)")
    con.add_argument("--restrict-active", action="store_true",
                     help="drop nodes with zero interactions at any time")
    con.add_argument("--out", default="clsna-construct-out")
    con.set_defaults(handler=cmd_construct)

    rer = sub.add_parser("rerun", help="re-execute a run from its manifest")
    rer.add_argument("--manifest", required=True)
    rer.add_argument("--out", default="clsna-rerun-out")
    rer.set_defaults(handler=cmd_rerun)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
