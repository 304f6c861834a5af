"""Command-line interface: run searches, verify and analyze polytope files,
plot run reports and export repository snapshots."""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import detect_prismatoid, pca_scale_profile, verification_report
from .errors import PolyhopError
from .orchestrator import RunConfig, run_scenario
from .polytope import load_polytope, save_polytope
from .repository import read_snapshot


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="polyhop",
                                     description="polytope search and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a search scenario")
    p_run.add_argument("--config", required=True, help="JSON run configuration")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--agents", type=int, default=None)
    p_run.add_argument("--brain", default=None, help="scoring endpoint address")
    p_run.add_argument("--stop-on-first", action="store_true", default=None)
    p_run.add_argument("--output", default=None, help="output directory")

    p_verify = sub.add_parser("verify", help="exact verification report for a polytope file")
    p_verify.add_argument("path")
    p_verify.add_argument("--defect-convention", default="deck-nodes",
                          choices=["deck-nodes", "deck-neighbours"])

    p_pca = sub.add_parser("analyze-pca", help="deck scale profile of a prismatoid file")
    p_pca.add_argument("path")

    p_plot = sub.add_parser("plot", help="plot a run report")
    p_plot.add_argument("report")
    p_plot.add_argument("--out", default=None, help="output image path")

    p_export = sub.add_parser("export", help="export the best entries of a snapshot")
    p_export.add_argument("--repo", required=True, help="repository snapshot file")
    p_export.add_argument("--best", type=int, default=1, help="how many entries")
    p_export.add_argument("--out", default="best", help="output file prefix")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except PolyhopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        config = RunConfig.from_file(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.agents is not None:
            config.agents = args.agents
        if args.brain is not None:
            config.brain = args.brain
        if args.stop_on_first:
            config.stop_on_first = True
        if args.output is not None:
            config.output_dir = args.output
        report = run_scenario(config)
        payload = report.to_json()
        print(json.dumps(payload, indent=2, sort_keys=True))
        best = payload["best"]
        if best:
            print(f"# best scalar {best['scalar']} on n={best['n']} "
                  f"(target met: {best['targetMet']})", file=sys.stderr)
        return 0

    if args.command == "verify":
        P = load_polytope(args.path)
        report = verification_report(P, args.defect_convention)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0

    if args.command == "analyze-pca":
        P = load_polytope(args.path)
        profile = pca_scale_profile(detect_prismatoid(P))
        print(json.dumps(
            {"eigenMin": profile.eigen_min, "eigenMax": profile.eigen_max,
             "ratio": profile.ratio},
            indent=2, sort_keys=True,
        ))
        return 0

    if args.command == "plot":
        return _plot(args.report, args.out)

    if args.command == "export":
        entries = read_snapshot(args.repo)
        entries.sort(key=lambda pair: float(pair[0].get("scalar", "-inf")), reverse=True)
        for rank, (meta, P) in enumerate(entries[: args.best]):
            path = f"{args.out}_{rank}.txt"
            save_polytope(P, path)
            print(f"{path}: n={P.n} d={P.d} scalar={meta.get('scalar')}")
        return 0

    raise ValueError(f"unhandled command {args.command}")


def _plot(report_path, out_path) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(report_path) as fh:
        report = json.load(fh)
    trajectory = report.get("bestTrajectory", [])
    if not trajectory:
        print("report has no trajectory to plot", file=sys.stderr)
        return 1
    hops = [t[0] for t in trajectory]
    sizes = [t[1] for t in trajectory]
    scalars = [t[2] for t in trajectory]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.step(hops, scalars, where="post")
    ax1.set_xlabel("hop")
    ax1.set_ylabel("best fitness")
    ax1.set_title("best fitness trajectory")
    ax2.step(hops, sizes, where="post", color="tab:orange")
    ax2.set_xlabel("hop")
    ax2.set_ylabel("vertex count")
    ax2.set_title("vertex count of the best polytope")
    for hop, _gen, _n in report.get("ascensions", []):
        ax1.axvline(hop, color="tab:red", linestyle=":", alpha=0.7)
    fig.tight_layout()
    target = out_path or report_path.replace(".json", "") + ".png"
    fig.savefig(target, dpi=120)
    print(target)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
