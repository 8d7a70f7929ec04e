"""Experiment front-end: run policy x seed grids, validate scenarios, and
aggregate traces into summary JSON and boxplot CSV.

Default output directory comes from MLVSIM_OUT_DIR (falling back to ./out).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import engine, io, metrics, scenario as scen


def _load_scenario(args):
    if getattr(args, "preset", None):
        if args.preset not in scen.PRESETS:
            raise scen.InvalidScenario(
                [f"unknown preset {args.preset!r}; available: "
                 f"{sorted(scen.PRESETS)}"])
        events = getattr(args, "events", None) or 1_000_000
        scenario = scen.PRESETS[args.preset](events=events)
    elif getattr(args, "scenario", None):
        scenario = scen.load(args.scenario)
        if getattr(args, "events", None):
            raw = scenario.canonical()
            raw["horizon"] = {"events": args.events}
            scenario = scen.from_dict(raw)
    else:
        raise scen.InvalidScenario(["one of --scenario/--preset is required"])
    if getattr(args, "curve_mode", None):
        raw = scenario.canonical()
        raw["curve_mode"] = args.curve_mode
        scenario = scen.from_dict(raw)
    return scenario


def _run_one(raw_scenario, policy_name, seed, out_dir):
    """One (policy, seed) run; writes its artifacts and returns a status."""
    try:
        scenario = scen.from_dict(raw_scenario)
        result = engine.run_simulation(scenario, policy_name, seed)
        io.write_trace(os.path.join(out_dir,
                                    io.trace_filename(policy_name, seed)),
                       result.records)
        io.write_policy_log(
            os.path.join(out_dir, io.policy_log_filename(policy_name, seed)),
            result.policy_log)
        if result.qtable is not None:
            result.qtable.save(
                os.path.join(out_dir, io.qtable_filename(policy_name, seed)))
        return policy_name, seed, None
    except Exception as exc:  # noqa: BLE001 - reported per run pair
        return policy_name, seed, f"{type(exc).__name__}: {exc}"


def _record_objectives(rows):
    return metrics.objectives(rows).as_dict()


def aggregate(out_dir, scenario, policies, seeds):
    """Single-threaded final pass: re-read every trace, build summary.json
    and boxplot.csv."""
    summary = {"scenario": scenario.name,
               "scenario_sha256": scenario.digest(),
               "policies": {}}
    box_rows = []
    for policy in policies:
        per_seed = {}
        pooled = {}  # app_class -> list of totals
        o_means = {"o1": [], "o2": [], "o3": []}
        class_means = {}
        for seed in seeds:
            rows = io.read_trace(
                os.path.join(out_dir, io.trace_filename(policy, seed)))
            if not rows:
                continue
            obj = metrics.objectives(rows)
            per_seed[str(seed)] = obj.as_dict()
            o_means["o1"].append(obj.o1_mean_delay_ms)
            o_means["o2"].append(obj.o2_mean_accuracy)
            o_means["o3"].append(obj.o3_mean_stability)
            for cls, stats in obj.per_app_class.items():
                bucket = class_means.setdefault(
                    cls, {"o1": [], "o2": [], "o3": []})
                bucket["o1"].append(stats["o1_mean_delay_ms"])
                bucket["o2"].append(stats["o2_mean_accuracy"])
                bucket["o3"].append(stats["o3_mean_stability"])
            for row in rows:
                pooled.setdefault(row.app_class, []).append(row.total_ms)

        entry = {"per_seed": per_seed}
        if len(o_means["o1"]) >= 2:
            entry["ci"] = {k: metrics.confidence_interval(v, 0.98).as_dict()
                           for k, v in o_means.items()}
            entry["per_app_class_ci"] = {
                cls: {k: metrics.confidence_interval(v, 0.98).as_dict()
                      for k, v in bucket.items()}
                for cls, bucket in class_means.items()}
        summary["policies"][policy] = entry

        for cls in sorted(pooled):
            stats = metrics.boxplot_stats(pooled[cls])
            box_rows.append((policy, cls, stats))

    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    boxplot_path = os.path.join(out_dir, "boxplot.csv")
    with open(boxplot_path, "w") as fh:
        fh.write("policy,app_class,n,mean,stddev,median,q1,q3,"
                 "whisker_low,whisker_high,outlier_count\n")
        for policy, cls, s in box_rows:
            fh.write(f"{policy},{cls},{s.n},{s.mean!r},{s.stddev!r},"
                     f"{s.median!r},{s.q1!r},{s.q3!r},{s.whisker_low!r},"
                     f"{s.whisker_high!r},{s.outlier_count}\n")
    return summary


def cmd_run(args):
    scenario = _load_scenario(args)
    out_dir = args.out or os.environ.get("MLVSIM_OUT_DIR", "out")
    policies = (args.policies.split(",") if args.policies
                else sorted(scenario.policies))
    seeds = ([int(s) for s in args.seeds.split(",")] if args.seeds
             else scenario.seeds)

    if os.path.isdir(out_dir) and os.listdir(out_dir) and not args.overwrite:
        print(f"error: output directory {out_dir!r} is not empty "
              "(use --overwrite)", file=sys.stderr)
        return 2
    os.makedirs(out_dir, exist_ok=True)

    scenario.save(os.path.join(out_dir, "scenario.yaml"))
    manifest = {
        "scenario": scenario.name,
        "scenario_sha256": scenario.digest(),
        "policies": policies,
        "seeds": seeds,
        "package_version": _version(),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    raw = scenario.canonical()
    jobs = [(raw, policy, seed, out_dir)
            for policy in policies for seed in seeds]
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(_run_one_star, jobs))
    else:
        results = [_run_one(*job) for job in jobs]

    failures = [(p, s, err) for p, s, err in results if err]
    for policy, seed, err in failures:
        print(f"FAILED ({policy}, seed {seed}): {err}", file=sys.stderr)
    ok_policies = [p for p in policies
                   if not any(fp == p for fp, _, _ in failures)]
    aggregate(out_dir, scenario, ok_policies, seeds)
    print(f"wrote {len(jobs) - len(failures)}/{len(jobs)} runs to {out_dir}")
    return 1 if failures else 0


def _run_one_star(job):
    return _run_one(*job)


def cmd_validate(args):
    try:
        scenario = _load_scenario(args)
    except scen.InvalidScenario as exc:
        for diag in exc.diagnostics:
            print(f"error: {diag}", file=sys.stderr)
        return 1
    for warning in scen.semantic_warnings(scenario):
        print(f"warning: {warning}", file=sys.stderr)
    print(f"ok: scenario {scenario.name!r} "
          f"(sha256 {scenario.digest()[:12]})")
    return 0


def _manifest_context(out_dir):
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    scenario = scen.load(os.path.join(out_dir, "scenario.yaml"))
    return manifest, scenario


def cmd_summarize(args):
    out_dir = args.out or os.environ.get("MLVSIM_OUT_DIR", "out")
    manifest, scenario = _manifest_context(out_dir)
    aggregate(out_dir, scenario, manifest["policies"], manifest["seeds"])
    print(f"re-aggregated {out_dir}/summary.json and boxplot.csv")
    return 0


def cmd_plot_data(args):
    out_dir = args.out or os.environ.get("MLVSIM_OUT_DIR", "out")
    path = os.path.join(out_dir, "boxplot.csv")
    if not os.path.exists(path):
        manifest, scenario = _manifest_context(out_dir)
        aggregate(out_dir, scenario, manifest["policies"], manifest["seeds"])
    with open(path) as fh:
        sys.stdout.write(fh.read())
    return 0


def _version():
    try:
        from importlib.metadata import version
        return version("mlvsim")
    except Exception:
        return "unknown"


def _add_scenario_args(parser):
    parser.add_argument("--scenario", help="scenario YAML file")
    parser.add_argument("--preset", help="bundled scenario name (paper-s5)")
    parser.add_argument("--events", type=int,
                        help="override the event-count horizon")
    parser.add_argument("--curve-mode", choices=["geometric", "percent-step"],
                        help="override the attribute-curve mode")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mlvsim",
        description="discrete-event simulator for ML model version "
                    "lifecycle policies on a multi-layer edge")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a policy x seed experiment grid")
    _add_scenario_args(p_run)
    p_run.add_argument("--policies", help="comma list (default: full roster)")
    p_run.add_argument("--seeds", help="comma list of integer seeds")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--parallel", type=int, default=1,
                       help="worker processes across (policy, seed) pairs")
    p_run.add_argument("--overwrite", action="store_true",
                       help="allow writing into a non-empty directory")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="check a scenario file")
    _add_scenario_args(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_sum = sub.add_parser("summarize",
                           help="re-aggregate existing traces")
    p_sum.add_argument("--out", help="output directory with traces")
    p_sum.set_defaults(func=cmd_summarize)

    p_plot = sub.add_parser("plot-data",
                            help="emit boxplot CSV for plotting tools")
    p_plot.add_argument("--out", help="output directory with traces")
    p_plot.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except scen.InvalidScenario as exc:
        for diag in exc.diagnostics:
            print(f"error: {diag}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
