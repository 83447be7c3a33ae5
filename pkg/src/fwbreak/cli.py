"""Command line entry point: ``fwbreak run|plot|verify|sweep``."""
from __future__ import annotations

import argparse
import copy
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .config import ConfigError, load_config, parse_initial_data, scenario_from_dict
from .harness import export, load_artifact, run
from .plotting import KINDS, plot
from .verify import CHECKS, verify

log = logging.getLogger("fwbreak")


def _run(args) -> int:
    scenario = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    artifact = run(scenario)
    stem = out / scenario.name
    export(artifact, "json", stem.with_suffix(".json"))
    export(artifact, "csv", stem.with_suffix(".csv"))
    if not args.no_plots:
        for kind in KINDS:
            plot(artifact, kind, out / f"{scenario.name}_{kind}.svg")
    rep = artifact.report
    print(f"{scenario.name}: {artifact.outcome['kind']} at t={artifact.outcome['t']:.6g} "
          f"-> {artifact.classification}")
    print(f"  criterion min u0' + max u0' = {rep.criterion_value:.6g} "
          f"({'met' if rep.criterion_met else 'not met'})")
    if rep.predicted_T_upper is not None:
        print(f"  predicted upper bound on T = {rep.predicted_T_upper:.6g}")
    print(f"  wrote {stem}.json, {stem}.csv")
    return 0


def _plot(args) -> int:
    artifact = load_artifact(args.artifact)
    path = Path(args.out) if args.out else Path(args.artifact).with_name(
        f"{Path(args.artifact).stem}_{args.kind}.svg")
    plot(artifact, args.kind, path)
    print(path)
    return 0


def _verify(args) -> int:
    return verify(args.filter)


def parse_range(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:num, got {text!r}")
        return list(np.linspace(float(parts[0]), float(parts[1]), int(parts[2])))
    return [float(v) for v in text.split(",")]


def _set_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if isinstance(node.get(key), str) and key == "initial_data":
            node[key] = parse_initial_data(node[key])
        node = node.setdefault(key, {})
    node[keys[-1]] = value


def _sweep(args) -> int:
    name, _, spec = args.param.partition("=")
    if not spec:
        raise ValueError("--param must look like name=start:stop:num")
    values = parse_range(spec)
    template = yaml.safe_load(Path(args.config).read_text())
    columns = ["value", "criterion_value", "criterion_met", "predicted_T_upper",
               "outcome", "t_end", "classification"]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([name] + columns[1:])
        for v in values:
            data = copy.deepcopy(template)
            _set_path(data, name, float(v))
            scenario = scenario_from_dict(data, Path(args.config).stem, Path(args.config).parent)
            art = run(scenario)
            rep = art.report
            writer.writerow([
                format(v, ".17g"), format(rep.criterion_value, ".17g"), rep.criterion_met,
                "" if rep.predicted_T_upper is None else format(rep.predicted_T_upper, ".17g"),
                art.outcome["kind"], format(art.outcome["t"], ".17g"), art.classification,
            ])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fwbreak", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config; write json, csv and svg figures")
    r.add_argument("config")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--no-plots", action="store_true", help="skip figure output")
    r.set_defaults(func=_run)

    pl = sub.add_parser("plot", help="render one figure from a json artifact")
    pl.add_argument("artifact")
    pl.add_argument("--kind", required=True, choices=KINDS)
    pl.add_argument("--out", help="output svg path")
    pl.set_defaults(func=_plot)

    v = sub.add_parser("verify", help="run the verification checks")
    v.add_argument("--filter", help=f"substring of check names: {', '.join(CHECKS)}")
    v.set_defaults(func=_verify)

    s = sub.add_parser("sweep", help="sweep one scalar config entry; print a criterion vs outcome table")
    s.add_argument("config")
    s.add_argument("--param", required=True, help="dotted.key=start:stop:num or v1,v2,...")
    s.add_argument("--out", help="csv output path (default stdout)")
    s.set_defaults(func=_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"fwbreak: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
