"""Command-line front end: simulate, invert, validate, export.

Every data-producing command writes a JSON manifest next to its outputs with
input/output hashes, the effective config, and the seed, so a run can be
checked and reproduced.  Exit codes: 0 on success (for invert: tolerance
met), 2 on usage or format errors, 3 when an inversion hits the iteration
cap without meeting the tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings
from dataclasses import asdict

import numpy as np
import yaml

from .forward import IncidentWave
from .inversion import ablation_no_weight, run_inversion
from .io import (
    read_cauchy,
    read_coefficient,
    write_cauchy,
    write_coefficient,
    write_history,
    write_manifest,
)
from .scenarios import (
    BUILTIN_SCENARIOS,
    config_from_dict,
    get_scenario,
    load_scenario,
    simulate_scenario,
)
from .validate import format_report, run_all_checks

__all__ = ["main"]


def _load_scenario_arg(arg: str):
    if os.path.exists(arg):
        return load_scenario(arg), [arg]
    if arg in BUILTIN_SCENARIOS:
        return get_scenario(arg), []
    known = ", ".join(sorted(BUILTIN_SCENARIOS))
    raise ValueError(f"{arg!r} is neither a scenario file nor a builtin ({known})")


def cmd_simulate(args) -> int:
    started = time.time()
    sc, inputs = _load_scenario_arg(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    truth, clean, noisy = simulate_scenario(sc, seed=args.seed)

    paths = {
        "truth": os.path.join(args.out, "truth.txt"),
        "clean": os.path.join(args.out, "cauchy_clean.txt"),
        "noisy": os.path.join(args.out, "cauchy_noisy.txt"),
    }
    write_coefficient(truth, paths["truth"])
    write_cauchy(clean, paths["clean"])
    write_cauchy(noisy, paths["noisy"])

    seed = sc.seed if args.seed is None else args.seed
    config = {
        "scenario": sc.name,
        "noise_level": sc.noise_level,
        "refine": sc.refine,
        "inversion": asdict(sc.config),
    }
    write_manifest("simulate", inputs, config, seed, list(paths.values()),
                   os.path.join(args.out, "manifest.json"), started)
    print(f"wrote {', '.join(paths.values())}")
    return 0


def cmd_invert(args) -> int:
    started = time.time()
    cd = read_cauchy(args.data)
    inputs = [args.data]
    overrides = {}
    if args.config:
        with open(args.config) as f:
            doc = yaml.safe_load(f) or {}
        if not isinstance(doc, dict):
            raise ValueError(f"{args.config} must contain a mapping of config keys")
        overrides = doc
        inputs.append(args.config)
    cfg = config_from_dict(overrides)

    os.makedirs(args.out, exist_ok=True)
    runner = ablation_no_weight if args.no_carleman else run_inversion
    result = runner(cd, IncidentWave(), cfg)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)

    coeff_path = os.path.join(args.out, "coefficient.txt")
    hist_path = os.path.join(args.out, "history.txt")
    write_coefficient(result.coefficient, coeff_path)
    write_history(result.records, hist_path)
    write_manifest("invert" + (" --no-carleman" if args.no_carleman else ""),
                   inputs, cfg, cd.seed, [coeff_path, hist_path],
                   os.path.join(args.out, "manifest.json"), started)

    last = result.records[-1]
    peak = float(result.coefficient.values.max())
    i, j = np.unravel_index(int(np.argmax(result.coefficient.values)),
                            result.coefficient.values.shape)
    g = result.coefficient.grid
    print(f"iterations: {last.n}, J = {last.J_value:.6e}, "
          f"max a = {peak:.4f} at (x1={g.nodes[j]:+.4f}, x2={g.nodes[i]:+.4f})")
    print(f"wrote {coeff_path}, {hist_path}")
    if args.no_carleman:
        return 0
    return 0 if result.converged else 3


def cmd_validate(args) -> int:
    results = run_all_checks()
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_export(args) -> int:
    coeff = read_coefficient(args.result)
    g = coeff.grid
    out_dir = args.out or os.path.dirname(os.path.abspath(args.result))
    os.makedirs(out_dir, exist_ok=True)

    i_row = int(np.argmin(np.abs(g.nodes - args.row)))
    actual = float(g.nodes[i_row])
    if abs(actual - args.row) > 1e-12:
        warnings.warn(
            f"x2={args.row} is not a grid node; using nearest row x2={actual:.6f}",
            stacklevel=1,
        )

    nodes = [repr(float(x)) for x in g.nodes]
    section_path = os.path.join(out_dir, "cross_section.txt")
    with open(section_path, "w") as f:
        f.write(f"# x1 a  (row x2={actual!r})\n")
        for j in range(g.n_nodes):
            f.write(f"{nodes[j]} {float(coeff.values[i_row, j])!r}\n")

    heatmap_path = os.path.join(out_dir, "heatmap.txt")
    with open(heatmap_path, "w") as f:
        f.write("# x1 x2 a\n")
        for i in range(g.n_nodes):
            for j in range(g.n_nodes):
                f.write(f"{nodes[j]} {nodes[i]} {float(coeff.values[i, j])!r}\n")

    print(f"wrote {section_path}, {heatmap_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convexscat",
                                description="multifrequency backscatter simulation and "
                                            "coefficient reconstruction")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="generate Cauchy data for a scenario")
    ps.add_argument("--scenario", required=True, help="builtin name or scenario YAML file")
    ps.add_argument("--out", required=True, help="output directory")
    ps.add_argument("--seed", type=int, default=None, help="override the scenario noise seed")
    ps.set_defaults(func=cmd_simulate)

    pi = sub.add_parser("invert", help="reconstruct the coefficient from a data file")
    pi.add_argument("--data", required=True, help="Cauchy data file")
    pi.add_argument("--config", default=None, help="YAML mapping of config overrides")
    pi.add_argument("--out", required=True, help="output directory")
    pi.add_argument("--no-carleman", action="store_true",
                    help="comparison run: weight off, fixed 20 iterations, best iterate kept")
    pi.set_defaults(func=cmd_invert)

    pv = sub.add_parser("validate", help="run the built-in check suite")
    pv.set_defaults(func=cmd_validate)

    pe = sub.add_parser("export", help="dump cross-section and heatmap tables")
    pe.add_argument("--result", required=True, help="coefficient file")
    pe.add_argument("--row", type=float, default=0.45, help="x2 of the cross-section row")
    pe.add_argument("--out", default=None, help="output directory (default: beside the result)")
    pe.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
