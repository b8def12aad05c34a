"""Command-line front end.

Subcommands:
    simulate    run one configured ensemble experiment, write CSV + JSON
    figure6     run the four canonical occupancy models side by side
    doublewell  synthesize double-well fringes and invert them back
    resolution  print the coincidence period and envelope width for a species
    validate    run the built-in self-check suites

Exit codes: 0 success, 1 validation failure, 2 configuration error. Every
output file carries a header block with the fully resolved config and master
seed, so a run can be reproduced from its outputs alone.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config_io import (ConfigError, load_doublewell_config,
                        load_experiment_config, load_geometry_overrides)
from .constants import DEFAULT_PACKET_WIDTH, SPECIES_MASS
from .ensemble import (figure6_suite, run_experiment, write_p1_csv,
                       write_p2_csv, write_result_json)
from .lattice import LatticeConfig
from .validation import run_all
from .wavepacket import (DoubleWellState, ExpansionParams,
                         double_well_density, extract_fringe_params,
                         resolution_figures, write_wave_csv)

PANEL_ORDER = ("a", "b", "c", "d")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticetof",
        description="Time-of-flight spatial correlation diagnostics for "
                    "atoms in 1D optical lattices")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one ensemble experiment")
    sim.add_argument("--config", required=True, help="experiment config file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None,
                     help="override run.master_seed")
    sim.add_argument("--runs", type=int, default=None,
                     help="override run.runs")

    fig6 = sub.add_parser("figure6",
                          help="compare the four occupancy statistics")
    fig6.add_argument("--config", required=True)
    fig6.add_argument("--out", required=True)
    fig6.add_argument("--seed", type=int, default=None)
    fig6.add_argument("--runs", type=int, default=None)

    dw = sub.add_parser("doublewell",
                        help="synthesize and invert double-well fringes")
    dw.add_argument("--config", default=None,
                    help="config with [doublewell] (and optionally "
                         "[expansion]) sections")
    dw.add_argument("--out", required=True)
    dw.add_argument("--species", choices=sorted(SPECIES_MASS),
                    default="cesium")
    dw.add_argument("--time", type=float, default=1.0,
                    help="flight time in seconds")

    res = sub.add_parser("resolution",
                         help="print coincidence period and envelope width")
    res.add_argument("--species", choices=sorted(SPECIES_MASS),
                     default="cesium")
    res.add_argument("--time", type=float, default=1.0,
                     help="flight time in seconds")
    res.add_argument("--config", default=None,
                     help="optional config supplying lattice_const / "
                          "packet_width")

    sub.add_parser("validate", help="run the built-in self checks")
    return parser


def _cmd_simulate(args) -> int:
    loaded = load_experiment_config(args.config, seed_override=args.seed,
                                    runs_override=args.runs)
    os.makedirs(args.out, exist_ok=True)
    result = run_experiment(loaded.config)
    write_result_json(os.path.join(args.out, "result.json"), result)
    write_p1_csv(os.path.join(args.out, f"{loaded.p1_panel}.csv"), result)
    if result.p2_recon is not None:
        write_p2_csv(os.path.join(args.out, f"{loaded.p2_panel}.csv"), result)
    print(f"simulate: {loaded.config.runs} runs of "
          f"{result.atom_count} atoms on {loaded.config.lattice.n_sites} "
          f"sites (seed {loaded.config.master_seed}) -> {args.out}")
    return 0


def _cmd_figure6(args) -> int:
    loaded = load_experiment_config(args.config, seed_override=args.seed,
                                    runs_override=args.runs)
    os.makedirs(args.out, exist_ok=True)
    results = figure6_suite(loaded.config)
    for panel, (name, result) in zip(PANEL_ORDER, results.items()):
        write_p2_csv(os.path.join(args.out, f"fig6{panel}.csv"), result)
        write_result_json(os.path.join(args.out, f"fig6{panel}.json"), result)
        print(f"figure6 panel {panel}: {name} "
              f"(seed {result.config.master_seed})")
    return 0


def _cmd_doublewell(args) -> int:
    expansion = None
    if args.config is not None:
        state, expansion = load_doublewell_config(args.config)
    else:
        state = DoubleWellState(c1=2 ** -0.5, c2=2 ** -0.5, phi=0.0,
                                well_separation=0.2e-6,
                                packet_width=DEFAULT_PACKET_WIDTH)
    if expansion is None:
        expansion = ExpansionParams.from_time(SPECIES_MASS[args.species],
                                              args.time)
    os.makedirs(args.out, exist_ok=True)
    density = double_well_density(state, expansion)
    fit = extract_fringe_params(density, expansion, state.well_separation)
    header = [
        "latticetof doublewell output",
        f"c1 = {state.c1!r}", f"c2 = {state.c2!r}", f"phi = {state.phi!r}",
        f"well_separation = {state.well_separation!r}",
        f"packet_width = {state.packet_width!r}",
        f"mass = {expansion.mass!r}",
        f"flight_time = {expansion.flight_time!r}",
        f"l_squared = {expansion.l_squared!r}",
        f"recovered_contrast = {fit.contrast!r}",
        f"recovered_phase = {fit.phase!r}",
    ]
    write_wave_csv(os.path.join(args.out, "doublewell.csv"),
                   density.x, density.values, header_lines=header)
    true_contrast = 2 * state.c1 * state.c2
    print(f"doublewell: contrast {fit.contrast:.6f} "
          f"(synthesized {true_contrast:.6f}), phase "
          f"{fit.phase if fit.phase_defined else float('nan'):.6f} "
          f"(synthesized {state.phi % (2 * np.pi):.6f})")
    return 0


def _cmd_resolution(args) -> int:
    lattice_const, packet_width = load_geometry_overrides(args.config)
    params = ExpansionParams.from_time(SPECIES_MASS[args.species], args.time)
    config = LatticeConfig(n_sites=2, lattice_const=lattice_const,
                           fill_factor=0.0)
    figures = resolution_figures(config, packet_width, params)
    print(f"species: {args.species} (mass {params.mass:.5g} kg), "
          f"flight time {params.flight_time:g} s")
    print(f"effective length L^2 = {params.l_squared:.5g} m^2")
    print(f"coincidence period Lambda = "
          f"{figures.coincidence_period * 1e3:.1f} mm "
          f"(lattice constant {lattice_const:g} m)")
    print(f"envelope width sigma = {figures.envelope_width * 1e3:.1f} mm "
          f"(packet width {packet_width:g} m)")
    return 0


def _cmd_validate(_args) -> int:
    reports = run_all()
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "figure6": _cmd_figure6,
        "doublewell": _cmd_doublewell,
        "resolution": _cmd_resolution,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
