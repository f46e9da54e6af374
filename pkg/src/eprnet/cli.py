"""Command line interface.

Four subcommands cover the workflow end to end:

  rates     print the per-channel wavelength / frequency / rate table
  route     compute disjoint route pairs from a source placement
  allocate  run one allocation strategy and print per-pair rates
  sweep     run a full placement sweep and write CSV (and optional SVG)
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .allocation import AllocationInstance
from .harness import (
    ALL_STRATEGIES,
    ConfigError,
    ExperimentConfig,
    allocate_once,
    config_from_json,
    emit_csv,
    emit_plot,
    run_placement_sweep,
)
from .metrics import jain_index
from .netgraph import LossParams, TopologyError, build_routing_graph, load_topology
from .routing import all_pair_routes, route_nodes
from .spectrum import (
    ChannelGrid,
    SpectrumProfile,
    channel_bandwidth,
    channel_center_frequency,
    channel_center_wavelength,
    generation_rates,
)


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--channels", type=int, default=200,
                        help="number of wavelength channels (default 200)")
    parser.add_argument("--width-nm", type=float, default=0.1,
                        help="channel width in nm (default 0.1)")
    parser.add_argument("--pitch-nm", type=float, default=0.2,
                        help="channel spacing in nm (default 0.2)")
    parser.add_argument("--center-nm", type=float, default=1550.0,
                        help="grid center wavelength in nm (default 1550)")
    parser.add_argument("--fwhm-nm", type=float, default=9.0,
                        help="emission FWHM in nm (default 9)")
    parser.add_argument("--peak-rate", type=float, default=1.0,
                        help="peak generation rate (default 1)")


def _add_loss_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--topology", required=True,
                        help="path to a topology JSON, or a bundled name "
                             "(simple6, ilec17)")
    parser.add_argument("--source", required=True, help="source node id")
    parser.add_argument("--wss-db", type=float, default=8.0,
                        help="per-switch loss in dB (default 8)")
    parser.add_argument("--fiber-db-per-km", type=float, default=0.4,
                        help="fiber loss in dB/km (default 0.4)")
    parser.add_argument("--exclude-u-turns", action="store_true",
                        help="forbid routes that bounce through a node back "
                             "onto the arriving fiber")


def _grid_from_args(args: argparse.Namespace) -> tuple[ChannelGrid, SpectrumProfile]:
    grid = ChannelGrid(args.channels, args.width_nm, args.pitch_nm, args.center_nm)
    return grid, SpectrumProfile(args.fwhm_nm, args.peak_rate)


def _cmd_rates(args: argparse.Namespace) -> int:
    grid, profile = _grid_from_args(args)
    rates = generation_rates(grid, profile)
    print(f"{'ch':>4} {'lambda_nm':>10} {'freq_THz':>11} {'bw_GHz':>8} {'rate':>12}")
    for x in range(1, grid.channel_count + 1):
        print(f"{x:>4} {channel_center_wavelength(grid, x):>10.4f} "
              f"{channel_center_frequency(grid, x):>11.5f} "
              f"{channel_bandwidth(grid, x):>8.4f} {rates[x - 1]:>12.6g}")
    print(f"total generation rate: {rates.total:.6g}")
    return 0


def _route_table(args: argparse.Namespace):
    topology = load_topology(args.topology)
    loss = LossParams(args.fiber_db_per_km, args.wss_db)
    graph = build_routing_graph(topology, args.source, loss,
                                exclude_u_turns=args.exclude_u_turns)
    return graph, all_pair_routes(graph)


def _cmd_route(args: argparse.Namespace) -> int:
    graph, table = _route_table(args)
    if args.pair:
        want = tuple(sorted(args.pair))
        plan = table.plans.get(want)
        if plan is None:
            print(f"pair {want[0]}-{want[1]}: no pair of link-disjoint routes",
                  file=sys.stderr)
            return 1
        print(f"pair {want[0]}-{want[1]}: total loss {plan.total_loss_db:.4f} dB, "
              f"transmittance {plan.eta:.6g}")
        for label, path in (("A", plan.path_a), ("B", plan.path_b)):
            hops = " -> ".join(route_nodes(graph, path))
            db = sum(graph.edges[eid].weight_db for eid in path)
            print(f"  route {label} ({db:.4f} dB): {hops}")
        return 0
    print(f"{'pair':>10} {'loss_dB':>10} {'transmittance':>14}")
    for pair in sorted(table.plans):
        plan = table.plans[pair]
        print(f"{pair[0] + '-' + pair[1]:>10} {plan.total_loss_db:>10.4f} "
              f"{plan.eta:>14.6g}")
    for pair in table.infeasible:
        print(f"{pair[0] + '-' + pair[1]:>10} {'infeasible':>10}")
    return 0 if not table.infeasible else 1


def _cmd_allocate(args: argparse.Namespace) -> int:
    _, table = _route_table(args)
    if table.infeasible:
        bad = ", ".join("-".join(p) for p in table.infeasible)
        print(f"placement {args.source} cannot route: {bad}", file=sys.stderr)
        return 1
    grid, profile = _grid_from_args(args)
    rates = generation_rates(grid, profile)
    pairs = sorted(table.plans)
    instance = AllocationInstance(
        tuple(table.plans[p].eta for p in pairs), rates)
    allocation = allocate_once(instance, args.strategy, seed=args.seed,
                               node_budget=args.node_budget)
    print(f"{'pair':>10} {'channels':>9} {'received':>12}")
    counts = [0] * len(pairs)
    for pair_idx in allocation.assignment:
        counts[pair_idx] += 1
    for q, pair in enumerate(pairs):
        print(f"{pair[0] + '-' + pair[1]:>10} {counts[q]:>9} "
              f"{allocation.received[q]:>12.6g}")
    print(f"minimum rate: {allocation.min_rate:.6g}")
    print(f"jain index:   {jain_index(allocation.received):.6g}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.config:
        config = config_from_json(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out:
            overrides["output_path"] = args.out
        if overrides:
            config = dataclasses.replace(config, **overrides)
    else:
        if args.topology is None:
            raise ConfigError("either --config or --topology is required")
        if args.seed is None:
            raise ConfigError("--seed is required (sweeps must be reproducible)")
        config = ExperimentConfig(
            topology_path=args.topology,
            seed=args.seed,
            wss_losses=tuple(args.wss_db) if args.wss_db else (4.0, 8.0),
            strategies=tuple(args.strategies.split(","))
            if args.strategies else ALL_STRATEGIES,
            runs=args.runs,
            sources=tuple(args.sources.split(",")) if args.sources else None,
            channels=args.channels,
            channel_width_nm=args.width_nm,
            channel_pitch_nm=args.pitch_nm,
            center_wavelength_nm=args.center_nm,
            fwhm_nm=args.fwhm_nm,
            peak_rate=args.peak_rate,
            fiber_loss_db_per_km=args.fiber_db_per_km,
            exclude_u_turns=args.exclude_u_turns,
            output_path=args.out,
        )
    report = run_placement_sweep(config)
    out = config.output_path or "sweep.csv"
    emit_csv(report, out)
    print(f"wrote {len(report.rows)} rows to {out}")
    if args.plot:
        emit_plot(report, args.plot)
        print(f"wrote plot to {args.plot}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprnet",
        description="Routing and fair spectrum allocation for single-source "
                    "entangled-photon networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="print the channel rate table")
    _add_grid_args(p_rates)
    p_rates.set_defaults(func=_cmd_rates)

    p_route = sub.add_parser("route", help="compute disjoint route pairs")
    _add_loss_args(p_route)
    p_route.add_argument("--pair", nargs=2, metavar=("NODE", "NODE"),
                         help="show the two routes for one consumer pair")
    p_route.set_defaults(func=_cmd_route)

    p_alloc = sub.add_parser("allocate", help="run one allocation strategy")
    _add_loss_args(p_alloc)
    _add_grid_args(p_alloc)
    p_alloc.add_argument("--strategy", required=True, choices=ALL_STRATEGIES)
    p_alloc.add_argument("--seed", type=int, default=None,
                         help="shuffle seed for order-sensitive strategies")
    p_alloc.add_argument("--node-budget", type=int, default=2_000_000,
                         help="search budget for the exact strategy")
    p_alloc.set_defaults(func=_cmd_allocate)

    p_sweep = sub.add_parser("sweep", help="run a placement sweep, write CSV")
    p_sweep.add_argument("--config", help="experiment config JSON")
    p_sweep.add_argument("--topology", help="topology path or bundled name")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="master seed (required without --config)")
    p_sweep.add_argument("--runs", type=int, default=1000,
                         help="runs per order-sensitive strategy (default 1000)")
    p_sweep.add_argument("--wss-db", type=float, action="append",
                         help="switch loss level, repeatable (default 4 and 8)")
    p_sweep.add_argument("--strategies",
                         help="comma-separated strategy list (default all)")
    p_sweep.add_argument("--sources",
                         help="comma-separated source placements (default all)")
    p_sweep.add_argument("--out", help="output CSV path (default sweep.csv)")
    p_sweep.add_argument("--plot", help="also write a grouped-bar SVG here")
    _add_grid_args(p_sweep)
    p_sweep.add_argument("--fiber-db-per-km", type=float, default=0.4,
                         help="fiber attenuation (default 0.4 dB/km)")
    p_sweep.add_argument("--exclude-u-turns", action="store_true",
                         help="forbid in-port to out-port at the same node")
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TopologyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
