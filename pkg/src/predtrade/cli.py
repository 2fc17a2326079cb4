"""Command-line entry point.

Every subcommand accepts ``--config FILE``; flags override the file. Exit
codes: 0 success, 2 config error, 3 numerical failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import yaml

from . import io
from .config import (ConfigError, RunConfig, base_graph, build_graph, config_dict, emit_config,
                     model_params, normalize_experiment_kind, parse_config, parse_short_topology,
                     wealth_spec)
from .dynamics import IntegrationError
from .experiments import (Fate, crossover_scan, lazarus_run, parallel_map, survival_curve,
                          survivor_distributions, sweep_p, SweepReport)
from .sampling import sample_initial_wealth
from .topology import GraphError, write_edge_list

log = logging.getLogger("predtrade")

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4

SUBCOMMANDS = {
    "simulate": "curve",
    "sweep-p": "sweep_p",
    "lazarus": "lazarus",
    "crossover": "crossover",
    "distributions": "distributions",
    "validate-config": None,
    "export-graph": None,
}

# flag dest -> config path
FLAG_PATHS = {
    "seed": ("master_seed",),
    "alpha": ("model", "alpha"),
    "g": ("model", "g"),
    "mode": ("model", "mode"),
    "ds": ("model", "ds"),
    "s_max": ("model", "s_max"),
    "eps_death": ("model", "eps_death"),
    "stable_window": ("model", "stable_window"),
    "stage_gap": ("model", "stage_gap"),
    "out": ("output", "dir"),
    "sample_every": ("output", "sample_every"),
    "topology": ("topology", "kind"),
    "n": ("topology", "n"),
    "width": ("topology", "width"),
    "height": ("topology", "height"),
    "graph_file": ("topology", "path"),
    "rewire_scheme": ("topology", "rewire", "scheme"),
    "p": ("topology", "rewire", "p"),
    "wealth": ("wealth", "kind"),
    "s1_target": ("wealth", "s1_target"),
    "rate": ("wealth", "rate"),
    "lo": ("wealth", "lo"),
    "hi": ("wealth", "hi"),
    "value": ("wealth", "value"),
    "wealth_file": ("wealth", "path"),
    "p_values": ("experiment", "p_values"),
    "n_configs": ("experiment", "n_configs"),
    "schemes": ("experiment", "schemes"),
    "center": ("experiment", "center"),
    "trader_class": ("experiment", "trader_class"),
    "n_links": ("experiment", "n_links"),
    "n_max": ("experiment", "n_max"),
    "grid_width": ("experiment", "width"),
    "grid_height": ("experiment", "height"),
    "s1_targets": ("experiment", "s1_targets"),
    "n_bins": ("experiment", "n_bins"),
}


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _words(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="YAML config file")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("-v", "--verbose", action="store_true")
    g = p.add_argument_group("model")
    g.add_argument("--seed", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--g", type=float)
    g.add_argument("--mode", choices=["first_order", "implicit"])
    g.add_argument("--ds", type=float)
    g.add_argument("--s-max", type=float)
    g.add_argument("--eps-death", type=float)
    g.add_argument("--stable-window", type=float)
    g.add_argument("--stage-gap", type=float)
    g = p.add_argument_group("topology")
    g.add_argument("--topology", choices=["ring", "grid", "complete", "edgelist"])
    g.add_argument("--n", type=int)
    g.add_argument("--width", type=int)
    g.add_argument("--height", type=int)
    g.add_argument("--graph-file", help="edge-list file (topology kind 'edgelist')")
    g.add_argument("--rewire-scheme", choices=["one_cycle", "five_cycle"])
    g.add_argument("--p", type=float, help="link-addition probability")
    g = p.add_argument_group("wealth")
    g.add_argument("--wealth", choices=["exponential", "uniform", "constant", "explicit"])
    g.add_argument("--s1-target", type=float)
    g.add_argument("--rate", type=float)
    g.add_argument("--lo", type=float)
    g.add_argument("--hi", type=float)
    g.add_argument("--value", type=float)
    g.add_argument("--wealth-file", help="one wealth value per line; implies --wealth explicit")
    g = p.add_argument_group("output")
    g.add_argument("--out")
    g.add_argument("--sample-every", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="predtrade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    cmds = {name: sub.add_parser(name) for name in SUBCOMMANDS}
    for p in cmds.values():
        _add_common(p)
    cmds["sweep-p"].add_argument("--p-values", type=_floats)
    cmds["sweep-p"].add_argument("--n-configs", type=int)
    cmds["sweep-p"].add_argument("--schemes", type=_words)
    for name in ("lazarus", "crossover"):
        cmds[name].add_argument("--center", type=int)
        cmds[name].add_argument("--class", dest="trader_class")
    cmds["lazarus"].add_argument("--n-links", type=int)
    cmds["crossover"].add_argument("--n-max", type=int)
    cmds["distributions"].add_argument("--grid-width", type=int)
    cmds["distributions"].add_argument("--grid-height", type=int)
    cmds["distributions"].add_argument("--s1-targets", type=_floats)
    cmds["distributions"].add_argument("--n-bins", type=int)
    cmds["export-graph"].add_argument("--output", type=Path, help="edge-list path (default <out>/graph.edges)")
    return parser


def _set(data: dict, path: tuple, value):
    node = data
    for key in path[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[path[-1]] = value


def resolve_config(args) -> RunConfig:
    data = {}
    if args.config is not None:
        data = yaml.safe_load(args.config.read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
    if isinstance(data.get("topology"), str):
        data["topology"] = parse_short_topology(data["topology"])
    if isinstance(data.get("experiment"), str):
        data["experiment"] = {"kind": data["experiment"]}
    for dest, path in FLAG_PATHS.items():
        value = getattr(args, dest, None)
        if value is not None:
            _set(data, path, value)
    if getattr(args, "wealth_file", None) is not None:
        _set(data, ("wealth", "kind"), "explicit")
    kind = SUBCOMMANDS[args.command]
    if args.command == "export-graph" and "experiment" not in data:
        kind = "curve"
    if kind is not None:
        exp = data.setdefault("experiment", {})
        if "kind" not in exp:
            exp["kind"] = kind
        elif normalize_experiment_kind(exp["kind"]) != kind:
            raise ConfigError(f"config experiment '{exp['kind']}' does not match subcommand '{args.command}'")
    return parse_config(data)


def execute(cfg: RunConfig, threads: int = 1) -> list[Path]:
    """Run the configured experiment and write its artifacts."""
    params = model_params(cfg)
    seed = cfg.master_seed
    out = Path(cfg.output.dir)
    meta = config_dict(cfg)
    exp = cfg.experiment
    if exp.kind == "curve":
        traj = survival_curve(build_graph(cfg), wealth_spec(cfg), params)
        return io.emit_curve(traj, out, params, seed, meta)
    if exp.kind == "sweep_p":
        base = base_graph(cfg)
        report = SweepReport()
        for scheme in exp.schemes:
            part = sweep_p(base, scheme, exp.p_values, exp.n_configs, wealth_spec(cfg), params,
                           seed=seed, threads=threads)
            report.entries.extend(part.entries)
        return io.emit_sweep(report, out, seed, meta)
    if exp.kind == "lazarus":
        graph = build_graph(cfg)
        x0 = sample_initial_wealth(graph.n, wealth_spec(cfg), floor=params.eps_death)
        report = lazarus_run(graph, x0, exp.center, exp.trader_class, exp.n_links, params, seed=seed)
        return io.emit_lazarus(report, out, seed, meta)
    if exp.kind == "crossover":
        graph = build_graph(cfg)
        x0 = sample_initial_wealth(graph.n, wealth_spec(cfg), floor=params.eps_death)
        fates, flip, prev = [], None, None
        for n, fate in crossover_scan(graph, x0, exp.center, exp.trader_class, exp.n_max, params, seed):
            fates.append((n, fate))
            if prev == Fate.SURVIVES and fate == Fate.DIES:
                flip = n
                break
            prev = fate
        return io.emit_crossover(fates, flip, out, exp.center, seed, meta)
    if exp.kind == "distributions":
        def one(s1):
            return survivor_distributions(exp.width, exp.height, s1, cfg.model.alpha, params,
                                          seed=seed, n_bins=exp.n_bins)
        written = []
        for s1, report in zip(exp.s1_targets, parallel_map(one, exp.s1_targets, threads)):
            written += io.emit_distributions(report, out / f"s1_{s1:g}", seed, meta)
        return written
    raise ConfigError(f"unknown experiment {exp.kind}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "validate-config":
            sys.stdout.write(emit_config(cfg))
            return 0
        if args.command == "export-graph":
            target = args.output or Path(cfg.output.dir) / "graph.edges"
            target.parent.mkdir(parents=True, exist_ok=True)
            write_edge_list(build_graph(cfg), target)
            print(target)
            return 0
        for path in execute(cfg, threads=args.threads):
            print(path)
        return 0
    except (ConfigError, GraphError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
