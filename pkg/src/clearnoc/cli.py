"""Command-line front end: config loading, subcommand dispatch, CSV reports.

Every run writes its outputs plus a ``manifest.toml`` echoing the resolved
configuration into the output directory; rerunning with ``--config
manifest.toml`` reproduces byte-identical outputs.  Errors come back as a
single machine-parseable line on stderr with distinct exit codes: 2 usage,
3 missing file, 4 validation, 5 runtime (timeouts, infeasible links).
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile
from typing import Optional, Sequence

import numpy as np
import tomli

from .analysis import (
    EXPLORE_CSV_HEADER,
    explore,
    explore_row_values,
)
from .calibration import CalibrationError, load_calibration
from .constants import DEFAULT_SEED
from .optproj import (
    RADAR_CSV_HEADER,
    LossPolicy,
    electronic_reference,
    load_optical_routers,
    project_area,
    project_energy,
    radar_compare,
    OpticalProjection,
)
from .routing import compute_routes
from .simcore import DEFAULT_MAX_CYCLES, SimTimeoutError, simulate
from .techlib import (
    SWEEP_CSV_HEADER,
    LinkInfeasibleError,
    LinkMode,
    ProfileError,
    clear_sweep,
    load_profiles,
)
from .topology import add_express_links, build_mesh, load_topology
from .traffic import (
    TrafficModelConfig,
    TrafficPattern,
    generate_synthetic,
    load_trace,
    split_messages,
    synthesize_benchmark_like,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_VALIDATION = 4
EXIT_RUNTIME = 5


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: str, header: str, rows) -> None:
    """Atomic CSV write: rename into place only when fully written."""
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return _fmt(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_manifest(outdir: str, subcommand: str, options: dict) -> str:
    path = os.path.join(outdir, "manifest.toml")
    lines = ["[run]", f'subcommand = "{subcommand}"']
    for key in sorted(options):
        value = options[key]
        if value is None:
            continue
        lines.append(f"{key} = {_toml_value(value)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


TOPO_SPEC_RE = re.compile(r"^mesh(\d+)(?:\+([a-z]+)(\d+))?$")


def parse_topology_spec(spec: str, profiles, base_tech: str):
    """`mesh16` or `mesh16+hyppi3`; also accepts a topology file path."""
    if os.path.exists(spec):
        return load_topology(spec, profiles)
    m = TOPO_SPEC_RE.match(spec)
    if not m:
        raise ValueError(f"bad topology spec {spec!r} (want mesh<k>[+<tech><hops>] or a file)")
    k = int(m.group(1))
    topo = build_mesh(k, profiles[base_tech])
    if m.group(2):
        express = m.group(2)
        if express not in profiles:
            raise ValueError(f"unknown express technology {express!r}")
        topo = add_express_links(topo, int(m.group(3)), profiles[express])
    return topo


def _parse_lengths(spec: str) -> list[float]:
    """`a:b:log[:n]`, `a:b:lin[:n]`, or a comma-separated list, in mm."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"bad length sweep {spec!r}")
        a, b = float(parts[0]), float(parts[1])
        n = int(parts[3]) if len(parts) == 4 else 50
        if parts[2] == "log":
            if a <= 0:
                raise ValueError("log sweep needs a positive start")
            return list(np.geomspace(a, b, n))
        if parts[2] == "lin":
            return list(np.linspace(a, b, n))
        raise ValueError(f"bad sweep kind {parts[2]!r}")
    return [float(tok) for tok in spec.split(",")]


def _csv_list(spec: str) -> list[str]:
    return [tok.strip() for tok in spec.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clearnoc",
        description="Design-space exploration and cycle simulation for hybrid opto-electronic NoCs",
    )
    parser.add_argument("--out", default=".", help="output directory (default: cwd)")
    parser.add_argument("--calib", default=None, help="cost calibration TOML (default: packaged)")
    parser.add_argument("--profiles", default=None, help="technology profile TOML (default: packaged)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed for synthetic traffic")
    parser.add_argument("--config", default=None, help="rerun from an emitted manifest.toml")
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("link-clear", help="link-level figure-of-merit sweep over lengths")
    p.add_argument("--lengths", default="0.001:10:log", help="a:b:log[:n], a:b:lin[:n], or comma list (mm)")
    p.add_argument("--techs", default="electronic,photonic,plasmonic,hyppi")
    p.add_argument("--mode", default="bare", choices=["bare", "noc"])

    p = sub.add_parser("explore", help="system figure-of-merit cross-product exploration")
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--hops", default="3,5,15")
    p.add_argument("--base-tech", default="electronic,photonic,hyppi")
    p.add_argument("--express-tech", default="electronic,photonic,plasmonic,hyppi")
    p.add_argument("--injection", type=float, default=0.1)
    p.add_argument("--p", dest="hop_p", type=float, default=0.02)
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--latency-weighting", default="traffic", choices=["traffic", "uniform"])

    p = sub.add_parser("simulate", help="cycle-level trace-driven simulation")
    p.add_argument("--topo", required=True, help="comma list of mesh<k>[+<tech><hops>] or topology files")
    p.add_argument("--base-tech", default="electronic")
    p.add_argument("--trace", default=None, help="trace file (inject_cycle src dst bytes)")
    p.add_argument("--pattern", default=None, choices=[pt.value for pt in TrafficPattern])
    p.add_argument("--volume", type=int, default=65536, help="bytes per source for --pattern")
    p.add_argument("--injection-rate", type=float, default=0.1,
                   help="offered flits/cycle/source for --pattern traces")
    p.add_argument("--max-cycles", type=int, default=DEFAULT_MAX_CYCLES)
    p.add_argument("--packet-dump", default=None, help="per-packet latency CSV for the first topology")
    p.add_argument("--link-loads", default=None,
                   help="per-link utilization CSV for the first topology (measured rates)")

    p = sub.add_parser("project", help="all-optical network projections and radar comparison")
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--router-profile", default="both", choices=["photonic", "hyppi", "both"])
    p.add_argument("--policy", default="min", choices=[lp.value for lp in LossPolicy])
    p.add_argument("--p", dest="hop_p", type=float, default=0.02)
    p.add_argument("--sigma", type=float, default=0.4)

    return parser


def _cmd_link_clear(args, profiles, calib, outdir) -> dict:
    techs = _csv_list(args.techs)
    missing = [t for t in techs if t not in profiles]
    if missing:
        raise ValueError(f"unknown technologies {missing}; available: {sorted(profiles)}")
    lengths = _parse_lengths(args.lengths)
    mode = LinkMode.BARE if args.mode == "bare" else LinkMode.NOC
    rows = clear_sweep([profiles[t] for t in techs], lengths, mode)
    out = os.path.join(outdir, "clear_sweep.csv")
    _write_csv(
        out,
        SWEEP_CSV_HEADER,
        (
            (r.technology, r.length_mm, r.capacity_gbps, r.latency_ps, r.energy_fj_per_bit, r.area_um2, r.clear)
            for r in rows
        ),
    )
    print(f"wrote {out} ({len(rows)} rows)")
    return {"lengths": args.lengths, "techs": args.techs, "mode": args.mode}


def _cmd_explore(args, profiles, calib, outdir, seed) -> dict:
    hops = [int(tok) for tok in _csv_list(args.hops)]
    bases = [profiles[t] for t in _csv_list(args.base_tech)]
    expresses = [profiles[t] for t in _csv_list(args.express_tech)]
    config = TrafficModelConfig(
        p=args.hop_p, sigma=args.sigma, max_injection_rate=args.injection, seed=seed
    )
    rows = explore(
        bases, expresses, hops, config, calib, k=args.k, latency_weighting=args.latency_weighting
    )
    out = os.path.join(outdir, "explore_report.csv")
    _write_csv(out, EXPLORE_CSV_HEADER, (explore_row_values(r) for r in rows))
    print(f"wrote {out} ({len(rows)} rows)")
    return {
        "k": args.k,
        "hops": args.hops,
        "base_tech": args.base_tech,
        "express_tech": args.express_tech,
        "injection": args.injection,
        "p": args.hop_p,
        "sigma": args.sigma,
        "latency_weighting": args.latency_weighting,
    }


def _cmd_simulate(args, profiles, calib, outdir, seed) -> dict:
    if (args.trace is None) == (args.pattern is None):
        raise ValueError("simulate needs exactly one of --trace or --pattern")
    topo_specs = _csv_list(args.topo)
    topologies = [(spec, parse_topology_spec(spec, profiles, args.base_tech)) for spec in topo_specs]
    n_nodes = topologies[0][1].n_nodes
    if any(t.n_nodes != n_nodes for _, t in topologies):
        raise ValueError("all topologies in one run must have the same node count")

    if args.trace is not None:
        messages = load_trace(args.trace, n_nodes)
    else:
        messages = synthesize_benchmark_like(
            args.pattern, topologies[0][1], args.volume,
            mean_injection_rate=args.injection_rate,
        )
    packets = split_messages(messages)

    rows = []
    baseline = None
    dump = None
    loads_dump = None
    for i, (name, topo) in enumerate(topologies):
        result = simulate(
            topo,
            packets,
            calib=calib,
            max_cycles=args.max_cycles,
            keep_packet_latencies=(i == 0 and args.packet_dump is not None),
        )
        if i == 0 and args.packet_dump is not None:
            dump = (topo, result)
        if i == 0 and args.link_loads is not None:
            loads_dump = (topo, result)
        avg = result.avg_packet_latency
        if baseline is None:
            baseline = avg
        rows.append(
            (
                name,
                result.packets_delivered,
                result.flits_delivered,
                avg,
                baseline / avg if avg else 0.0,
                result.dynamic_energy_j,
                result.sim_cycles,
            )
        )
    out = os.path.join(outdir, "sim_report.csv")
    _write_csv(
        out,
        "topology,packets,flits,avg_latency_clk,speedup_vs_first,dynamic_energy_j,sim_cycles",
        rows,
    )
    print(f"wrote {out} ({len(rows)} rows)")
    if dump is not None:
        _, result = dump
        dump_path = os.path.join(outdir, args.packet_dump)
        _write_csv(
            dump_path,
            "packet,inject_cycle,src,dst,flits,latency_clk",
            (
                (i, p.inject_cycle, p.src, p.dst, p.flits, int(result.packet_latencies[i]))
                for i, p in enumerate(packets)
            ),
        )
        print(f"wrote {dump_path}")
    if loads_dump is not None:
        topo, result = loads_dump
        # Measured per-link rates over the whole run, in flits per cycle.
        from .routing import LOAD_CSV_HEADER, LinkLoadMap, link_capacity_flits_per_cycle, load_rows

        cycles = max(result.sim_cycles, 1)
        rate = result.link_flit_counts / cycles
        cap = np.array([link_capacity_flits_per_cycle(l.capacity_gbps) for l in topo.links])
        load = LinkLoadMap(rate, rate / cap, result.router_flit_counts / cycles)
        loads_path = os.path.join(outdir, args.link_loads)
        _write_csv(loads_path, LOAD_CSV_HEADER, load_rows(topo, load))
        print(f"wrote {loads_path}")
    return {
        "topo": args.topo,
        "base_tech": args.base_tech,
        "trace": args.trace,
        "pattern": args.pattern,
        "volume": args.volume,
        "injection_rate": args.injection_rate,
        "max_cycles": args.max_cycles,
        "packet_dump": args.packet_dump,
        "link_loads": args.link_loads,
    }


def _cmd_project(args, profiles, calib, outdir, seed) -> dict:
    routers = load_optical_routers(None if args.profiles is None else args.profiles)
    which = ["photonic", "hyppi"] if args.router_profile == "both" else [args.router_profile]
    config = TrafficModelConfig(p=args.hop_p, sigma=args.sigma, seed=seed)

    elec_mesh = build_mesh(args.k, profiles["electronic"])
    projections = [electronic_reference(elec_mesh, calib)]
    for name in which:
        tech = profiles[name]
        topo = build_mesh(args.k, tech)
        routes = compute_routes(topo)
        spec = generate_synthetic(topo, config)
        energy = project_energy(
            topo, spec, routes, routers[name], tech, calib, policy=LossPolicy(args.policy)
        )
        area = project_area(topo, routers[name], tech, calib)
        projections.append(
            OpticalProjection(
                network=name,
                energy_fj_per_bit=energy.energy_fj_per_bit,
                total_area_mm2=area,
                latency_factor=calib.projection.optical_latency_factor,
            )
        )
        if energy.infeasible_pairs:
            print(
                f"note: {name}: {len(energy.infeasible_pairs)} source-destination pairs "
                f"exceed the {energy.laser_cap_mw:g} mW laser cap"
            )
    comparison = radar_compare(projections)
    out = os.path.join(outdir, "projection.csv")
    _write_csv(
        out,
        RADAR_CSV_HEADER,
        (
            (r.network, r.latency_factor, r.energy_fj_per_bit, r.area_mm2,
             r.norm_latency, r.norm_energy, r.norm_area)
            for r in comparison.rows
        ),
    )
    print(f"wrote {out} ({len(comparison.rows)} rows)")
    for axis in ("latency", "energy", "area"):
        print(f"best {axis}: {comparison.winners[axis]}")
    return {
        "k": args.k,
        "router_profile": args.router_profile,
        "policy": args.policy,
        "p": args.hop_p,
        "sigma": args.sigma,
    }


def _load_manifest_argv(path: str, out_override: Optional[str] = None) -> list[str]:
    with open(path, "rb") as fh:
        raw = tomli.load(fh)
    run = raw.get("run", {})
    sub = run.pop("subcommand", None)
    if sub is None:
        raise ValueError(f"manifest {path} has no run.subcommand")
    if out_override is not None:
        run["out"] = out_override
    argv = []
    for key in ("out", "calib", "profiles", "seed"):
        if key in run and run[key] is not None:
            argv += [f"--{key}", str(run.pop(key))]
    argv.append(sub)
    for key in sorted(run):
        value = run[key]
        if value is None:
            continue
        flag = "--" + key.replace("_", "-")
        argv += [flag, str(value)]
    return argv


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    try:
        if args.config is not None:
            override = args.out if args.out != "." else None
            return run(_load_manifest_argv(args.config, out_override=override))

        if args.subcommand is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE

        outdir = args.out
        os.makedirs(outdir, exist_ok=True)
        profiles = load_profiles(args.profiles)
        calib = load_calibration(args.calib)

        if args.subcommand == "link-clear":
            options = _cmd_link_clear(args, profiles, calib, outdir)
        elif args.subcommand == "explore":
            options = _cmd_explore(args, profiles, calib, outdir, args.seed)
        elif args.subcommand == "simulate":
            options = _cmd_simulate(args, profiles, calib, outdir, args.seed)
        elif args.subcommand == "project":
            options = _cmd_project(args, profiles, calib, outdir, args.seed)
        else:  # pragma: no cover - argparse rejects unknown subcommands
            return EXIT_USAGE

        options.update(
            {"seed": args.seed, "calib": args.calib, "profiles": args.profiles, "out": outdir}
        )
        _write_manifest(outdir, args.subcommand, options)
        return EXIT_OK
    except FileNotFoundError as exc:
        print(f"clearnoc: error[{EXIT_MISSING_FILE}]: missing file: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (SimTimeoutError, LinkInfeasibleError) as exc:
        print(f"clearnoc: error[{EXIT_RUNTIME}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ProfileError, CalibrationError, ValueError, KeyError) as exc:
        print(f"clearnoc: error[{EXIT_VALIDATION}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
