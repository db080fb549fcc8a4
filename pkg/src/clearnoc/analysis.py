"""Design-space exploration: system-level figure of merit and its factors.

The system score for a network is

    capability_per_node / (latency_clks * power_W * area_mm2 * R)

where capability is aggregate link capacity per node, latency is the
traffic-weighted mean shortest-path latency, power is static plus dynamic
power at the offered injection rate, area sums routers and links, and R is
the slope of mean link utilization against injection rate (a network that
saturates faster is penalized).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calibration import CostCalibration
from .constants import CORE_CLK_GHZ
from .routing import LinkLoadMap, RouteTable, accumulate_loads, compute_routes
from .techlib import LinkInfeasibleError, LinkMode, TechnologyProfile, link_cost
from .topology import Topology, add_express_links, aggregate_capability, build_mesh
from .traffic import TrafficModelConfig, TrafficSpec, generate_synthetic

DEFAULT_R_GRID = tuple(round(0.01 * i, 2) for i in range(1, 11))


@dataclass(frozen=True)
class UtilizationCurve:
    samples: tuple[tuple[float, float], ...]   # (injection rate, mean utilization)

    def __post_init__(self):
        rates = [r for r, _ in self.samples]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError("injection rates must be strictly increasing")
        if any(u < 0 for _, u in self.samples):
            raise ValueError("utilization must be >= 0")


def utilization_slope(
    topo: Topology,
    routes: RouteTable,
    config: TrafficModelConfig,
    r_grid: Sequence[float] = DEFAULT_R_GRID,
) -> tuple[UtilizationCurve, float]:
    """Mean link utilization versus injection rate, and its least-squares slope."""
    if len(r_grid) < 2:
        raise ValueError("r_grid needs at least 2 points")
    spec = generate_synthetic(topo, config)
    samples = []
    for r in r_grid:
        load = accumulate_loads(topo, routes, spec.scaled_to(r))
        samples.append((float(r), load.mean_utilization))
    xs = np.array([s[0] for s in samples])
    ys = np.array([s[1] for s in samples])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return UtilizationCurve(tuple(samples)), slope


@dataclass(frozen=True)
class CostBreakdown:
    power_w: float
    static_power_w: float
    dynamic_power_w: float
    area_mm2: float
    latency_clk: float


def aggregate_costs(
    topo: Topology,
    routes: RouteTable,
    traffic: TrafficSpec,
    calib: CostCalibration,
    load: Optional[LinkLoadMap] = None,
    latency_weighting: str = "traffic",
) -> CostBreakdown:
    """Power (static + dynamic), total area, and mean route latency.

    ``latency_weighting`` is "traffic" (weight pairs by offered flit rate)
    or "uniform" (all pairs equal).
    """
    if load is None:
        load = accumulate_loads(topo, routes, traffic)
    f_hz = CORE_CLK_GHZ * 1e9
    router_cal = calib.router

    static = 0.0
    dynamic = 0.0
    area_um2 = 0.0
    for node in range(topo.n_nodes):
        ports = topo.router_ports[node]
        static += router_cal.static_w(ports)
        dynamic += load.router_rate[node] * f_hz * router_cal.dynamic_j(ports)
        area_um2 += router_cal.area(ports)

    cost_cache: dict[tuple[str, float], tuple[float, float, float]] = {}
    for link in topo.links:
        key = (link.tech.name, link.length_mm)
        if key not in cost_cache:
            cost = link_cost(link.tech, link.length_mm, LinkMode.NOC, calib=calib)
            cost_cache[key] = (cost.static_power_w, cost.dynamic_energy_per_flit_j, cost.area_um2)
        st, dyn_j, a = cost_cache[key]
        static += st
        dynamic += load.flit_rate[link.id] * f_hz * dyn_j
        area_um2 += a

    lat = routes.latency_matrix()
    if latency_weighting == "traffic":
        weights = traffic.rates
    elif latency_weighting == "uniform":
        weights = np.ones_like(lat) - np.eye(topo.n_nodes)
    else:
        raise ValueError(f"unknown latency weighting {latency_weighting!r}")
    wsum = weights.sum()
    if wsum == 0:
        raise ValueError("latency weighting has zero total weight")
    latency = float((weights * lat).sum() / wsum)

    return CostBreakdown(
        power_w=static + dynamic,
        static_power_w=static,
        dynamic_power_w=dynamic,
        area_mm2=area_um2 / 1e6,
        latency_clk=latency,
    )


@dataclass(frozen=True)
class ClearReport:
    capability_per_node_gbps: float
    latency_clk: float
    power_w: float
    area_mm2: float
    r_slope: float
    clear_value: float


def clear_system(
    capability_gbps: float,
    latency_clk: float,
    power_w: float,
    area_mm2: float,
    r_slope: float,
) -> ClearReport:
    """Exact quotient of the system figure of merit; carries all factors."""
    factors = {
        "capability": capability_gbps,
        "latency": latency_clk,
        "power": power_w,
        "area": area_mm2,
        "R": r_slope,
    }
    for name, value in factors.items():
        if value <= 0:
            raise ValueError(f"system CLEAR factor {name} must be > 0, got {value}")
    clear = capability_gbps / (latency_clk * power_w * area_mm2 * r_slope)
    return ClearReport(capability_gbps, latency_clk, power_w, area_mm2, r_slope, clear)


@dataclass(frozen=True)
class ExploreRow:
    base_tech: str
    express_tech: str          # "none" for a plain mesh
    hops: int                  # 0 for a plain mesh
    feasible: bool
    report: Optional[ClearReport]

    @property
    def clear_value(self) -> float:
        return self.report.clear_value if self.report else 0.0


EXPLORE_CSV_HEADER = (
    "base_tech,express_tech,hops,feasible,capability_gbps,latency_clk,"
    "power_w,area_mm2,r_slope,clear"
)


def explore_row_values(row: ExploreRow):
    rep = row.report
    return (
        row.base_tech,
        row.express_tech,
        row.hops,
        int(row.feasible),
        rep.capability_per_node_gbps if rep else 0.0,
        rep.latency_clk if rep else 0.0,
        rep.power_w if rep else 0.0,
        rep.area_mm2 if rep else 0.0,
        rep.r_slope if rep else 0.0,
        rep.clear_value if rep else 0.0,
    )


def _check_links_feasible(topo: Topology, calib: CostCalibration) -> None:
    seen = set()
    for link in topo.links:
        key = (link.tech.name, link.length_mm)
        if key in seen:
            continue
        seen.add(key)
        link_cost(link.tech, link.length_mm, LinkMode.NOC, calib=calib)


def evaluate_topology(
    topo: Topology,
    config: TrafficModelConfig,
    calib: CostCalibration,
    routes: Optional[RouteTable] = None,
    latency_weighting: str = "traffic",
) -> ClearReport:
    """Full system evaluation of one topology under the synthetic workload."""
    _check_links_feasible(topo, calib)
    if routes is None:
        routes = compute_routes(topo)
    spec = generate_synthetic(topo, config)
    load = accumulate_loads(topo, routes, spec)
    _, r_slope = utilization_slope(topo, routes, config)
    costs = aggregate_costs(topo, routes, spec, calib, load=load, latency_weighting=latency_weighting)
    return clear_system(
        aggregate_capability(topo), costs.latency_clk, costs.power_w, costs.area_mm2, r_slope
    )


def explore(
    base_techs: Sequence[TechnologyProfile],
    express_techs: Sequence[TechnologyProfile],
    hops_list: Sequence[int],
    config: TrafficModelConfig,
    calib: CostCalibration,
    k: int = 16,
    core_spacing_mm: float = 1.0,
    latency_weighting: str = "traffic",
) -> list[ExploreRow]:
    """Cross-product evaluation: every base, plain and with every express
    option.  Output is sorted by descending figure of merit; configurations
    whose links cannot close their loss budget come back infeasible."""
    if not base_techs or not express_techs or not len(hops_list):
        raise ValueError("explore needs nonempty option lists")

    route_cache: dict[tuple, RouteTable] = {}

    def routes_for(topo: Topology) -> RouteTable:
        base_lat = topo.links[0].latency_clk
        key = (topo.k, base_lat, topo.express_hops, topo.express_tech.name if topo.express_tech else None)
        # Route structure depends only on link latencies, so collapse the
        # express tech to its latency class.
        if topo.express_tech is not None:
            exp_lat = 1 if topo.express_tech.kind.value == "electronic" else 2
            key = (topo.k, base_lat, topo.express_hops, exp_lat)
        if key not in route_cache:
            route_cache[key] = compute_routes(topo)
        return route_cache[key]

    rows = []
    for base in base_techs:
        mesh = build_mesh(k, base, core_spacing_mm)
        variants = [(mesh, "none", 0)]
        for express in express_techs:
            for hops in hops_list:
                variants.append((add_express_links(mesh, hops, express), express.name, hops))
        for topo, express_name, hops in variants:
            try:
                report = evaluate_topology(
                    topo, config, calib, routes=routes_for(topo), latency_weighting=latency_weighting
                )
                rows.append(ExploreRow(base.name, express_name, hops, True, report))
            except LinkInfeasibleError:
                rows.append(ExploreRow(base.name, express_name, hops, False, None))
    rows.sort(key=lambda r: (-r.clear_value, r.base_tech, r.express_tech, r.hops))
    return rows
