"""Projections for fully optical networks: per-path loss budgets, laser-power
driven energy per bit, area totals, and the three-way radar comparison
against an electronic mesh.

All-optical networks are circuit switched: once a path is configured, light
runs source modulator -> per-hop router switch fabric -> destination
detector.  Loss accumulates per traversed router (one traversal per link in
the path, per the switch-stage count of the shipped routers), plus waveguide
propagation and endpoint insertion/coupling.  Laser power must overcome the
total loss at the projection receiver-power constant (a calibration value:
WDM receivers at the full 50 Gb/s system rate need far more optical power
than the point-to-point link sensitivity).  Control electronics are charged
once per circuit, and latency rides a constant factor versus the electronic
baseline (path setup makes cycle-accurate numbers application dependent).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Optional, Sequence

import numpy as np
import tomli

from .calibration import CostCalibration
from .routing import RouteTable
from .techlib import LinkMode, TechnologyProfile, link_cost
from .topology import Topology
from .traffic import TrafficSpec


class LossPolicy(str, Enum):
    MIN = "min"
    MAX = "max"
    MEAN = "mean"
    PORT_TABLE = "port-table"


@dataclass(frozen=True)
class OpticalRouterProfile:
    name: str
    control_energy_fj: float
    loss_min_db: float
    loss_max_db: float
    area_um2: float
    port_loss_table: Optional[dict[tuple[str, str], float]] = None

    def __post_init__(self):
        if not 0 <= self.loss_min_db <= self.loss_max_db:
            raise ValueError(f"{self.name}: need 0 <= loss_min <= loss_max")
        if self.area_um2 <= 0:
            raise ValueError(f"{self.name}: area must be > 0")

    def traversal_loss_db(self, policy: LossPolicy, in_dir: str = "", out_dir: str = "") -> float:
        policy = LossPolicy(policy)
        if policy is LossPolicy.MIN:
            return self.loss_min_db
        if policy is LossPolicy.MAX:
            return self.loss_max_db
        if policy is LossPolicy.MEAN:
            return 0.5 * (self.loss_min_db + self.loss_max_db)
        if self.port_loss_table is None:
            raise ValueError(f"{self.name}: port-table loss policy without a port loss table")
        try:
            return self.port_loss_table[(in_dir, out_dir)]
        except KeyError:
            raise ValueError(f"{self.name}: no port loss entry for {(in_dir, out_dir)}") from None


def load_optical_routers(path: Optional[str] = None) -> dict[str, OpticalRouterProfile]:
    if path is None:
        text = resources.files("clearnoc.data").joinpath("profiles.toml").read_bytes()
    else:
        with open(path, "rb") as fh:
            text = fh.read()
    raw = tomli.loads(text.decode("utf-8")).get("optical_router", {})
    return {
        name: OpticalRouterProfile(
            name=name,
            control_energy_fj=t["control_energy_fj"],
            loss_min_db=t["loss_min_db"],
            loss_max_db=t["loss_max_db"],
            area_um2=t["area_um2"],
        )
        for name, t in raw.items()
    }


def _link_direction(topo: Topology, link) -> str:
    x0, y0 = topo.coord(link.src)
    x1, y1 = topo.coord(link.dst)
    if y1 == y0:
        return "e" if x1 > x0 else "w"
    return "s" if y1 > y0 else "n"


def path_loss(
    topo: Topology,
    route: Sequence[int],
    router_profile: OpticalRouterProfile,
    tech_profile: TechnologyProfile,
    policy: LossPolicy = LossPolicy.MEAN,
) -> float:
    """Total optical loss in dB along a route (list of link ids).

    One router traversal is charged per link; an empty route (source equals
    destination) costs endpoint losses only.
    """
    policy = LossPolicy(policy)
    total = tech_profile.modulator_insertion_loss_db + tech_profile.coupling_loss_db
    prev_dir = "local"
    for link_id in route:
        link = topo.links[link_id]
        out_dir = _link_direction(topo, link)
        total += router_profile.traversal_loss_db(policy, prev_dir, out_dir)
        total += tech_profile.waveguide_prop_loss_db_cm * link.length_mm / 10.0
        prev_dir = {"e": "w", "w": "e", "n": "s", "s": "n"}[out_dir]
    return total


@dataclass(frozen=True)
class EnergyProjection:
    energy_fj_per_bit: float          # traffic-weighted mean
    per_pair_fj: np.ndarray
    infeasible_pairs: tuple[tuple[int, int], ...]   # laser above the cap
    laser_cap_mw: float


def project_energy(
    topo: Topology,
    traffic: TrafficSpec,
    routes: RouteTable,
    router_profile: OpticalRouterProfile,
    tech_profile: TechnologyProfile,
    calib: CostCalibration,
    policy: LossPolicy = LossPolicy.MIN,
    laser_cap_mw: float = 100.0,
) -> EnergyProjection:
    """Traffic-weighted energy per bit of an all-optical network.

    Per pair: laser power closes the path loss budget at the projection
    receiver constant; energy/bit adds modulator, detector, and one circuit
    control charge.  Pairs whose laser power exceeds the cap are reported,
    not dropped (the model value is still the budget-implied power).
    """
    n = topo.n_nodes
    rates = traffic.rates
    sens = calib.projection.receiver_sensitivity_dbm
    rate_gbps = tech_profile.modulator_speed_system_gbps * tech_profile.wavelengths_per_link
    fixed_fj = tech_profile.modulator_energy_fj + tech_profile.detector_energy_fj
    policy = LossPolicy(policy)

    loss = np.full((n, n), tech_profile.modulator_insertion_loss_db + tech_profile.coupling_loss_db)
    if policy is LossPolicy.PORT_TABLE:
        for s in range(n):
            for d in range(n):
                if s != d:
                    loss[s, d] = path_loss(topo, routes.route(s, d), router_profile, tech_profile, policy)
    else:
        # Direction-independent policies vectorize: per-pair router count and
        # waveguide length come straight from the route table.
        pair_src, pair_dst, link_flat, entry_pair = routes.flat_index()
        lengths = np.array([l.length_mm for l in topo.links])
        n_pairs = len(pair_src)
        hops = np.bincount(entry_pair, minlength=n_pairs)
        path_mm = np.bincount(entry_pair, weights=lengths[link_flat], minlength=n_pairs)
        per_router = router_profile.traversal_loss_db(policy)
        loss[pair_src, pair_dst] += (
            hops * per_router + tech_profile.waveguide_prop_loss_db_cm * path_mm / 10.0
        )

    laser_mw = 10.0 ** ((sens + loss) / 10.0) / tech_profile.laser_efficiency
    per_pair = fixed_fj + router_profile.control_energy_fj + laser_mw / rate_gbps * 1e3
    np.fill_diagonal(per_pair, 0.0)
    off_diag = ~np.eye(n, dtype=bool)
    bad = (laser_mw > laser_cap_mw) & off_diag
    infeasible = tuple((int(s), int(d)) for s, d in zip(*np.nonzero(bad)))
    weight = rates / rates.sum()
    mean = float((weight * per_pair).sum())
    return EnergyProjection(mean, per_pair, infeasible, laser_cap_mw)


def project_area(
    topo: Topology,
    router_profile: OpticalRouterProfile,
    tech_profile: TechnologyProfile,
    calib: CostCalibration,
) -> float:
    """Total area in mm^2: optical routers plus their control electronics,
    plus waveguides and endpoint devices for every link."""
    router_um2 = topo.n_nodes * (router_profile.area_um2 + calib.projection.control_area_um2)
    link_um2 = 0.0
    for link in topo.links:
        link_um2 += link_cost(tech_profile, link.length_mm, LinkMode.NOC).area_um2
    return (router_um2 + link_um2) / 1e6


@dataclass(frozen=True)
class OpticalProjection:
    network: str
    energy_fj_per_bit: float
    total_area_mm2: float
    latency_factor: float

    def __post_init__(self):
        if self.energy_fj_per_bit <= 0 or self.total_area_mm2 <= 0 or self.latency_factor <= 0:
            raise ValueError("projection values must be positive")


def electronic_reference(topo: Topology, calib: CostCalibration) -> OpticalProjection:
    """The electronic-mesh baseline: pinned energy constant, calibrated area."""
    area_um2 = sum(calib.router.area(p) for p in topo.router_ports)
    elec = topo.base_tech
    for link in topo.links:
        area_um2 += link_cost(elec, link.length_mm, LinkMode.NOC).area_um2
    return OpticalProjection(
        network="electronic",
        energy_fj_per_bit=calib.projection.electronic_energy_nj_per_bit * 1e6,
        total_area_mm2=area_um2 / 1e6,
        latency_factor=1.0,
    )


@dataclass(frozen=True)
class RadarRow:
    network: str
    latency_factor: float
    energy_fj_per_bit: float
    area_mm2: float
    norm_latency: float
    norm_energy: float
    norm_area: float


RADAR_CSV_HEADER = (
    "network,latency_factor,energy_fj_per_bit,area_mm2,norm_latency,norm_energy,norm_area"
)


@dataclass(frozen=True)
class RadarComparison:
    rows: tuple[RadarRow, ...]
    winners: dict[str, str]   # axis -> network with the smallest cost


def radar_compare(projections: Sequence[OpticalProjection]) -> RadarComparison:
    """Normalize cost triples to the per-axis maximum; smaller is better on
    every axis, so the per-axis winner is the minimum."""
    if len(projections) < 2:
        raise ValueError("radar comparison needs at least two projections")
    max_lat = max(p.latency_factor for p in projections)
    max_e = max(p.energy_fj_per_bit for p in projections)
    max_a = max(p.total_area_mm2 for p in projections)
    rows = tuple(
        RadarRow(
            p.network,
            p.latency_factor,
            p.energy_fj_per_bit,
            p.total_area_mm2,
            p.latency_factor / max_lat,
            p.energy_fj_per_bit / max_e,
            p.total_area_mm2 / max_a,
        )
        for p in projections
    )
    winners = {
        "latency": min(projections, key=lambda p: (p.latency_factor, p.network)).network,
        "energy": min(projections, key=lambda p: (p.energy_fj_per_bit, p.network)).network,
        "area": min(projections, key=lambda p: (p.total_area_mm2, p.network)).network,
    }
    return RadarComparison(rows, winners)
