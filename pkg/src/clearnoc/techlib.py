"""Link technology library: device parameter sets, per-link cost vectors,
and the link-level capability/cost figure of merit.

A link is scored as capacity / (latency * energy * area).  Units are fixed
as Gb/s, ps, fJ/bit and um^2 for point-to-point links; only relative values
across technologies are meaningful, so no SI normalization is applied.

Two evaluation modes exist:

* ``BARE``  -- point-to-point device comparison: capacity is the peak device
  rate, latency is analog (time of flight plus transceiver delay, in ps).
* ``NOC``   -- system-level link inside a network: capacity is capped by the
  driver/SERDES rate, latency is quantized to clock cycles (1 electronic,
  2 optical), and DSENT-style static/dynamic figures are attached from the
  cost calibration when one is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from typing import Optional, Sequence

import tomli

from .constants import C_MM_PER_PS


class TechKind(str, Enum):
    ELECTRONIC = "electronic"
    PHOTONIC = "photonic"
    PLASMONIC = "plasmonic"
    HYPPI = "hyppi"


class LinkMode(str, Enum):
    BARE = "bare"
    NOC = "noc"


class ProfileError(ValueError):
    """A technology profile violates its invariants."""


class LinkInfeasibleError(ValueError):
    """The optical loss budget exceeds the maximum laser power."""

    def __init__(self, technology: str, length_mm: float, laser_mw: float, cap_mw: float):
        self.technology = technology
        self.length_mm = length_mm
        self.laser_mw = laser_mw
        self.cap_mw = cap_mw
        super().__init__(
            f"link infeasible at this length: {technology} at {length_mm} mm "
            f"needs {laser_mw:.3g} mW laser power (cap {cap_mw:.3g} mW)"
        )


@dataclass(frozen=True)
class TechnologyProfile:
    """Per-technology device parameters plus calibration constants.

    Electronic profiles null out the optical fields and instead carry the
    repeated-wire constants (per-segment latency/energy, wire pitch).
    """

    name: str
    kind: TechKind

    # Laser
    laser_efficiency: float = 0.0          # wall-plug fraction, (0, 1]
    laser_area_um2: float = 0.0

    # Modulator
    modulator_speed_device_gbps: float = 0.0
    modulator_speed_system_gbps: float = 0.0
    modulator_energy_fj: float = 0.0
    modulator_insertion_loss_db: float = 0.0
    modulator_extinction_ratio_db: float = 0.0
    modulator_area_um2: float = 0.0

    # Photodetector
    detector_energy_fj: float = 0.0
    detector_responsivity_a_w: float = 0.0
    detector_area_um2: float = 0.0

    # Waveguide
    waveguide_prop_loss_db_cm: float = 0.0
    waveguide_pitch_um: float = 0.0
    waveguide_width_um: float = 0.0
    coupling_loss_db: float = 0.0

    # Loss-budget calibration (Table omits detector sensitivity; exposed
    # as a calibration constant).
    receiver_sensitivity_dbm: float = -20.0
    wavelengths_per_link: int = 1

    # Latency model calibration
    group_index: float = 4.2
    transceiver_latency_ps: float = 0.0

    # Electronic repeated-wire model (electronic kind only)
    electronic_wire_pitch_nm: float = 0.0  # wire width + spacing
    bus_width_bits: int = 64
    repeater_segment_mm: float = 1.0
    fixed_latency_ps: float = 0.0
    latency_per_segment_ps: float = 0.0
    fixed_energy_fj: float = 0.0
    energy_per_segment_fj: float = 0.0
    endpoint_area_um2: float = 0.0

    def __post_init__(self):
        k = self.kind
        losses = (
            self.modulator_insertion_loss_db,
            self.coupling_loss_db,
            self.waveguide_prop_loss_db_cm,
        )
        if any(x < 0 for x in losses):
            raise ProfileError(f"{self.name}: loss values must be >= 0")
        if self.wavelengths_per_link < 1:
            raise ProfileError(f"{self.name}: wavelengths_per_link must be >= 1")
        if self.modulator_speed_system_gbps > self.modulator_speed_device_gbps:
            raise ProfileError(
                f"{self.name}: system rate {self.modulator_speed_system_gbps} exceeds "
                f"device rate {self.modulator_speed_device_gbps}"
            )
        if k is TechKind.ELECTRONIC:
            if any(x != 0 for x in losses):
                raise ProfileError(f"{self.name}: electronic profile must have zero optical losses")
            if self.electronic_wire_pitch_nm <= 0:
                raise ProfileError(f"{self.name}: electronic profile needs a wire pitch")
        else:
            if not 0 < self.laser_efficiency <= 1:
                raise ProfileError(f"{self.name}: laser efficiency must be in (0, 1]")
            if self.waveguide_prop_loss_db_cm <= 0:
                raise ProfileError(f"{self.name}: optical profile needs positive propagation loss")
            areas = (
                self.laser_area_um2,
                self.modulator_area_um2,
                self.detector_area_um2,
                self.waveguide_pitch_um,
            )
            if any(a <= 0 for a in areas):
                raise ProfileError(f"{self.name}: optical device areas must be > 0")

    @property
    def is_optical(self) -> bool:
        return self.kind is not TechKind.ELECTRONIC

    def endpoint_device_area_um2(self) -> float:
        """Laser + modulator + detector footprint for one wavelength."""
        return self.laser_area_um2 + self.modulator_area_um2 + self.detector_area_um2

    def path_loss_db(self, length_mm: float) -> float:
        """Endpoint insertion/coupling loss plus propagation loss over length."""
        return (
            self.modulator_insertion_loss_db
            + self.coupling_loss_db
            + self.waveguide_prop_loss_db_cm * length_mm / 10.0
        )

    def laser_power_mw(self, length_mm: float) -> float:
        """Wall-plug laser power satisfying the loss budget for one wavelength."""
        rx_mw = 10.0 ** (self.receiver_sensitivity_dbm / 10.0)
        return rx_mw * 10.0 ** (self.path_loss_db(length_mm) / 10.0) / self.laser_efficiency


@dataclass(frozen=True)
class LinkCostVector:
    """Cost factors for one link.

    ``latency`` is in ps for BARE mode and in clock cycles for NOC mode.
    ``static_power_w`` / ``dynamic_energy_per_flit_j`` are only populated in
    NOC mode when a cost calibration is supplied.
    """

    capacity_gbps: float
    latency: float
    energy_fj_per_bit: float
    area_um2: float
    static_power_w: float = 0.0
    dynamic_energy_per_flit_j: float = 0.0

    def __post_init__(self):
        for name in ("capacity_gbps", "latency", "energy_fj_per_bit", "area_um2",
                     "static_power_w", "dynamic_energy_per_flit_j"):
            if getattr(self, name) < 0:
                raise ValueError(f"cost vector field {name} must be >= 0")


DEFAULT_MAX_LASER_MW = 100.0


def link_cost(
    profile: TechnologyProfile,
    length_mm: float,
    mode: LinkMode = LinkMode.BARE,
    calib=None,
    max_laser_mw: float = DEFAULT_MAX_LASER_MW,
) -> LinkCostVector:
    """Cost vector of a single link of the given technology and length.

    Raises ``LinkInfeasibleError`` when an optical link's loss budget would
    need more than ``max_laser_mw`` of laser power.
    """
    if length_mm <= 0:
        raise ValueError(f"link length must be > 0, got {length_mm}")
    mode = LinkMode(mode)

    if profile.kind is TechKind.ELECTRONIC:
        cost = _electronic_cost(profile, length_mm, mode)
    else:
        cost = _optical_cost(profile, length_mm, mode, max_laser_mw)

    if mode is LinkMode.NOC and calib is not None:
        link_cal = calib.link(profile.kind.value)
        cost = replace(
            cost,
            static_power_w=link_cal.static_power_w(length_mm),
            dynamic_energy_per_flit_j=link_cal.dynamic_energy_per_flit_j(length_mm),
        )
    return cost


def _electronic_cost(profile: TechnologyProfile, length_mm: float, mode: LinkMode) -> LinkCostVector:
    segments = length_mm / profile.repeater_segment_mm
    energy = profile.fixed_energy_fj + segments * profile.energy_per_segment_fj
    bus_width_um = profile.bus_width_bits * profile.electronic_wire_pitch_nm * 1e-3
    area = profile.endpoint_area_um2 + bus_width_um * length_mm * 1e3
    if mode is LinkMode.BARE:
        capacity = profile.modulator_speed_device_gbps
        latency = profile.fixed_latency_ps + segments * profile.latency_per_segment_ps
    else:
        capacity = profile.modulator_speed_system_gbps * profile.wavelengths_per_link
        latency = 1.0
    return LinkCostVector(capacity, latency, energy, area)


def _optical_cost(
    profile: TechnologyProfile, length_mm: float, mode: LinkMode, max_laser_mw: float
) -> LinkCostVector:
    laser_mw = profile.laser_power_mw(length_mm)
    if laser_mw > max_laser_mw:
        raise LinkInfeasibleError(profile.name, length_mm, laser_mw, max_laser_mw)

    if mode is LinkMode.BARE:
        rate = profile.modulator_speed_device_gbps
        wavelengths = 1
        latency = profile.transceiver_latency_ps + length_mm * profile.group_index / C_MM_PER_PS
    else:
        rate = profile.modulator_speed_system_gbps
        wavelengths = profile.wavelengths_per_link
        latency = 2.0  # extra cycle for O-E conversion at the receiver

    # mW / Gbps == pJ/bit; each wavelength carries its own laser at `rate`.
    laser_fj_per_bit = laser_mw / rate * 1e3
    energy = profile.modulator_energy_fj + profile.detector_energy_fj + laser_fj_per_bit
    # WDM channels share one waveguide; endpoint devices are per wavelength.
    area = (
        wavelengths * profile.endpoint_device_area_um2()
        + profile.waveguide_pitch_um * length_mm * 1e3
    )
    capacity = rate * wavelengths
    return LinkCostVector(capacity, latency, energy, area)


def clear_link(cost: LinkCostVector) -> float:
    """capacity / (latency * energy * area), higher is better."""
    denom = cost.latency * cost.energy_fj_per_bit * cost.area_um2
    if denom <= 0:
        raise ValueError(
            "invalid cost vector: latency, energy and area must all be > 0 "
            f"(got {cost.latency}, {cost.energy_fj_per_bit}, {cost.area_um2})"
        )
    return cost.capacity_gbps / denom


@dataclass(frozen=True)
class SweepRow:
    technology: str
    length_mm: float
    capacity_gbps: float
    latency_ps: float
    energy_fj_per_bit: float
    area_um2: float
    clear: float


SWEEP_CSV_HEADER = "technology,length_mm,capacity_gbps,latency_ps,energy_fj_per_bit,area_um2,clear"


def clear_sweep(
    profiles: Sequence[TechnologyProfile],
    lengths_mm: Sequence[float],
    mode: LinkMode = LinkMode.BARE,
    max_laser_mw: float = DEFAULT_MAX_LASER_MW,
) -> list[SweepRow]:
    """One row per (technology, length); infeasible links carry CLEAR = 0."""
    if not profiles or not len(lengths_mm):
        raise ValueError("clear_sweep needs at least one profile and one length")
    rows = []
    for profile in profiles:
        for length in sorted(lengths_mm):
            try:
                cost = link_cost(profile, length, mode, max_laser_mw=max_laser_mw)
            except LinkInfeasibleError:
                rows.append(SweepRow(profile.name, length, 0.0, 0.0, 0.0, 0.0, 0.0))
                continue
            rows.append(
                SweepRow(
                    profile.name,
                    length,
                    cost.capacity_gbps,
                    cost.latency,
                    cost.energy_fj_per_bit,
                    cost.area_um2,
                    clear_link(cost),
                )
            )
    return rows


_PROFILE_FIELDS = {f for f in TechnologyProfile.__dataclass_fields__ if f != "name"}


def _profile_from_table(name: str, table: dict) -> TechnologyProfile:
    unknown = set(table) - _PROFILE_FIELDS
    if unknown:
        raise ProfileError(f"profile [{name}]: unknown keys {sorted(unknown)}")
    if "kind" not in table:
        raise ProfileError(f"profile [{name}]: missing 'kind'")
    kwargs = dict(table)
    kwargs["kind"] = TechKind(kwargs["kind"])
    return TechnologyProfile(name=name, **kwargs)


def load_profiles(path: Optional[str] = None) -> dict[str, TechnologyProfile]:
    """Load technology profiles from a TOML file (packaged defaults if None).

    Tables whose name starts with ``optical_router`` are skipped here; they
    belong to the all-optical projection module.
    """
    if path is None:
        text = resources.files("clearnoc.data").joinpath("profiles.toml").read_bytes()
    else:
        with open(path, "rb") as fh:
            text = fh.read()
    raw = tomli.loads(text.decode("utf-8"))
    profiles = {}
    for name, table in raw.items():
        if name == "optical_router":
            continue
        profiles[name] = _profile_from_table(name, table)
    return profiles


def default_profiles() -> dict[str, TechnologyProfile]:
    return load_profiles(None)
