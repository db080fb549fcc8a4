"""Cost calibration: per-component static power, dynamic energy per flit,
and area for routers and links.

The shipped ``calibration.toml`` pins these constants so that the default
16x16 network configurations reproduce the reference power/energy/area
totals documented there (the numbers come from an external circuit-level
estimation flow we cannot rerun, so they are data, not derived quantities).
Polynomials in link length express the superlinear growth of repeatered
electronic spans; optical links are dominated by their fixed laser budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import tomli


class CalibrationError(KeyError):
    """Missing or malformed calibration entry."""


def _polyval(coeffs: Sequence[float], x: float) -> float:
    return sum(c * x**i for i, c in enumerate(coeffs))


@dataclass(frozen=True)
class RouterCalibration:
    static_power_w: float
    static_power_per_extra_port_w: float
    dynamic_energy_per_flit_j: float
    dynamic_energy_per_extra_port_j: float
    area_um2: float
    area_per_extra_port_um2: float

    def static_w(self, ports: int) -> float:
        return self.static_power_w + max(0, ports - 5) * self.static_power_per_extra_port_w

    def dynamic_j(self, ports: int) -> float:
        """Per-flit traversal energy; wider crossbars switch more capacitance."""
        return self.dynamic_energy_per_flit_j + max(0, ports - 5) * self.dynamic_energy_per_extra_port_j

    def area(self, ports: int) -> float:
        return self.area_um2 + max(0, ports - 5) * self.area_per_extra_port_um2


@dataclass(frozen=True)
class LinkCalibration:
    technology: str
    static_power_poly_w: tuple[float, ...]
    dynamic_energy_per_flit_poly_j: tuple[float, ...]

    # The polynomials interpolate fitted spans (1..15 mm); clamp at zero so
    # out-of-range lengths degrade gracefully instead of going negative.

    def static_power_w(self, length_mm: float) -> float:
        return max(0.0, _polyval(self.static_power_poly_w, length_mm))

    def dynamic_energy_per_flit_j(self, length_mm: float) -> float:
        return max(0.0, _polyval(self.dynamic_energy_per_flit_poly_j, length_mm))


@dataclass(frozen=True)
class ProjectionCalibration:
    receiver_sensitivity_dbm: float
    control_area_um2: float
    electronic_energy_nj_per_bit: float
    optical_latency_factor: float


@dataclass(frozen=True)
class CostCalibration:
    router: RouterCalibration
    links: dict[str, LinkCalibration]
    projection: ProjectionCalibration
    reference_volume_flits: float

    def link(self, technology: str) -> LinkCalibration:
        try:
            return self.links[technology]
        except KeyError:
            raise CalibrationError(
                f"no link calibration for technology {technology!r}; "
                f"available: {sorted(self.links)}"
            ) from None


def load_calibration(path: Optional[str] = None) -> CostCalibration:
    """Load a calibration file (packaged defaults if None)."""
    if path is None:
        text = resources.files("clearnoc.data").joinpath("calibration.toml").read_bytes()
    else:
        with open(path, "rb") as fh:
            text = fh.read()
    raw = tomli.loads(text.decode("utf-8"))
    try:
        r = raw["router"]
        router = RouterCalibration(
            static_power_w=r["static_power_w"],
            static_power_per_extra_port_w=r["static_power_per_extra_port_w"],
            dynamic_energy_per_flit_j=r["dynamic_energy_per_flit_j"],
            dynamic_energy_per_extra_port_j=r["dynamic_energy_per_extra_port_j"],
            area_um2=r["area_um2"],
            area_per_extra_port_um2=r["area_per_extra_port_um2"],
        )
        links = {
            tech: LinkCalibration(
                technology=tech,
                static_power_poly_w=tuple(t["static_power_poly_w"]),
                dynamic_energy_per_flit_poly_j=tuple(t["dynamic_energy_per_flit_poly_j"]),
            )
            for tech, t in raw["link"].items()
        }
        p = raw["projection"]
        projection = ProjectionCalibration(
            receiver_sensitivity_dbm=p["receiver_sensitivity_dbm"],
            control_area_um2=p["control_area_um2"],
            electronic_energy_nj_per_bit=p["electronic_energy_nj_per_bit"],
            optical_latency_factor=p["optical_latency_factor"],
        )
        reference = raw["reference"]["volume_flits"]
    except KeyError as exc:
        raise CalibrationError(f"calibration file is missing entry {exc}") from exc
    return CostCalibration(router, links, projection, reference)


def default_calibration() -> CostCalibration:
    return load_calibration(None)
