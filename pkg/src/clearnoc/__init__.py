"""clearnoc: design-space exploration and cycle-level simulation for hybrid
opto-electronic networks-on-chip."""

__version__ = "0.1.0"

from .techlib import (  # noqa: F401
    LinkCostVector,
    LinkMode,
    TechKind,
    TechnologyProfile,
    clear_link,
    clear_sweep,
    default_profiles,
    link_cost,
)
from .topology import Topology, add_express_links, aggregate_capability, build_mesh  # noqa: F401
from .traffic import TrafficModelConfig, TrafficSpec, generate_synthetic  # noqa: F401
from .routing import accumulate_loads, compute_routes  # noqa: F401
from .calibration import CostCalibration, default_calibration, load_calibration  # noqa: F401
