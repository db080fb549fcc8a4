"""Network-wide constants shared by every evaluation mode.

All NoC-level evaluations run the same wire format: 64-bit flits on
50 Gb/s links clocked at 0.78125 GHz, so one link moves exactly one
flit per cycle.
"""

CORE_CLK_GHZ = 0.78125
FLIT_BITS = 64
FLIT_BYTES = FLIT_BITS // 8
LINK_CAPACITY_GBPS = 50.0

# 50e9 / 64 / 0.78125e9 == 1.0 flit per cycle, exactly.
FLITS_PER_CYCLE = LINK_CAPACITY_GBPS / FLIT_BITS / CORE_CLK_GHZ

# Router microarchitecture (shared by the analytical latency metric and
# the cycle simulator).
ROUTER_PIPELINE_STAGES = 3
NUM_VCS = 4
VC_BUFFER_FLITS = 8

# Default per-run RNG seed.  Chosen once by the calibration fit in
# tools/fit_calibration.py so the default synthetic-traffic workload
# reproduces the shipped reference utilization slopes; any other seed is
# equally valid input.
DEFAULT_SEED = 55

# Speed of light, mm per ps, for time-of-flight latency terms.
C_MM_PER_PS = 0.299792458
