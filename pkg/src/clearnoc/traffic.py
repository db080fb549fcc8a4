"""Synthetic traffic statistics and application-trace handling.

Synthetic demand follows a two-part statistical model: destination weights
per source decay geometrically with base-mesh Manhattan hop distance
(acceptance probability ``p``; low p means longer hops), and per-node
injection fractions are folded-Gaussian draws with spread ``sigma`` (larger
sigma means more nodes inject).  Rates are scaled so the busiest source
injects exactly ``max_injection_rate`` flits per cycle.

Hop distances always use the base mesh, express links or not: demand is a
workload property, not a topology property.

Traces are plaintext, one message per line::

    <inject_cycle> <src_id> <dst_id> <payload_bytes>

with ``#`` comments.  Messages are split into 32-flit packets plus a 1-flit
tail for small remainders (64-bit flits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .constants import DEFAULT_SEED, FLIT_BYTES
from .topology import Topology

LARGE_PACKET_FLITS = 32
LARGE_PACKET_BYTES = LARGE_PACKET_FLITS * FLIT_BYTES


@dataclass(frozen=True)
class TrafficModelConfig:
    p: float = 0.02
    sigma: float = 0.4
    max_injection_rate: float = 0.1
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"acceptance probability p must be in (0, 1], got {self.p}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 < self.max_injection_rate <= 1:
            raise ValueError(
                f"max injection rate must be in (0, 1] flits/cycle, got {self.max_injection_rate}"
            )


@dataclass(frozen=True)
class TrafficSpec:
    """N x N flit-rate matrix (flits/cycle), zero diagonal."""

    rates: np.ndarray

    def __post_init__(self):
        if (self.rates < 0).any():
            raise ValueError("traffic rates must be >= 0")
        if np.diagonal(self.rates).any():
            raise ValueError("traffic matrix diagonal must be zero")

    @property
    def n_nodes(self) -> int:
        return self.rates.shape[0]

    def per_source_totals(self) -> np.ndarray:
        return self.rates.sum(axis=1)

    def scaled_to(self, max_rate: float) -> "TrafficSpec":
        """Rescale so the busiest source injects ``max_rate`` flits/cycle."""
        peak = self.per_source_totals().max()
        if peak == 0:
            return self
        return TrafficSpec(self.rates * (max_rate / peak))


def manhattan_distances(k: int) -> np.ndarray:
    """Base-mesh hop distance matrix for a k x k grid."""
    ids = np.arange(k * k)
    x = ids % k
    y = ids // k
    return np.abs(x[:, None] - x[None, :]) + np.abs(y[:, None] - y[None, :])


def hop_weights(k: int, p: float) -> np.ndarray:
    """Destination weights w(s,d) ~ p*(1-p)^(h-1), normalized per source."""
    h = manhattan_distances(k)
    # Clamp the diagonal's h=0 before exponentiating (it is zeroed anyway).
    w = p * (1.0 - p) ** (np.maximum(h, 1) - 1.0)
    np.fill_diagonal(w, 0.0)
    return w / w.sum(axis=1, keepdims=True)


def expected_hop_distance(k: int, p: float) -> float:
    """Closed-form mean hop distance of the synthetic model (uniform sources)."""
    h = manhattan_distances(k)
    w = hop_weights(k, p)
    return float((w * h).sum() / k / k)


def generate_synthetic(topo: Topology, config: TrafficModelConfig) -> TrafficSpec:
    """Deterministic synthetic flit-rate matrix for (topology, config)."""
    k = topo.k
    weights = hop_weights(k, config.p)
    rng = np.random.default_rng(config.seed)
    g = np.abs(rng.normal(0.0, config.sigma, size=k * k))
    g = np.clip(g, 0.0, 1.0)
    if g.max() == 0:
        raise ValueError("degenerate injection draw: all sources at zero")
    g = g * (config.max_injection_rate / g.max())
    return TrafficSpec(g[:, None] * weights)


# -- traces ----------------------------------------------------------------


@dataclass(frozen=True)
class TraceMessage:
    inject_cycle: int
    src: int
    dst: int
    payload_bytes: int


@dataclass(frozen=True)
class PacketDescriptor:
    inject_cycle: int
    src: int
    dst: int
    flits: int

    def __post_init__(self):
        if self.flits not in (1, LARGE_PACKET_FLITS):
            raise ValueError(f"packets carry 1 or {LARGE_PACKET_FLITS} flits, got {self.flits}")


class TraceFormatError(ValueError):
    def __init__(self, path: str, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


def load_trace(path: str, n_nodes: int) -> list[TraceMessage]:
    """Parse a trace file; messages come back sorted by inject cycle."""
    messages = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise TraceFormatError(path, lineno, f"expected 4 fields, got {len(parts)}")
            try:
                cycle, src, dst, nbytes = (int(v) for v in parts)
            except ValueError as exc:
                raise TraceFormatError(path, lineno, f"non-integer field: {exc}") from exc
            if cycle < 0:
                raise TraceFormatError(path, lineno, f"negative inject cycle {cycle}")
            if not 0 <= src < n_nodes or not 0 <= dst < n_nodes:
                raise TraceFormatError(
                    path, lineno, f"src/dst ({src}, {dst}) out of range for {n_nodes} nodes"
                )
            if nbytes <= 0:
                raise TraceFormatError(path, lineno, f"payload must be positive, got {nbytes}")
            messages.append(TraceMessage(cycle, src, dst, nbytes))
    messages.sort(key=lambda m: (m.inject_cycle, m.src, m.dst))
    return messages


def save_trace(messages: Iterable[TraceMessage], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# inject_cycle src dst payload_bytes\n")
        for m in messages:
            fh.write(f"{m.inject_cycle} {m.src} {m.dst} {m.payload_bytes}\n")


def split_messages(messages: Iterable[TraceMessage], flit_bytes: int = FLIT_BYTES) -> list[PacketDescriptor]:
    """Split messages into 32-flit packets plus a small tail packet.

    A remainder larger than one flit still ships as a full 32-flit packet;
    a remainder of at most one flit ships as a 1-flit packet.
    """
    if flit_bytes != FLIT_BYTES:
        raise ValueError(f"flit size is fixed at {FLIT_BYTES} bytes")
    large_bytes = LARGE_PACKET_FLITS * flit_bytes
    packets = []
    for m in messages:
        if m.payload_bytes <= 0:
            raise ValueError(f"zero-byte message {m}")
        full, rem = divmod(m.payload_bytes, large_bytes)
        for _ in range(full):
            packets.append(PacketDescriptor(m.inject_cycle, m.src, m.dst, LARGE_PACKET_FLITS))
        if rem:
            flits = LARGE_PACKET_FLITS if rem > flit_bytes else 1
            packets.append(PacketDescriptor(m.inject_cycle, m.src, m.dst, flits))
    return packets


class TrafficPattern(str, Enum):
    ALL_TO_ALL = "all-to-all"
    NEIGHBOR_1HOP = "neighbor"
    LONG_RANGE = "long-range"
    SHORT_RANGE = "short-range"


LONG_RANGE_MIN_COLS = 8
SHORT_RANGE_MAX_HOPS = 3


def _pattern_pairs(pattern: TrafficPattern, topo: Topology) -> list[tuple[int, int]]:
    k = topo.k
    h = manhattan_distances(k)
    pairs = []
    for s in range(k * k):
        for d in range(k * k):
            if s == d:
                continue
            if pattern is TrafficPattern.ALL_TO_ALL:
                pairs.append((s, d))
            elif pattern is TrafficPattern.NEIGHBOR_1HOP:
                if h[s, d] == 1:
                    pairs.append((s, d))
            elif pattern is TrafficPattern.SHORT_RANGE:
                if 1 <= h[s, d] <= SHORT_RANGE_MAX_HOPS:
                    pairs.append((s, d))
            elif pattern is TrafficPattern.LONG_RANGE:
                # Same-row pairs at least LONG_RANGE_MIN_COLS columns apart.
                if s // k == d // k and abs(s % k - d % k) >= LONG_RANGE_MIN_COLS:
                    pairs.append((s, d))
    return pairs


def synthesize_benchmark_like(
    pattern: TrafficPattern | str,
    topo: Topology,
    volume_bytes_per_source: int,
    message_bytes: int = FLIT_BYTES,
    mean_injection_rate: float = 0.1,
) -> list[TraceMessage]:
    """Deterministic trace with a named hop-distance profile.

    Each source spreads ``volume_bytes_per_source`` equally over its
    destination set for the pattern, emitted as ``message_bytes`` messages
    round-robin over destinations, with inject cycles spaced so each source
    offers about ``mean_injection_rate`` flits per cycle.
    """
    pattern = TrafficPattern(pattern)
    if volume_bytes_per_source <= 0:
        raise ValueError("volume must be positive")
    pairs = _pattern_pairs(pattern, topo)
    by_source: dict[int, list[int]] = {}
    for s, d in pairs:
        by_source.setdefault(s, []).append(d)

    flits_per_msg = max(1, math.ceil(message_bytes / FLIT_BYTES))
    spacing = max(1, round(flits_per_msg / mean_injection_rate))
    messages = []
    for s, dsts in sorted(by_source.items()):
        n_msgs = max(1, round(volume_bytes_per_source / message_bytes))
        for i in range(n_msgs):
            d = dsts[i % len(dsts)]
            messages.append(TraceMessage(i * spacing, s, d, message_bytes))
    messages.sort(key=lambda m: (m.inject_cycle, m.src, m.dst))
    return messages


def sample_trace_from_spec(
    topo: Topology,
    spec: TrafficSpec,
    n_packets: int,
    seed: int = DEFAULT_SEED,
) -> list[TraceMessage]:
    """Sample single-flit messages with pair frequencies proportional to the
    rate matrix; used to drive the simulator from synthetic statistics."""
    rng = np.random.default_rng(seed)
    flat = spec.rates.ravel()
    prob = flat / flat.sum()
    n = spec.n_nodes
    total_rate = spec.rates.sum()
    picks = rng.choice(flat.size, size=n_packets, p=prob)
    messages = []
    # Spread packets so aggregate offered load approximates the spec total.
    horizon = max(1, int(n_packets / total_rate))
    cycles = rng.integers(0, horizon, size=n_packets)
    for c, pick in zip(cycles, picks):
        messages.append(TraceMessage(int(c), int(pick // n), int(pick % n), FLIT_BYTES))
    messages.sort(key=lambda m: (m.inject_cycle, m.src, m.dst))
    return messages
