"""Deterministic cycle-level trace-driven NoC simulator.

Routers follow the shared microarchitecture: 4 virtual channels per input
port, 8-flit buffers per VC, and a 3-stage pipeline (route compute,
VC/switch allocation, switch traversal), so a flit departs a router at the
earliest 3 cycles after it arrived there.  Links add 1 cycle (electronic)
or 2 cycles (optical, O-E conversion at the receiver; the transmit stage
rides the router's output register).  Flow control is credit-based
wormhole: a head flit claims one downstream VC for its whole packet,
credits return one cycle after a buffer slot frees.

Arbitration is separable and input-first: each input port nominates one VC
round-robin among those whose flit is ready and whose output resources are
available, then each output link grants one nominee round-robin.  Ejection
drains through a dedicated local port with infinite rate.  There is no
randomness anywhere; identical inputs give identical results.

Deadlock avoidance: express chains make some shortest-latency routes
reverse x-direction (walk to a chain column and jump back over it, or jump
past the destination and walk back), which closes cyclic channel
dependencies inside a row.  VCs are therefore split into escalation
classes -- pools {0,1} before any reversal, {2,3} after the first, {3}
after the second -- and a packet's head may only claim VCs of its current
pool.  Escalation is one-way and every class's x-segments are monotone, so
each pool's channel graph is acyclic and the network is deadlock-free.
Shortest routes here reverse at most twice.

State is held in flat integer-indexed lists for speed: port ids are link
ids, with injection ports appended after them, and a (port, vc) pair maps
to slot ``port * NUM_VCS + vc``.
"""

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calibration import CostCalibration
from .constants import NUM_VCS, ROUTER_PIPELINE_STAGES, VC_BUFFER_FLITS
from .routing import RouteTable, compute_routes
from .techlib import LinkMode, link_cost
from .topology import Topology
from .traffic import PacketDescriptor

EJECT = -1
DEFAULT_MAX_CYCLES = 10_000_000

# VC pools per reversal-escalation class (see module docstring).
VC_CLASS_POOLS = ((0, 1), (2, 3), (3,))

# The hot loop encodes (port, vc) as port*4+vc and uses shifts/masks.
assert NUM_VCS == 4, "simulator slot packing assumes 4 virtual channels"


class SimTimeoutError(RuntimeError):
    def __init__(self, cycle: int, in_flight: int, detail: str):
        self.cycle = cycle
        self.in_flight = in_flight
        super().__init__(
            f"simulation did not drain within {cycle} cycles; "
            f"{in_flight} packets in flight ({detail})"
        )


@dataclass
class SimResult:
    avg_packet_latency: Optional[float]
    latency_histogram: dict[int, int]
    link_flit_counts: np.ndarray
    router_flit_counts: np.ndarray
    dynamic_energy_j: float
    sim_cycles: int
    packets_delivered: int
    flits_delivered: int
    packet_latencies: Optional[np.ndarray] = None
    max_vc_occupancy: int = 0


def _validate_packets(packets, n_nodes):
    last_cycle = -1
    for i, p in enumerate(packets):
        if p.inject_cycle < last_cycle:
            raise ValueError(f"packets not sorted by inject_cycle at index {i}")
        last_cycle = p.inject_cycle
        if p.src == p.dst:
            raise ValueError(f"packet {i} has src == dst == {p.src}")
        if not 0 <= p.src < n_nodes or not 0 <= p.dst < n_nodes:
            raise ValueError(f"packet {i} endpoints out of range")


def simulate(
    topo: Topology,
    packets: Sequence[PacketDescriptor],
    calib: Optional[CostCalibration] = None,
    seed: int = 0,
    max_cycles: int = DEFAULT_MAX_CYCLES,
    routes: Optional[RouteTable] = None,
    keep_packet_latencies: bool = False,
) -> SimResult:
    """Replay a packet trace to full drain and report latency and energy.

    ``seed`` is part of the public contract for reproducibility bookkeeping,
    but the simulator itself is randomness-free.  ``packets`` must be sorted
    by inject cycle.
    """
    del seed
    n_nodes = topo.n_nodes
    n_links = len(topo.links)
    _validate_packets(packets, n_nodes)
    if routes is None:
        routes = compute_routes(topo)

    link_dst = [l.dst for l in topo.links]
    link_lat = [l.latency_clk for l in topo.links]
    if calib is not None:
        link_dyn = [
            link_cost(l.tech, l.length_mm, LinkMode.NOC, calib=calib).dynamic_energy_per_flit_j
            for l in topo.links
        ]
        router_dyn = [calib.router.dynamic_j(p) for p in topo.router_ports]
    else:
        link_dyn = [0.0] * n_links
        router_dyn = [0.0] * n_nodes

    total_packets = len(packets)
    link_counts = np.zeros(n_links, dtype=np.int64)
    router_counts = np.zeros(n_nodes, dtype=np.int64)
    if total_packets == 0:
        return SimResult(None, {}, link_counts, router_counts, 0.0, 0, 0, 0,
                         np.array([], dtype=np.int64) if keep_packet_latencies else None, 0)

    # Per-packet routing: the link to take after arriving over each link,
    # plus the VC escalation class of each link on the route.
    coord_x = [topo.coord(node)[0] for node in range(n_nodes)]
    link_xdir = [
        (coord_x[l.dst] > coord_x[l.src]) - (coord_x[l.dst] < coord_x[l.src])
        for l in topo.links
    ]
    pkt_route = [routes.route(p.src, p.dst) for p in packets]
    pkt_next = []
    pkt_class = []
    for route in pkt_route:
        nxt = {}
        cls = {}
        level = 0
        xdir = 0
        for i, link_id in enumerate(route):
            nxt[link_id] = route[i + 1] if i + 1 < len(route) else EJECT
            d = link_xdir[link_id]
            if d != 0:
                if xdir != 0 and d != xdir:
                    level += 1
                xdir = d
            if level >= len(VC_CLASS_POOLS):
                raise ValueError(
                    "route reverses x-direction more than twice; "
                    "VC escalation classes cannot cover it"
                )
            cls[link_id] = level
        pkt_next.append(nxt)
        pkt_class.append(cls)
    pkt_first = [route[0] for route in pkt_route]
    pkt_flits = [p.flits for p in packets]
    pkt_inject = [p.inject_cycle for p in packets]

    # Flat state: port ids 0..n_links-1 are links, n_links..n_links+n_nodes-1
    # are injection ports; slot = port * NUM_VCS + vc.
    n_ports = n_links + n_nodes
    vcs = NUM_VCS
    bufs = [deque() for _ in range(n_ports * vcs)]
    credits = [VC_BUFFER_FLITS] * (n_links * vcs)
    owner = [-1] * (n_ports * vcs)        # packet id holding the slot, -1 free
    port_router = link_dst + list(range(n_nodes))
    occupied = [set() for _ in range(n_nodes)]
    active = set()

    pkt_out_vc: dict[int, int] = {}       # pkt * n_links + out_link -> vc

    arrivals: dict[int, list] = {}
    credit_events: dict[int, list] = {}
    owner_events: dict[int, list] = {}

    # Injection: global pointer feeds per-source FIFO queues as inject
    # cycles come due; each source streams one packet at a time.
    ready_q: dict[int, deque] = {}
    waiting = set()
    streaming: dict[int, tuple] = {}       # src -> (pkt, flits left, slot)
    gptr = 0

    rr_input: dict[int, int] = {}
    rr_output: dict[int, int] = {}

    energy = 0.0
    latencies: dict[int, int] = {}
    histogram: dict[int, int] = {}
    delivered = 0
    flits_delivered = 0
    max_occ = 0
    pipeline = ROUTER_PIPELINE_STAGES
    t = pkt_inject[0]

    while delivered < total_packets:
        if t > max_cycles:
            in_flight = total_packets - delivered
            busiest = max(((len(q), i) for i, q in enumerate(bufs) if q), default=(0, None))
            raise SimTimeoutError(
                max_cycles, in_flight,
                f"busiest slot {busiest[1]} holds {busiest[0]} flits"
            )

        # Phase 1: deferred credit/owner releases, then link arrivals.
        for slot in credit_events.pop(t, ()):
            credits[slot] += 1
        for slot in owner_events.pop(t, ()):
            owner[slot] = -1
        for slot, pkt, seq, ready in arrivals.pop(t, ()):
            q = bufs[slot]
            q.append((pkt, seq, ready))
            router = port_router[slot >> 2]
            occupied[router].add(slot)
            active.add(router)
            if len(q) > max_occ:
                max_occ = len(q)

        # Phase 2: source injection, one flit per source per cycle.
        while gptr < total_packets and pkt_inject[gptr] <= t:
            src = packets[gptr].src
            ready_q.setdefault(src, deque()).append(gptr)
            waiting.add(src)
            gptr += 1
        if streaming:
            for src in sorted(streaming):
                pkt, left, slot = streaming[src]
                q = bufs[slot]
                if len(q) < VC_BUFFER_FLITS:
                    q.append((pkt, pkt_flits[pkt] - left, t + pipeline))
                    occupied[src].add(slot)
                    active.add(src)
                    if len(q) > max_occ:
                        max_occ = len(q)
                    if left == 1:
                        del streaming[src]
                    else:
                        streaming[src] = (pkt, left - 1, slot)
        if waiting:
            started = []
            for src in sorted(waiting):
                if src in streaming:
                    continue
                pkt = ready_q[src][0]
                base = (n_links + src) * vcs
                for v in VC_CLASS_POOLS[0]:
                    slot = base + v
                    if owner[slot] >= 0 or len(bufs[slot]) >= VC_BUFFER_FLITS:
                        continue
                    owner[slot] = pkt
                    bufs[slot].append((pkt, 0, t + pipeline))
                    occupied[src].add(slot)
                    active.add(src)
                    if len(bufs[slot]) > max_occ:
                        max_occ = len(bufs[slot])
                    ready_q[src].popleft()
                    if not ready_q[src]:
                        started.append(src)
                    if pkt_flits[pkt] > 1:
                        streaming[src] = (pkt, pkt_flits[pkt] - 1, slot)
                    break
            for src in started:
                waiting.discard(src)

        # Phase 3: router allocation and switch traversal.
        for router in sorted(active):
            occ = occupied[router]
            if not occ:
                active.discard(router)
                continue
            # Stage 1: eligible requests per input port; nominate one VC per
            # port round-robin (a blocked VC must not starve its port-mates).
            by_port: dict[int, list] = {}
            for slot in sorted(occ):
                q = bufs[slot]
                pkt, seq, ready = q[0]
                if ready > t:
                    continue
                port = slot >> 2
                nxt = pkt_next[pkt][port] if port < n_links else pkt_first[pkt]
                if nxt >= 0:
                    out_vc = pkt_out_vc.get(pkt * n_links + nxt)
                    if out_vc is not None:
                        if credits[nxt * vcs + out_vc] <= 0:
                            continue
                    else:
                        nb = nxt * vcs
                        if not any(
                            owner[nb + v] < 0 and credits[nb + v] > 0
                            for v in VC_CLASS_POOLS[pkt_class[pkt][nxt]]
                        ):
                            continue
                by_port.setdefault(port, []).append((slot, nxt))

            if not by_port:
                continue
            ejects = []
            by_out: dict[int, list] = {}
            for port in sorted(by_port):
                cands = by_port[port]
                ptr = rr_input.get(port, 0)
                slot, nxt = min(cands, key=lambda sn: (sn[0] - ptr) & 3)
                if nxt == EJECT:
                    ejects.append(slot)
                else:
                    by_out.setdefault(nxt, []).append(slot)

            for slot in ejects:
                q = bufs[slot]
                pkt, seq, _ready = q.popleft()
                if not q:
                    occ.discard(slot)
                port = slot >> 2
                if port < n_links:
                    credit_events.setdefault(t + 1, []).append(slot)
                if seq == pkt_flits[pkt] - 1:
                    owner_events.setdefault(t + 1, []).append(slot)
                    if port < n_links:
                        del pkt_out_vc[pkt * n_links + port]
                    latency = t - pkt_inject[pkt]
                    latencies[pkt] = latency
                    histogram[latency] = histogram.get(latency, 0) + 1
                    delivered += 1
                router_counts[router] += 1
                energy += router_dyn[router]
                flits_delivered += 1
                rr_input[port] = (slot + 1) & 3

            for out_link in sorted(by_out):
                cands = by_out[out_link]
                ptr = rr_output.get(out_link, 0)
                n_c = len(cands)
                order = sorted(range(n_c), key=lambda i: ((i - ptr) % n_c, i))
                ob = out_link * vcs
                for i in order:
                    slot = cands[i]
                    pkt, seq, _ready = bufs[slot][0]
                    vckey = pkt * n_links + out_link
                    out_vc = pkt_out_vc.get(vckey)
                    if out_vc is None:
                        for v in VC_CLASS_POOLS[pkt_class[pkt][out_link]]:
                            if owner[ob + v] < 0 and credits[ob + v] > 0:
                                out_vc = v
                                break
                        if out_vc is None:
                            continue
                        owner[ob + out_vc] = pkt
                        pkt_out_vc[vckey] = out_vc
                    elif credits[ob + out_vc] <= 0:
                        continue
                    credits[ob + out_vc] -= 1
                    q = bufs[slot]
                    q.popleft()
                    if not q:
                        occ.discard(slot)
                    port = slot >> 2
                    if port < n_links:
                        credit_events.setdefault(t + 1, []).append(slot)
                    if seq == pkt_flits[pkt] - 1:
                        owner_events.setdefault(t + 1, []).append(slot)
                        if port < n_links:
                            del pkt_out_vc[pkt * n_links + port]
                    arr = t + link_lat[out_link]
                    arrivals.setdefault(arr, []).append(
                        (ob + out_vc, pkt, seq, arr + pipeline)
                    )
                    router_counts[router] += 1
                    link_counts[out_link] += 1
                    energy += router_dyn[router] + link_dyn[out_link]
                    rr_input[port] = (slot + 1) & 3
                    rr_output[out_link] = (i + 1) % n_c
                    break

        # Fast-forward over idle gaps when nothing is buffered or streaming.
        if active or streaming or waiting:
            t += 1
        else:
            candidates = [min(ev) for ev in (arrivals, credit_events, owner_events) if ev]
            if gptr < total_packets:
                candidates.append(pkt_inject[gptr])
            if not candidates:
                raise SimTimeoutError(t, total_packets - delivered, "no pending events")
            t = max(t + 1, min(candidates))

    # Post-drain consistency: every credit must round-trip and every VC must
    # be released once the network is empty.
    for events in credit_events.values():
        for slot in events:
            credits[slot] += 1
    if any(bufs):
        raise AssertionError("drained simulation left buffered flits")
    bad = [i for i, c in enumerate(credits) if c != VC_BUFFER_FLITS]
    if bad:
        raise AssertionError(f"credits did not round-trip on slots {bad[:4]}")
    for events in owner_events.values():
        for slot in events:
            owner[slot] = -1
    if any(o >= 0 for o in owner):
        raise AssertionError("drained simulation left owned VCs")
    if pkt_out_vc:
        raise AssertionError("drained simulation left stale VC assignments")

    lat_arr = None
    if keep_packet_latencies:
        lat_arr = np.array([latencies[i] for i in range(total_packets)], dtype=np.int64)
    avg = float(np.mean(list(latencies.values()))) if latencies else None
    return SimResult(
        avg_packet_latency=avg,
        latency_histogram=histogram,
        link_flit_counts=link_counts,
        router_flit_counts=router_counts,
        dynamic_energy_j=energy,
        sim_cycles=t,
        packets_delivered=delivered,
        flits_delivered=flits_delivered,
        packet_latencies=lat_arr,
        max_vc_occupancy=max_occ,
    )


def compare_latency(
    topologies: Sequence[tuple[str, Topology]],
    packets: Sequence[PacketDescriptor],
    calib: Optional[CostCalibration] = None,
    max_cycles: int = DEFAULT_MAX_CYCLES,
) -> list[tuple[str, float, float]]:
    """Replay one trace on several topologies; speedups are relative to the
    first topology in the list."""
    rows = []
    baseline = None
    for name, topo in topologies:
        result = simulate(topo, packets, calib=calib, max_cycles=max_cycles)
        avg = result.avg_packet_latency
        if baseline is None:
            baseline = avg
        rows.append((name, avg, baseline / avg if avg else float("nan")))
    return rows


COMPARE_CSV_HEADER = "topology,avg_latency_clk,speedup_vs_first"


def dynamic_energy_report(
    results: dict[str, SimResult],
    calib: CostCalibration,
) -> list[tuple[str, float, float]]:
    """Scale simulated dynamic energy to the calibration reference volume.

    Energy is linear in trace volume for fixed routing, so a desk-scale
    trace extrapolates exactly to the reference workload size.
    """
    rows = []
    for name, res in results.items():
        if res.flits_delivered == 0:
            rows.append((name, 0.0, 0.0))
            continue
        scale = calib.reference_volume_flits / res.flits_delivered
        rows.append((name, res.dynamic_energy_j, res.dynamic_energy_j * scale))
    return rows


ENERGY_CSV_HEADER = "variant,sim_energy_j,scaled_energy_j"
