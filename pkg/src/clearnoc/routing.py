"""Deterministic oblivious shortest-path routing and link-load accounting.

Routes minimize end-to-end latency in clock cycles: each traversed link
contributes its link latency (1 clk electronic, 2 clks optical) and each
traversed router contributes the 3-stage pipeline delay, source and
destination routers included.  Ties break on fewer hops, then on lower
predecessor node id, so the route table is a pure function of the topology.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .constants import CORE_CLK_GHZ, FLIT_BITS, ROUTER_PIPELINE_STAGES
from .topology import Topology


class UnreachableError(ValueError):
    def __init__(self, src: int, dst: int):
        self.pair = (src, dst)
        super().__init__(f"no route from node {src} to node {dst}")


class RouteTable:
    """Per-ordered-pair link-id routes over one topology."""

    def __init__(self, topo: Topology, routes, latency, router_delay_clk: int):
        self.topo = topo
        self._routes = routes          # routes[s][d] -> tuple of link ids
        self._latency = latency        # latency[s][d] -> clocks
        self.router_delay_clk = router_delay_clk
        self._flat = None

    def route(self, src: int, dst: int) -> tuple[int, ...]:
        return self._routes[src][dst]

    def latency_clk(self, src: int, dst: int) -> int:
        return self._latency[src][dst]

    def all_pairs(self):
        n = self.topo.n_nodes
        for s in range(n):
            for d in range(n):
                if s != d:
                    yield s, d

    def latency_matrix(self) -> np.ndarray:
        return np.array(self._latency, dtype=float)

    def flat_index(self):
        """Flattened (pair -> links) arrays for vectorized load accumulation."""
        if self._flat is None:
            pair_src, pair_dst, link_flat, entry_pair = [], [], [], []
            idx = 0
            for s, d in self.all_pairs():
                path = self._routes[s][d]
                pair_src.append(s)
                pair_dst.append(d)
                link_flat.extend(path)
                entry_pair.extend([idx] * len(path))
                idx += 1
            self._flat = (
                np.array(pair_src, dtype=np.int64),
                np.array(pair_dst, dtype=np.int64),
                np.array(link_flat, dtype=np.int64),
                np.array(entry_pair, dtype=np.int64),
            )
        return self._flat


def compute_routes(topo: Topology, router_delay_clk: int = ROUTER_PIPELINE_STAGES) -> RouteTable:
    """Single-source shortest paths by latency from every source node."""
    n = topo.n_nodes
    adjacency: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for link in topo.links:
        # Edge weight: the link itself plus the pipeline of the router it
        # feeds.  The source router's own pipeline is added once per path.
        adjacency[link.src].append((link.dst, link.latency_clk + router_delay_clk, link.id))
    for nbrs in adjacency:
        nbrs.sort()

    routes = []
    latencies = []
    for src in range(n):
        dist = [None] * n       # (latency, hops) per node
        pred = [None] * n       # (pred node, link id)
        dist[src] = (0, 0)
        heap = [(0, 0, src)]
        while heap:
            lat, hops, node = heapq.heappop(heap)
            if (lat, hops) != dist[node]:
                continue
            for nxt, weight, link_id in adjacency[node]:
                cand = (lat + weight, hops + 1)
                cur = dist[nxt]
                if cur is None or cand < cur:
                    dist[nxt] = cand
                    pred[nxt] = (node, link_id)
                    heapq.heappush(heap, (cand[0], cand[1], nxt))
                elif cand == cur and node < pred[nxt][0]:
                    pred[nxt] = (node, link_id)

        src_routes = []
        src_lat = []
        for dst in range(n):
            if dst == src:
                src_routes.append(())
                src_lat.append(0)
                continue
            if dist[dst] is None:
                raise UnreachableError(src, dst)
            chain = []
            node = dst
            while node != src:
                p, link_id = pred[node]
                chain.append(link_id)
                node = p
            chain.reverse()
            src_routes.append(tuple(chain))
            # Whole-path latency includes the source router pipeline.
            src_lat.append(dist[dst][0] + router_delay_clk)
        routes.append(src_routes)
        latencies.append(src_lat)
    return RouteTable(topo, routes, latencies, router_delay_clk)


@dataclass
class LinkLoadMap:
    """Per-link flit rates plus per-router traversal rates, flits/cycle."""

    flit_rate: np.ndarray          # indexed by link id
    utilization: np.ndarray        # flit rate / link capacity in flits/cycle
    router_rate: np.ndarray        # traversal rate per router (src router included)

    @property
    def mean_utilization(self) -> float:
        return float(self.utilization.mean())


def link_capacity_flits_per_cycle(capacity_gbps: float) -> float:
    return capacity_gbps / FLIT_BITS / CORE_CLK_GHZ


def accumulate_loads(topo: Topology, routes: RouteTable, traffic) -> LinkLoadMap:
    """Map a source-destination rate matrix onto per-link flit rates.

    Utilization above 1 indicates oversubscription and is reported, not
    clamped.
    """
    rates = np.asarray(traffic.rates if hasattr(traffic, "rates") else traffic, dtype=float)
    n = topo.n_nodes
    if rates.shape != (n, n):
        raise ValueError(f"rate matrix shape {rates.shape} does not match {n} nodes")
    pair_src, pair_dst, link_flat, entry_pair = routes.flat_index()
    pair_rate = rates[pair_src, pair_dst]
    n_links = len(topo.links)
    flit_rate = np.bincount(link_flat, weights=pair_rate[entry_pair], minlength=n_links)
    link_dst = np.array([l.dst for l in topo.links])
    router_rate = np.bincount(pair_src, weights=pair_rate, minlength=n)
    router_rate += np.bincount(link_dst[link_flat], weights=pair_rate[entry_pair], minlength=n)
    cap = np.array([link_capacity_flits_per_cycle(l.capacity_gbps) for l in topo.links])
    return LinkLoadMap(flit_rate=flit_rate, utilization=flit_rate / cap, router_rate=router_rate)


LOAD_CSV_HEADER = "link_id,src,dst,role,flit_rate,utilization"


def load_rows(topo: Topology, load: LinkLoadMap):
    """Rows for the per-link utilization CSV dump."""
    for link in topo.links:
        yield (
            link.id,
            link.src,
            link.dst,
            link.role.value,
            load.flit_rate[link.id],
            load.utilization[link.id],
        )
