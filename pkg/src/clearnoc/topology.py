"""Mesh and express-link topology construction.

Nodes sit on a k x k grid, id = y*k + x.  All links are unidirectional and
come in matched forward/reverse pairs.  Express links run horizontally only:
per row, chains start at column 0 and stride `hops` columns as far as they
fit, in both directions.  Routers on express chains gain one port per
express neighbor (5 base ports -> 6 at chain ends, 7 at chain interiors).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from .constants import LINK_CAPACITY_GBPS
from .techlib import TechKind, TechnologyProfile

BASE_ROUTER_PORTS = 5
MAX_ROUTER_PORTS = 7


class LinkRole(str, Enum):
    BASE = "base"
    EXPRESS = "express"


def link_latency_clk(tech: TechnologyProfile) -> int:
    """1 cycle for electronic links, 2 for optical (O-E conversion)."""
    return 1 if tech.kind is TechKind.ELECTRONIC else 2


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int
    role: LinkRole
    length_mm: float
    tech: TechnologyProfile
    latency_clk: int
    capacity_gbps: float = LINK_CAPACITY_GBPS


@dataclass(frozen=True)
class Topology:
    k: int
    core_spacing_mm: float
    links: tuple[Link, ...]
    base_tech: TechnologyProfile
    express_tech: Optional[TechnologyProfile] = None
    express_hops: Optional[int] = None
    router_ports: tuple[int, ...] = ()

    @property
    def n_nodes(self) -> int:
        return self.k * self.k

    @property
    def name(self) -> str:
        base = f"mesh{self.k}-{self.base_tech.name}"
        if self.express_hops:
            base += f"+{self.express_tech.name}{self.express_hops}"
        return base

    def coord(self, node: int) -> tuple[int, int]:
        return node % self.k, node // self.k

    def node_id(self, x: int, y: int) -> int:
        return y * self.k + x

    def links_from(self, node: int) -> list[Link]:
        return [l for l in self.links if l.src == node]

    def express_links(self) -> list[Link]:
        return [l for l in self.links if l.role is LinkRole.EXPRESS]


def build_mesh(k: int, base_tech: TechnologyProfile, core_spacing_mm: float = 1.0) -> Topology:
    """Plain k x k mesh: 4*k*(k-1) unidirectional links of one core spacing."""
    if k < 2:
        raise ValueError(f"mesh dimension must be >= 2, got {k}")
    latency = link_latency_clk(base_tech)
    links = []

    def add_pair(a: int, b: int):
        links.append(Link(len(links), a, b, LinkRole.BASE, core_spacing_mm, base_tech, latency))
        links.append(Link(len(links), b, a, LinkRole.BASE, core_spacing_mm, base_tech, latency))

    for y in range(k):
        for x in range(k):
            node = y * k + x
            if x + 1 < k:
                add_pair(node, node + 1)
            if y + 1 < k:
                add_pair(node, node + k)

    ports = tuple(BASE_ROUTER_PORTS for _ in range(k * k))
    return Topology(k, core_spacing_mm, tuple(links), base_tech, router_ports=ports)


def express_chain_columns(k: int, hops: int) -> list[int]:
    """Chain anchor columns: 0, hops, 2*hops, ... as far as they fit."""
    return list(range(0, k, hops))


def add_express_links(topo: Topology, hops: int, express_tech: TechnologyProfile) -> Topology:
    """Return a new topology with horizontal express links of span `hops`.

    Chains anchor at column 0; a trailing remainder shorter than `hops`
    gets no express link.
    """
    if topo.express_hops is not None:
        raise ValueError("topology already carries express links")
    if not 2 <= hops <= topo.k - 1:
        raise ValueError(f"express hops must be in [2, {topo.k - 1}], got {hops}")

    latency = link_latency_clk(express_tech)
    length = hops * topo.core_spacing_mm
    links = list(topo.links)
    extra_ports = [0] * topo.n_nodes
    cols = express_chain_columns(topo.k, hops)
    for y in range(topo.k):
        for c0, c1 in zip(cols, cols[1:]):
            a = topo.node_id(c0, y)
            b = topo.node_id(c1, y)
            links.append(Link(len(links), a, b, LinkRole.EXPRESS, length, express_tech, latency))
            links.append(Link(len(links), b, a, LinkRole.EXPRESS, length, express_tech, latency))
            extra_ports[a] += 1
            extra_ports[b] += 1

    ports = tuple(BASE_ROUTER_PORTS + e for e in extra_ports)
    if max(ports) > MAX_ROUTER_PORTS:
        raise ValueError(f"router port count exceeds {MAX_ROUTER_PORTS}")
    return Topology(
        topo.k,
        topo.core_spacing_mm,
        tuple(links),
        topo.base_tech,
        express_tech=express_tech,
        express_hops=hops,
        router_ports=ports,
    )


def aggregate_capability(topo: Topology) -> float:
    """Sum of all unidirectional link capacities divided by node count, Gb/s.

    Computed with exact rational arithmetic; the result is returned as a
    float (exact for the dyadic capacities used here).
    """
    total = sum((Fraction(l.capacity_gbps) for l in topo.links), Fraction(0))
    return float(total / topo.n_nodes)


# -- line-oriented serialization ------------------------------------------
#
# Format (UTF-8, '#' comments):
#   topology <k> <core_spacing_mm> <base_tech> [<express_tech> <hops>]
#   node <id> <x> <y> <ports>
#   link <id> <src> <dst> <role> <length_mm> <tech> <latency_clk> <capacity_gbps>


def save_topology(topo: Topology, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# clearnoc topology\n")
        head = f"topology {topo.k} {topo.core_spacing_mm:g} {topo.base_tech.name}"
        if topo.express_hops:
            head += f" {topo.express_tech.name} {topo.express_hops}"
        fh.write(head + "\n")
        for node in range(topo.n_nodes):
            x, y = topo.coord(node)
            fh.write(f"node {node} {x} {y} {topo.router_ports[node]}\n")
        for l in topo.links:
            fh.write(
                f"link {l.id} {l.src} {l.dst} {l.role.value} {l.length_mm:g} "
                f"{l.tech.name} {l.latency_clk} {l.capacity_gbps:g}\n"
            )


class TopologyFormatError(ValueError):
    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")


def load_topology(path: str, profiles: dict[str, TechnologyProfile]) -> Topology:
    """Rebuild a topology from its serialized form and cross-check it."""
    header = None
    ports: dict[int, int] = {}
    link_rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "topology":
                    header = parts[1:]
                elif parts[0] == "node":
                    ports[int(parts[1])] = int(parts[4])
                elif parts[0] == "link":
                    link_rows.append(parts[1:])
                else:
                    raise ValueError(f"unknown record {parts[0]!r}")
            except (IndexError, ValueError) as exc:
                raise TopologyFormatError(path, lineno, str(exc)) from exc
    if header is None:
        raise TopologyFormatError(path, 0, "missing topology header record")

    k = int(header[0])
    spacing = float(header[1])
    base = profiles[header[2]]
    topo = build_mesh(k, base, spacing)
    if len(header) > 3:
        topo = add_express_links(topo, int(header[4]), profiles[header[3]])

    if len(link_rows) != len(topo.links):
        raise TopologyFormatError(path, 0, f"expected {len(topo.links)} links, file has {len(link_rows)}")
    for row in link_rows:
        lid, src, dst = int(row[0]), int(row[1]), int(row[2])
        link = topo.links[lid]
        if (link.src, link.dst, link.role.value) != (src, dst, row[3]):
            raise TopologyFormatError(path, 0, f"link {lid} does not match constructed topology")
    for node, p in ports.items():
        if topo.router_ports[node] != p:
            raise TopologyFormatError(path, 0, f"node {node} port count mismatch")
    return topo
