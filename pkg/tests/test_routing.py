import numpy as np
import pytest

from clearnoc.routing import (
    UnreachableError,
    accumulate_loads,
    compute_routes,
    link_capacity_flits_per_cycle,
)
from clearnoc.topology import add_express_links, build_mesh
from clearnoc.traffic import TrafficModelConfig, generate_synthetic

from oracles import floyd_warshall_latency


class TestComputeRoutes:
    def test_2x2_tiebreak_goes_via_lower_id(self, profiles):
        topo = build_mesh(2, profiles["electronic"])
        routes = compute_routes(topo)
        path = routes.route(0, 3)
        assert len(path) == 2
        assert topo.links[path[0]].dst == 1  # via node 1, not node 2

    def test_self_route_empty(self, profiles):
        topo = build_mesh(3, profiles["electronic"])
        routes = compute_routes(topo)
        for s in range(9):
            assert routes.route(s, s) == ()
            assert routes.latency_clk(s, s) == 0

    def test_adjacent_latency(self, profiles):
        # 1 link + 2 router pipelines: the analytical floor the simulator hits.
        topo = build_mesh(3, profiles["electronic"])
        routes = compute_routes(topo)
        assert routes.latency_clk(0, 1) == 7

    def test_route_connectivity(self, profiles, mesh16, hyppi_express16):
        for topo in (mesh16, hyppi_express16[3]):
            routes = compute_routes(topo)
            for s, d in ((0, 255), (17, 200), (255, 0)):
                node = s
                for link_id in routes.route(s, d):
                    link = topo.links[link_id]
                    assert link.src == node
                    node = link.dst
                assert node == d

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_matches_brute_force_oracle_plain(self, profiles, k):
        topo = build_mesh(k, profiles["electronic"])
        routes = compute_routes(topo)
        oracle = floyd_warshall_latency(topo)
        for s in range(k * k):
            for d in range(k * k):
                assert routes.latency_clk(s, d) == oracle[s][d]

    @pytest.mark.parametrize("k,hops", [(4, 2), (4, 3), (6, 2), (6, 5)])
    def test_matches_brute_force_oracle_express(self, profiles, k, hops):
        topo = add_express_links(build_mesh(k, profiles["electronic"]), hops, profiles["hyppi"])
        routes = compute_routes(topo)
        oracle = floyd_warshall_latency(topo)
        for s in range(k * k):
            for d in range(k * k):
                assert routes.latency_clk(s, d) == oracle[s][d]

    def test_express_never_increases_latency(self, mesh16, hyppi_express16, routes16):
        base = routes16["mesh"].latency_matrix()
        for h in (3, 5, 15):
            lat = routes16[h].latency_matrix()
            assert (lat <= base + 1e-9).all()

    def test_full_row_express_route(self, routes16, hyppi_express16):
        # Node 0 to node 15 rides the single full-row express link.
        topo = hyppi_express16[15]
        routes = routes16[15]
        path = routes.route(0, 15)
        assert len(path) == 1
        assert topo.links[path[0]].role.value == "express"
        # 2-cycle optical link + two router pipelines.
        assert routes.latency_clk(0, 15) == 8

    def test_unreachable_pair_reported(self, profiles):
        # Corrupt a topology by dropping every link into node 3.
        topo = build_mesh(2, profiles["electronic"])
        links = tuple(l for l in topo.links if l.dst != 3)
        broken = type(topo)(
            topo.k, topo.core_spacing_mm, links, topo.base_tech, router_ports=topo.router_ports
        )
        with pytest.raises(UnreachableError) as err:
            compute_routes(broken)
        assert err.value.pair[1] == 3


class TestAccumulateLoads:
    def test_capacity_is_one_flit_per_cycle(self):
        assert link_capacity_flits_per_cycle(50.0) == 1.0

    def test_single_flow(self, profiles):
        topo = build_mesh(4, profiles["electronic"])
        routes = compute_routes(topo)
        rates = np.zeros((16, 16))
        rates[0, 5] = 0.1
        load = accumulate_loads(topo, routes, rates)
        path = routes.route(0, 5)
        for link in topo.links:
            expected = 0.1 if link.id in path else 0.0
            assert load.flit_rate[link.id] == pytest.approx(expected)
        assert load.utilization[path[0]] == pytest.approx(0.1)

    def test_flow_conservation_at_source(self, profiles):
        topo = build_mesh(4, profiles["electronic"])
        routes = compute_routes(topo)
        rates = np.zeros((16, 16))
        rates[5, :] = 0.002
        rates[5, 5] = 0.0
        load = accumulate_loads(topo, routes, rates)
        out_links = [l.id for l in topo.links if l.src == 5]
        assert load.flit_rate[out_links].sum() == pytest.approx(rates[5].sum())

    def test_translated_flows_load_translated_links(self, profiles):
        # Translation symmetry: shifting a flow one row down shifts its
        # link loads one row down.
        topo = build_mesh(4, profiles["electronic"])
        routes = compute_routes(topo)
        r1 = np.zeros((16, 16))
        r1[0, 3] = 0.05
        r2 = np.zeros((16, 16))
        r2[4, 7] = 0.05
        l1 = accumulate_loads(topo, routes, r1)
        l2 = accumulate_loads(topo, routes, r2)
        shift = {}
        for l in topo.links:
            if l.src + 4 < 16 and l.dst + 4 < 16:
                twin = next(
                    t.id for t in topo.links if t.src == l.src + 4 and t.dst == l.dst + 4
                )
                shift[l.id] = twin
        for lid, twin in shift.items():
            assert l1.flit_rate[lid] == pytest.approx(l2.flit_rate[twin])

    def test_router_traversal_rate(self, profiles):
        topo = build_mesh(4, profiles["electronic"])
        routes = compute_routes(topo)
        rates = np.zeros((16, 16))
        rates[0, 5] = 0.1
        load = accumulate_loads(topo, routes, rates)
        path = routes.route(0, 5)
        on_path = {0} | {topo.links[lid].dst for lid in path}
        for node in range(16):
            expected = 0.1 if node in on_path else 0.0
            assert load.router_rate[node] == pytest.approx(expected)

    def test_oversubscription_reported_not_clamped(self, profiles):
        topo = build_mesh(2, profiles["electronic"])
        routes = compute_routes(topo)
        rates = np.zeros((4, 4))
        rates[0, 1] = 1.7
        load = accumulate_loads(topo, routes, rates)
        assert load.utilization.max() == pytest.approx(1.7)

    def test_synthetic_spec_accepted_directly(self, mesh16, routes16):
        spec = generate_synthetic(mesh16, TrafficModelConfig())
        load = accumulate_loads(mesh16, routes16["mesh"], spec)
        assert load.flit_rate.sum() > 0
