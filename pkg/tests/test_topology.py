import pytest

from clearnoc.topology import (
    TopologyFormatError,
    add_express_links,
    aggregate_capability,
    build_mesh,
    express_chain_columns,
    load_topology,
    save_topology,
)


class TestBuildMesh:
    def test_smallest_mesh_link_count(self, profiles):
        assert len(build_mesh(2, profiles["electronic"]).links) == 8

    def test_16x16_link_count_and_latency(self, profiles):
        topo = build_mesh(16, profiles["electronic"])
        assert len(topo.links) == 960
        assert all(l.latency_clk == 1 for l in topo.links)

    def test_optical_mesh_links_take_two_cycles(self, profiles):
        topo = build_mesh(16, profiles["hyppi"])
        assert len(topo.links) == 960
        assert all(l.latency_clk == 2 for l in topo.links)

    def test_rejects_k_below_2(self, profiles):
        with pytest.raises(ValueError):
            build_mesh(1, profiles["electronic"])

    def test_node_id_convention(self, profiles):
        topo = build_mesh(4, profiles["electronic"])
        assert topo.coord(0) == (0, 0)
        assert topo.coord(7) == (3, 1)
        assert topo.node_id(3, 1) == 7

    def test_reverse_link_pairing(self, profiles):
        topo = build_mesh(5, profiles["electronic"])
        pairs = {(l.src, l.dst): l for l in topo.links}
        for l in topo.links:
            rev = pairs[(l.dst, l.src)]
            assert rev.role == l.role
            assert rev.length_mm == l.length_mm
            assert rev.tech is l.tech


class TestExpressLinks:
    def test_chain_columns(self):
        assert express_chain_columns(16, 3) == [0, 3, 6, 9, 12, 15]
        assert express_chain_columns(16, 5) == [0, 5, 10, 15]
        assert express_chain_columns(16, 15) == [0, 15]

    @pytest.mark.parametrize("hops,per_direction", [(3, 5), (5, 3), (15, 1)])
    def test_express_counts_per_row(self, profiles, mesh16, hops, per_direction):
        topo = add_express_links(mesh16, hops, profiles["hyppi"])
        express = topo.express_links()
        assert len(express) == per_direction * 2 * 16
        for row in range(16):
            row_links = [
                l for l in express if l.src // 16 == row and l.dst // 16 == row
            ]
            assert len(row_links) == per_direction * 2

    def test_express_geometry(self, profiles, mesh16):
        topo = add_express_links(mesh16, 3, profiles["hyppi"])
        for l in topo.express_links():
            assert l.length_mm == 3.0
            assert l.latency_clk == 2
            assert abs(l.src % 16 - l.dst % 16) == 3

    def test_electronic_express_latency_is_one(self, profiles, mesh16):
        topo = add_express_links(mesh16, 3, profiles["electronic"])
        assert all(l.latency_clk == 1 for l in topo.express_links())

    def test_port_counts(self, profiles, mesh16):
        topo = add_express_links(mesh16, 3, profiles["hyppi"])
        assert max(topo.router_ports) == 7
        # Chain interiors get 7 ports, chain ends 6, everyone else 5.
        sevens = sum(1 for p in topo.router_ports if p == 7)
        sixes = sum(1 for p in topo.router_ports if p == 6)
        assert sevens == 4 * 16
        assert sixes == 2 * 16

    def test_hops_range_enforced(self, profiles, mesh16):
        for hops in (0, 1, 16, 30):
            with pytest.raises(ValueError):
                add_express_links(mesh16, hops, profiles["hyppi"])

    def test_double_augmentation_rejected(self, profiles, mesh16):
        topo = add_express_links(mesh16, 3, profiles["hyppi"])
        with pytest.raises(ValueError):
            add_express_links(topo, 5, profiles["hyppi"])

    def test_reverse_pairing_holds_with_express(self, profiles, mesh16):
        topo = add_express_links(mesh16, 5, profiles["photonic"])
        pairs = {(l.src, l.dst): l for l in topo.links}
        for l in topo.links:
            rev = pairs[(l.dst, l.src)]
            assert rev.role == l.role and rev.length_mm == l.length_mm


class TestAggregateCapability:
    def test_plain_mesh_16(self, mesh16):
        assert aggregate_capability(mesh16) == 187.5

    @pytest.mark.parametrize("hops,expected", [(3, 218.75), (5, 206.25), (15, 193.75)])
    def test_express_variants(self, hyppi_express16, hops, expected):
        assert aggregate_capability(hyppi_express16[hops]) == expected

    def test_ordering_over_hops(self, mesh16, hyppi_express16):
        caps = {h: aggregate_capability(t) for h, t in hyppi_express16.items()}
        assert caps[3] > caps[5] > caps[15] > aggregate_capability(mesh16)

    def test_capability_independent_of_technology(self, profiles, mesh16):
        photonic = add_express_links(mesh16, 3, profiles["photonic"])
        hyppi = add_express_links(mesh16, 3, profiles["hyppi"])
        assert aggregate_capability(photonic) == aggregate_capability(hyppi)


class TestSerialization:
    def test_round_trip(self, profiles, tmp_path):
        topo = add_express_links(build_mesh(4, profiles["electronic"]), 3, profiles["hyppi"])
        path = tmp_path / "t.topo"
        save_topology(topo, str(path))
        loaded = load_topology(str(path), profiles)
        assert loaded.k == 4
        assert loaded.express_hops == 3
        assert len(loaded.links) == len(topo.links)
        assert loaded.router_ports == topo.router_ports

    def test_golden_example_file(self, profiles):
        from importlib import resources

        golden = resources.files("clearnoc.data").joinpath("golden_mesh4.topo")
        topo = load_topology(str(golden), profiles)
        assert topo.k == 4
        assert len(topo.links) == 48
        assert aggregate_capability(topo) == 150.0  # 48 links * 50 Gb/s / 16

    def test_corrupt_file_rejected(self, profiles, tmp_path):
        path = tmp_path / "bad.topo"
        path.write_text("node 0 0 0 5\n")   # no header
        with pytest.raises(TopologyFormatError):
            load_topology(str(path), profiles)

    def test_bad_record_reports_line(self, profiles, tmp_path):
        path = tmp_path / "bad2.topo"
        path.write_text("topology 4 1 electronic\nwhatever 1 2\n")
        with pytest.raises(TopologyFormatError) as err:
            load_topology(str(path), profiles)
        assert ":2:" in str(err.value)
