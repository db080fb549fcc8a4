import pytest

from clearnoc.techlib import (
    LinkCostVector,
    LinkInfeasibleError,
    LinkMode,
    ProfileError,
    TechKind,
    TechnologyProfile,
    clear_link,
    clear_sweep,
    link_cost,
)


def sweep_value(profiles, tech, length_mm, mode=LinkMode.BARE):
    try:
        return clear_link(link_cost(profiles[tech], length_mm, mode))
    except LinkInfeasibleError:
        return 0.0


class TestProfiles:
    def test_default_set_loads(self, profiles):
        assert set(profiles) == {"electronic", "photonic", "plasmonic", "hyppi"}
        assert profiles["hyppi"].kind is TechKind.HYPPI

    def test_system_rate_capped_by_device_rate(self, profiles):
        for p in profiles.values():
            assert p.modulator_speed_system_gbps <= p.modulator_speed_device_gbps

    def test_electronic_has_zero_optical_losses(self, profiles):
        e = profiles["electronic"]
        assert e.modulator_insertion_loss_db == 0
        assert e.coupling_loss_db == 0
        assert e.waveguide_prop_loss_db_cm == 0

    def test_optical_profiles_have_positive_propagation_loss(self, profiles):
        for name in ("photonic", "plasmonic", "hyppi"):
            assert profiles[name].waveguide_prop_loss_db_cm > 0

    def test_bad_laser_efficiency_rejected(self):
        with pytest.raises(ProfileError):
            TechnologyProfile(
                name="bad",
                kind=TechKind.HYPPI,
                laser_efficiency=1.5,
                laser_area_um2=1.0,
                modulator_area_um2=1.0,
                detector_area_um2=1.0,
                waveguide_prop_loss_db_cm=1.0,
                waveguide_pitch_um=1.0,
                modulator_speed_device_gbps=50.0,
                modulator_speed_system_gbps=50.0,
            )

    def test_system_rate_above_device_rate_rejected(self):
        with pytest.raises(ProfileError):
            TechnologyProfile(
                name="bad",
                kind=TechKind.HYPPI,
                laser_efficiency=0.2,
                laser_area_um2=1.0,
                modulator_area_um2=1.0,
                detector_area_um2=1.0,
                waveguide_prop_loss_db_cm=1.0,
                waveguide_pitch_um=1.0,
                modulator_speed_device_gbps=25.0,
                modulator_speed_system_gbps=50.0,
            )


class TestLinkCost:
    def test_hyppi_noc_capacity_is_50(self, profiles):
        cost = link_cost(profiles["hyppi"], 1.0, LinkMode.NOC)
        assert cost.capacity_gbps == 50.0

    def test_hyppi_bare_capacity_is_device_rate(self, profiles):
        cost = link_cost(profiles["hyppi"], 1.0, LinkMode.BARE)
        assert cost.capacity_gbps == 2100.0

    def test_photonic_noc_uses_two_wavelengths(self, profiles):
        cost = link_cost(profiles["photonic"], 1.0, LinkMode.NOC)
        assert cost.capacity_gbps == 50.0  # 2 x 25

    def test_noc_latency_quantized_to_cycles(self, profiles):
        assert link_cost(profiles["electronic"], 1.0, LinkMode.NOC).latency == 1
        for name in ("photonic", "hyppi"):
            assert link_cost(profiles[name], 1.0, LinkMode.NOC).latency == 2

    def test_loss_free_limit_energy(self, profiles):
        # With losses zeroed, the laser term reduces to the sensitivity floor.
        base = profiles["hyppi"]
        p = TechnologyProfile(
            name="lossless",
            kind=base.kind,
            laser_efficiency=base.laser_efficiency,
            laser_area_um2=base.laser_area_um2,
            modulator_speed_device_gbps=base.modulator_speed_device_gbps,
            modulator_speed_system_gbps=base.modulator_speed_system_gbps,
            modulator_energy_fj=base.modulator_energy_fj,
            detector_energy_fj=base.detector_energy_fj,
            modulator_area_um2=base.modulator_area_um2,
            detector_area_um2=base.detector_area_um2,
            waveguide_prop_loss_db_cm=1e-12,
            waveguide_pitch_um=base.waveguide_pitch_um,
            receiver_sensitivity_dbm=base.receiver_sensitivity_dbm,
        )
        cost = link_cost(p, 1e-6, LinkMode.NOC)
        floor_mw = 10 ** (p.receiver_sensitivity_dbm / 10) / p.laser_efficiency
        expected = p.modulator_energy_fj + p.detector_energy_fj + floor_mw / 50.0 * 1e3
        assert cost.energy_fj_per_bit == pytest.approx(expected, rel=1e-9)

    def test_plasmonic_long_link_infeasible(self, profiles):
        # 440 dB/cm over 10 mm is a 440 dB budget: no laser closes it.
        with pytest.raises(LinkInfeasibleError):
            link_cost(profiles["plasmonic"], 10.0, LinkMode.BARE)

    def test_optical_energy_monotone_in_length(self, profiles):
        lengths = [0.01, 0.1, 0.5, 1.0, 5.0]
        for name in ("photonic", "hyppi"):
            energies = [
                link_cost(profiles[name], L, LinkMode.BARE).energy_fj_per_bit for L in lengths
            ]
            assert energies == sorted(energies)

    def test_nonpositive_length_rejected(self, profiles):
        with pytest.raises(ValueError):
            link_cost(profiles["hyppi"], 0.0)
        with pytest.raises(ValueError):
            link_cost(profiles["hyppi"], -1.0)

    def test_noc_mode_attaches_calibration_figures(self, profiles, calib):
        cost = link_cost(profiles["hyppi"], 3.0, LinkMode.NOC, calib=calib)
        assert cost.static_power_w > 0
        assert cost.dynamic_energy_per_flit_j > 0
        bare = link_cost(profiles["hyppi"], 3.0, LinkMode.BARE, calib=calib)
        assert bare.static_power_w == 0


class TestClearLink:
    def test_direct_substitution(self):
        assert clear_link(LinkCostVector(50, 2, 1, 1)) == 25
        assert clear_link(LinkCostVector(50, 2, 5, 2.5)) == 2

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            clear_link(LinkCostVector(50, 0, 1, 1))

    def test_hyppi_beats_electronic_at_intercore_lengths(self, profiles):
        for L in (1.0, 2.0, 5.0, 10.0):
            assert sweep_value(profiles, "hyppi", L) > sweep_value(profiles, "electronic", L)

    def test_monotone_in_each_factor(self):
        base = LinkCostVector(50, 2, 3, 4)
        v0 = clear_link(base)
        assert clear_link(LinkCostVector(60, 2, 3, 4)) > v0
        assert clear_link(LinkCostVector(50, 3, 3, 4)) < v0
        assert clear_link(LinkCostVector(50, 2, 4, 4)) < v0
        assert clear_link(LinkCostVector(50, 2, 3, 5)) < v0

    def test_unit_rescaling_preserves_ratios(self, profiles):
        # Scaling every factor by a common unit change leaves cross-technology
        # ratios at a given length unchanged.
        k_c, k_l, k_e, k_a = 8.0, 0.5, 3.0, 0.25
        for L in (0.01, 1.0, 10.0):
            raw = {}
            scaled = {}
            for name in ("electronic", "photonic", "hyppi"):
                c = link_cost(profiles[name], L, LinkMode.BARE)
                raw[name] = clear_link(c)
                scaled[name] = clear_link(
                    LinkCostVector(
                        c.capacity_gbps * k_c,
                        c.latency * k_l,
                        c.energy_fj_per_bit * k_e,
                        c.area_um2 * k_a,
                    )
                )
            for name in raw:
                assert scaled[name] / scaled["hyppi"] == pytest.approx(
                    raw[name] / raw["hyppi"], rel=1e-12
                )


class TestClearSweep:
    def test_single_point_matches_composition(self, profiles):
        rows = clear_sweep([profiles["hyppi"]], [2.0])
        assert len(rows) == 1
        expected = clear_link(link_cost(profiles["hyppi"], 2.0, LinkMode.BARE))
        assert rows[0].clear == expected

    def test_infeasible_rows_carry_zero(self, profiles):
        rows = clear_sweep([profiles["plasmonic"]], [0.1, 10.0])
        by_len = {r.length_mm: r for r in rows}
        assert by_len[0.1].clear > 0
        assert by_len[10.0].clear == 0.0

    def test_rows_ordered_by_technology_then_length(self, profiles):
        rows = clear_sweep([profiles["hyppi"], profiles["electronic"]], [2.0, 1.0])
        assert [(r.technology, r.length_mm) for r in rows] == [
            ("hyppi", 1.0),
            ("hyppi", 2.0),
            ("electronic", 1.0),
            ("electronic", 2.0),
        ]

    def test_empty_inputs_rejected(self, profiles):
        with pytest.raises(ValueError):
            clear_sweep([], [1.0])
        with pytest.raises(ValueError):
            clear_sweep([profiles["hyppi"]], [])

    def test_plasmonic_wins_non_hyppi_field_only_at_short_lengths(self, profiles):
        # Among electronic/photonic/plasmonic, plasmonics leads at micron
        # scales and collapses (infeasible) before 1 mm.
        for L in (0.001, 0.005, 0.02):
            pl = sweep_value(profiles, "plasmonic", L)
            assert pl > sweep_value(profiles, "electronic", L)
            assert pl > sweep_value(profiles, "photonic", L)
        assert sweep_value(profiles, "plasmonic", 10.0) == 0.0

    def test_photonic_beats_electronic_beyond_20mm(self, profiles):
        for L in (20.0, 50.0, 100.0):
            assert sweep_value(profiles, "photonic", L) > sweep_value(profiles, "electronic", L)

    def test_electronic_beats_photonic_at_very_short_lengths(self, profiles):
        for L in (0.001, 0.01, 0.05):
            assert sweep_value(profiles, "electronic", L) > sweep_value(profiles, "photonic", L)

    def test_frozen_crossover_regressions(self, profiles):
        # Self-derived regression values from a fine sweep of the shipped
        # profiles: plasmonic's loss budget dies between 0.6 and 0.8 mm, and
        # the electronic/photonic crossover sits between 0.05 and 0.2 mm.
        lo, hi = 0.1, 2.0
        for _ in range(40):
            mid = (lo + hi) / 2
            try:
                link_cost(profiles["plasmonic"], mid, LinkMode.BARE)
                lo = mid
            except LinkInfeasibleError:
                hi = mid
        assert 0.6 < lo < 0.8

        lo, hi = 0.01, 1.0
        for _ in range(40):
            mid = (lo + hi) / 2
            if sweep_value(profiles, "electronic", mid) > sweep_value(profiles, "photonic", mid):
                lo = mid
            else:
                hi = mid
        assert 0.05 < lo < 0.2
