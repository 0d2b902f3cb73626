import math

import numpy as np
import pytest

from pblayers.errors import ConfigError, GridTooCoarse, RegionEmpty
from pblayers.geometry import RegionParams, make_annulus, make_ball, make_disk
from pblayers.nonlinearity import IonSpecies
from pblayers.profiles import RobinData
from pblayers.radial_oracle import (
    band_charge_integral,
    compare_expansion,
    graded_radial_grid,
    solve_radial_ccpb,
    solve_radial_dirichlet,
    solve_radial_robin_pb,
)


class TestGrid:
    def test_layer_resolution_guard(self):
        with pytest.raises(GridTooCoarse):
            graded_radial_grid(2, 1.0, None, 1e-4, points_per_layer=4)

    def test_annulus_covers_both_layers(self):
        r = graded_radial_grid(2, 2.0, 1.0, 1e-4)
        assert r[0] == 1.0 and r[-1] == 2.0
        h = np.diff(r)
        assert h[0] <= math.sqrt(1e-4) / 8 and h[-1] <= math.sqrt(1e-4) / 8
        assert np.all(h > 0)


class TestDirichlet:
    def test_trivial_boundary_value(self, salt):
        res = solve_radial_dirichlet(salt, 1.0, 0.0, 1e-3)
        assert res.newton_iters == 0
        assert np.max(np.abs(res.phi)) == 0.0

    @pytest.mark.parametrize("eps", [1e-3, 1e-4])
    def test_exponential_bound(self, salt, eps):
        res = solve_radial_dirichlet(salt, 1.0, 1.0, eps)
        m_f = math.sqrt(2 * math.cosh(1.0))
        bound = 2.0 * np.exp(-m_f * (1.0 - res.r) / (8 * math.sqrt(eps)))
        assert np.all(np.abs(res.phi) <= bound + 1e-15)

    def test_monotone_both_signs(self, salt):
        up = solve_radial_dirichlet(salt, 1.0, 1.0, 1e-3)
        assert np.all(np.diff(up.phi) >= 0)
        dn = solve_radial_dirichlet(salt, 1.0, -1.0, 1e-3)
        assert np.all(np.diff(dn.phi) <= 0)

    def test_grid_refinement_second_order(self, salt):
        rr = np.linspace(0.9, 1.0, 401)
        sols = [
            solve_radial_dirichlet(salt, 1.0, 1.0, 1e-3, points_per_layer=p)
            for p in (200, 400, 800)
        ]
        e_coarse = np.max(np.abs(sols[0].phi_at(rr) - sols[2].phi_at(rr)))
        e_fine = np.max(np.abs(sols[1].phi_at(rr) - sols[2].phi_at(rr)))
        assert 3.0 <= e_coarse / e_fine <= 7.0

    def test_residual_and_conservation(self, salt):
        res = solve_radial_dirichlet(salt, 1.0, 1.0, 1e-3)
        scale = 1.0 + 2 * math.sinh(1.0)
        assert res.residual_norm <= 1e-9 * scale
        assert res.conservation_residual <= 1e-9


class TestRobin:
    def test_gamma_zero_equals_dirichlet(self, salt):
        dom = make_disk(1.0, RobinData(0.0, 1.0))
        robin = solve_radial_robin_pb(dom, salt, 1e-3)
        diri = solve_radial_dirichlet(salt, 1.0, 1.0, 1e-3)
        assert np.max(np.abs(robin.phi - diri.phi)) <= 1e-10

    def test_large_gamma_suppresses_boundary_value(self, salt):
        values = []
        for g in (0.1, 1.0, 10.0):
            dom = make_disk(1.0, RobinData(g, 1.0))
            res = solve_radial_robin_pb(dom, salt, 1e-3)
            values.append(abs(res.phi[-1]))
        assert values[0] > values[1] > values[2]

    def test_boundary_value_approaches_layer_value(self, salt, pb_disk_sweep, std_bundle):
        u0 = std_bundle["u"].meta["u0"]
        gaps = [abs(pb_disk_sweep[eps].phi[-1] - u0) for eps in (1e-3, 1e-4)]
        assert gaps[0] <= 10 * math.sqrt(1e-3)
        assert gaps[1] <= 10 * math.sqrt(1e-4)
        assert gaps[1] < gaps[0]

    def test_ball_3d(self, salt):
        dom = make_ball(3, 1.0, RobinData(0.1, 1.0))
        res = solve_radial_robin_pb(dom, salt, 1e-3)
        assert res.residual_norm <= 1e-9
        assert np.all(np.diff(res.phi) >= -1e-14)


class TestComparison:
    def test_pb_disk_sweep_patterns(self, pb_disk_sweep, pb_disk_domain, std_bundle):
        reports = {
            eps: compare_expansion(res, pb_disk_domain, [std_bundle], "pb", T=5.0, beta=0.25)
            for eps, res in pb_disk_sweep.items()
        }
        e1 = [reports[eps].boundaries[0].e1 for eps in (1e-2, 1e-3, 1e-4)]
        e2 = [reports[eps].boundaries[0].e2 for eps in (1e-2, 1e-3, 1e-4)]
        fe = [reports[eps].boundaries[0].field_err for eps in (1e-2, 1e-3, 1e-4)]
        assert e1[0] > e1[1] > e1[2]
        assert e2[0] > e2[1] > e2[2]
        assert fe[0] > fe[1] > fe[2]
        assert e2[2] <= 0.5 * e2[0]

    def test_envelope_fit_bounds_all_grid_points(self, pb_disk_sweep, pb_disk_domain, std_bundle):
        res = pb_disk_sweep[1e-4]
        rep = compare_expansion(res, pb_disk_domain, [std_bundle], "pb", T=5.0, beta=0.25)
        b = rep.boundaries[0]
        m_prime, m_rate = b.envelope
        t_all = (1.0 - res.r) / math.sqrt(1e-4)
        band = (t_all >= 5.0) & (t_all <= 10.0)
        dev = np.abs(res.phi[band])
        assert np.all(dev <= m_prime * np.exp(-m_rate * t_all[band]) * (1 + 1e-9))
        assert b.region3_bound_ok

    def test_trivial_configuration_zero_errors(self, salt):
        dom = make_disk(1.0, RobinData(0.1, 0.0))
        res = solve_radial_robin_pb(dom, salt, 1e-3)
        from pblayers.profiles import solve_u, solve_v

        u = solve_u(salt, RobinData(0.1, 0.0))
        v = solve_v(u, salt, RobinData(0.1, 0.0))
        rep = compare_expansion(res, dom, [{"u": u, "v": v}], "pb", T=5.0)
        assert rep.boundaries[0].e1 == 0.0 and rep.boundaries[0].e2 == 0.0

    def test_region_empty(self, salt, pb_disk_domain, std_bundle):
        res = solve_radial_robin_pb(pb_disk_domain, salt, 1e-4, points_per_layer=16)
        with pytest.raises(RegionEmpty):
            compare_expansion(
                res, pb_disk_domain, [std_bundle], "pb", T=9.99, beta=0.25
            )


class TestConservedCharge:
    def test_requires_annulus_and_neutrality(self, msalt, salt):
        dom = make_disk(1.0, RobinData(0.1, 1.0))
        with pytest.raises(ConfigError):
            solve_radial_ccpb(dom, msalt, 1e-3)
        ann = make_annulus(2, 1.0, 2.0, RobinData(0.1, 1.0), RobinData(0.1, -1.0))
        from pblayers.errors import NeutralityViolated

        with pytest.raises(NeutralityViolated):
            solve_radial_ccpb(ann, [IonSpecies(1, 1, "mass")], 1e-3)

    def test_global_neutrality(self, ccpb_sweep, msalt):
        scale = sum(s.amount * abs(s.z) for s in msalt)
        for res in ccpb_sweep.values():
            assert abs(res.neutrality) <= 1e-8 * scale

    def test_reference_between_boundary_potentials(self, ccpb_sweep):
        for res in ccpb_sweep.values():
            assert -1.0 < res.phi_eps_star < 1.0
            assert np.all(res.phi >= -1.0 - 1e-12)
            assert np.all(res.phi <= 1.0 + 1e-12)

    def test_drift_law(self, ccpb_sweep, annulus_constants):
        gaps = []
        for eps in (1e-2, 1e-3, 1e-4):
            drift = (ccpb_sweep[eps].phi_eps_star - annulus_constants.phi0_star) / math.sqrt(eps)
            gaps.append(abs(drift - annulus_constants.q))
        assert gaps[0] > gaps[1] > gaps[2]

    def test_expansion_sweep(self, ccpb_sweep, annulus_domain, annulus_constants):
        e2 = []
        for eps in (1e-2, 1e-3, 1e-4):
            rep = compare_expansion(
                ccpb_sweep[eps], annulus_domain, annulus_constants.profiles,
                "ccpb", T=5.0,
            )
            e2.append(max(b.e2 for b in rep.boundaries))
        assert e2[0] > e2[1] > e2[2]
        assert e2[2] <= 0.5 * e2[0]


class TestGenerality:
    def test_asymmetric_electrolyte_ccpb(self):
        # 2:1 electrolyte, mixed Robin/Dirichlet boundaries
        from pblayers.ccpb import ccpb_constants

        species = [IonSpecies(2.0, 1.0, "mass"), IonSpecies(-1.0, 2.0, "mass")]
        dom = make_annulus(2, 1.0, 2.0, RobinData(0.2, 0.8), RobinData(0.0, -0.6))
        cc = ccpb_constants(dom, species)
        assert cc.diagnostics["flux_residual"] <= 1e-10
        assert cc.diagnostics["mhat_charge_rel"] <= 1e-8
        assert cc.diagnostics["drift_balance_rel"] <= 1e-8
        gaps = []
        for eps in (1e-2, 1e-3, 1e-4):
            res = solve_radial_ccpb(dom, species, eps)
            scale = sum(s.amount * abs(s.z) for s in species)
            assert abs(res.neutrality) <= 1e-8 * scale
            drift = (res.phi_eps_star - cc.phi0_star) / math.sqrt(eps)
            gaps.append(abs(drift - cc.q))
        assert gaps[0] > gaps[1] > gaps[2]

    def test_three_dimensional_ball_convergence(self):
        from pblayers.nonlinearity import make_classical_pb
        from pblayers.profiles import solve_u, solve_v

        f = make_classical_pb([IonSpecies(1, 2), IonSpecies(-1, 1)])
        dom = make_ball(3, 1.0, RobinData(0.1, 1.0))
        u = solve_u(f, RobinData(0.1, 1.0))
        v = solve_v(u, f, RobinData(0.1, 0.0))
        e2 = []
        for eps in (1e-2, 1e-3, 1e-4):
            res = solve_radial_robin_pb(dom, f, eps)
            rep = compare_expansion(res, dom, [{"u": u, "v": v}], "pb", T=5.0)
            e2.append(rep.boundaries[0].e2)
        assert e2[0] > e2[1] > e2[2]
        assert e2[2] <= 0.5 * e2[0]


class TestBandCharges:
    def test_pb_disk_band_integrals(self, pb_disk_sweep, pb_disk_domain, std_bundle, salt):
        from pblayers.asymptotics import region_charge

        params = RegionParams(eps=1e-4, beta=0.25, T=5.0)
        rep = region_charge(pb_disk_domain, 0, params, std_bundle, model="pb")
        oracle = pb_disk_sweep[1e-4]
        for reg, formula in (("I", rep.region1), ("II", rep.region2)):
            val = band_charge_integral(oracle, pb_disk_domain, 0, salt, params, reg)
            assert abs(val - formula) <= 0.1 * 1e-4

    def test_ccpb_band_integrals(self, ccpb_sweep, annulus_domain, annulus_constants, msalt):
        from pblayers.asymptotics import region_charge
        from pblayers.nonlinearity import _exp_terms_nonlinearity

        oracle = ccpb_sweep[1e-4]
        # the conserved-charge screening rate is weak (~0.46), so the wider
        # Region II (beta = 0.1) keeps the far-edge flux below tolerance
        params = RegionParams(eps=1e-4, beta=0.10, T=5.0)
        a = np.array([s.amount * s.z / A for s, A in zip(msalt, oracle.normalizers)])
        b = np.array([-s.z for s in msalt])
        f_eps = _exp_terms_nonlinearity(a, b, 0.0, "custom", msalt)
        for k in (0, 1):
            rep = region_charge(
                annulus_domain, k, params, annulus_constants.profiles[k], model="ccpb"
            )
            for reg, formula in (("I", rep.region1), ("II", rep.region2)):
                val = band_charge_integral(oracle, annulus_domain, k, f_eps, params, reg)
                assert abs(val - formula) <= 0.1 * 1e-4
