import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import access_by_enumeration, q_mp
from uavrra.analytic import (
    NoFeasibleAltitude,
    average_access_prob,
    beam_access_prob,
    evaluate,
    grid,
    occupation_prob,
    plan_altitude,
    q_function,
    valid_request_prob,
)
from uavrra.beamgeom import make_codebook
from uavrra.rra import allocate
from uavrra.scenario import EmptyBeamMode, RRAKind

INC, EXACT = EmptyBeamMode.INCLUDE_ZERO, EmptyBeamMode.PAPER_EXACT


class TestQFunction:
    def test_zero(self):
        assert q_function(0.0) == 0.5

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.3, 2.7, 5.0, 7.9])
    def test_symmetry(self, x):
        assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-15)

    def test_five_percent_quantile(self):
        x = 1.6448536269514722
        assert q_function(x) == pytest.approx(q_mp(x), abs=1e-15)
        assert q_function(x) == pytest.approx(0.05, abs=1e-12)

    def test_vectorized(self):
        x = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_allclose(q_function(x), [q_mp(v) for v in x], atol=1e-15)


class TestOccupation:
    def test_empty_road(self):
        assert occupation_prob(0.0, 5.0) == 0.0

    @pytest.mark.parametrize("lam, expected", [(0.04, 0.16375), (0.08, 0.26813)])
    def test_values(self, lam, expected):
        assert occupation_prob(lam, 5.0) == pytest.approx(expected, abs=5e-6)

    def test_peak_at_one_vehicle_per_slot(self):
        assert occupation_prob(0.2, 5.0) == pytest.approx(math.exp(-1))
        assert occupation_prob(0.3, 5.0) < occupation_prob(0.2, 5.0)


class TestValidRequest:
    def test_at_threshold(self):
        assert valid_request_prob(10.0, 2.0, 10.0) == 0.5

    def test_high_mean(self):
        assert valid_request_prob(1e3, 2.0, 10.0) == 1.0

    def test_250m_example(self):
        assert valid_request_prob(17.24, 2.0, 10.0) == pytest.approx(q_mp(-3.62), abs=1e-12)
        assert valid_request_prob(17.24, 2.0, 10.0) == pytest.approx(0.99985, abs=1e-5)

    def test_zero_sigma_indicator(self):
        assert valid_request_prob(10.0, 0.0, 10.0) == 1.0
        assert valid_request_prob(9.99, 0.0, 10.0) == 0.0

    @given(st.floats(-20, 40), st.floats(-20, 40), st.floats(0.1, 10))
    def test_non_increasing_in_threshold(self, mu, gamma, sigma):
        assert valid_request_prob(mu, sigma, gamma + 0.5) <= valid_request_prob(mu, sigma, gamma)


class TestBeamAccess:
    def test_two_slots_one_resource(self):
        # outcomes: {}, {a}, {b}, {a,b} each 1/4
        assert beam_access_prob(2, 1, 0.5, EXACT) == pytest.approx(0.5, abs=1e-15)
        assert beam_access_prob(2, 1, 0.5, INC) == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
    def test_full_capacity(self, p):
        assert beam_access_prob(5, 5, p, INC) == 1.0
        assert beam_access_prob(5, 9, p, INC) == 1.0

    def test_no_requests(self):
        assert beam_access_prob(10, 3, 0.0, EXACT) == 0.0
        assert beam_access_prob(10, 3, 0.0, INC) == 1.0

    def test_certain_requests(self):
        assert beam_access_prob(10, 3, 1.0, INC) == 0.0
        assert beam_access_prob(10, 10, 1.0, EXACT) == 1.0

    def test_empty_beam(self):
        assert beam_access_prob(0, 0, 0.4, INC) == 1.0
        assert beam_access_prob(0, 0, 0.4, EXACT) == 0.0

    def test_large_capacity_no_overflow(self):
        from scipy.stats import binom

        val = beam_access_prob(10_000, 1700, 0.17, INC)
        assert val == pytest.approx(binom.cdf(1700, 10_000, 0.17), abs=1e-12)
        assert 0.0 < val < 1.0

    def test_enumeration_small(self):
        for m in range(7):
            for n in range(m + 1):
                for p in (0.0, 0.13, 0.5, 0.91, 1.0):
                    for mode, inc in ((INC, True), (EXACT, False)):
                        assert beam_access_prob(m, n, p, mode) == pytest.approx(
                            access_by_enumeration(m, n, p, inc), abs=1e-12
                        )

    @settings(max_examples=300)
    @given(m=st.integers(0, 300), n=st.integers(0, 300), p=st.floats(0, 1))
    def test_missing_empty_term_identity(self, m, n, p):
        gap = beam_access_prob(m, n, p, INC) - beam_access_prob(m, n, p, EXACT)
        assert gap == pytest.approx((1 - p) ** m, abs=1e-12)

    @settings(max_examples=300)
    @given(m=st.integers(0, 200), n=st.integers(0, 200), p=st.floats(0, 0.99), dp=st.floats(0, 0.01))
    def test_monotone(self, m, n, p, dp):
        assert beam_access_prob(m, n, p + dp, INC) <= beam_access_prob(m, n, p, INC) + 1e-12
        assert beam_access_prob(m, n + 1, p, INC) >= beam_access_prob(m, n, p, INC) - 1e-12

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            beam_access_prob(3, 1, 1.5)


class TestAverageAccess:
    def test_report_shape(self, table_i):
        cb = make_codebook(table_i)
        rep = average_access_prob(table_i, cb, allocate(table_i, cb))
        assert len(rep.per_beam_p_acc) == cb.n_beam
        assert rep.avg_access == pytest.approx(rep.per_beam_p_acc.mean(), abs=0)
        assert np.all((rep.per_beam_p_vr >= 0) & (rep.per_beam_p_vr <= 1))
        assert rep.p_occupation == pytest.approx(0.16375, abs=5e-6)

    def test_150m_threshold_10db(self, table_i):
        for kind in RRAKind:
            assert evaluate(table_i.replace(h_uav=150.0, rra_kind=kind)).avg_access >= 0.99

    def test_single_beam_enough_resources(self, table_i):
        assert evaluate(table_i.replace(n_uav=1)).avg_access == 1.0

    def test_resource_limited_case_matches_enumeration_of_beams(self, table_i):
        # shrink the budget so beams can overflow; check each beam against
        # an independent binomial CDF evaluation
        from scipy.stats import binom

        cfg = table_i.replace(n_ch=1, n_rf=1, tau_e2e_s=2e-3, lam=0.08)
        cb = make_codebook(cfg)
        alloc = allocate(cfg, cb)
        rep = average_access_prob(cfg, cb, alloc)
        p = rep.p_occupation * rep.per_beam_p_vr
        np.testing.assert_allclose(rep.per_beam_p_acc, binom.cdf(alloc.per_beam, cb.capacities, p), atol=1e-12)
        assert rep.avg_access < 0.5

    def test_misaligned_allocation(self, table_i):
        from uavrra.rra import fair_alloc

        with pytest.raises(ValueError):
            average_access_prob(table_i, make_codebook(table_i), fair_alloc(320, 3))


class TestPlanner:
    def test_grid_inclusive(self):
        assert len(grid(50, 500, 10)) == 46
        assert len(grid(7, 7, 1)) == 1
        np.testing.assert_allclose(grid(0.1, 0.3, 0.1), [0.1, 0.2, 0.3])

    def test_infeasible(self, table_i):
        tiny = table_i.replace(n_ch=1, n_rf=1, tau_e2e_s=2 * 125e-6)
        with pytest.raises(NoFeasibleAltitude):
            plan_altitude(tiny, 0.999999)

    def test_highest_feasible_altitude(self, table_i):
        # resource-limited scenario where access drops with altitude
        cfg = table_i.replace(n_ch=1, n_rf=1, tau_e2e_s=4e-3)
        plan = plan_altitude(cfg, 0.9, (50, 500), 10)
        assert evaluate(cfg.replace(h_uav=plan.h_best)).avg_access >= 0.9
        for h in grid(plan.h_best + 10, 500, 10):
            assert evaluate(cfg.replace(h_uav=float(h))).avg_access < 0.9
        assert plan.drones_per_km == pytest.approx(1000.0 / plan.segment_length_m)

    def test_rejects_bad_target(self, table_i):
        with pytest.raises(ValueError):
            plan_altitude(table_i, 1.0)
