import math

import numpy as np
import pytest

from scenerywalk import _kernels, exponents, montecarlo
from scenerywalk.calibration import CALIBRATION
from scenerywalk.montecarlo import (
    ChenParams,
    StretchedRegimeError,
    chen_bound,
    chen_verify,
    khasminskii_verify,
    level_mean_occupation,
    lln_check,
    scaling_exponent_estimate,
    strategy_lower_bound,
    tail_prob_scan,
)
from scenerywalk.scenery import ConstantField, SceneryField, TableField
from scenerywalk.streams import philox


class TestLln:
    def test_pareto_mean_small_run(self):
        r = lln_check(alpha=2.0, dim=1, t=1000.0, replicas=600, seed=1)
        assert r.target == pytest.approx(2.0)
        assert r.within_3_sigma

    def test_unit_override_is_exact(self):
        r = lln_check(alpha=2.0, dim=1, t=500.0, replicas=64, seed=2, law_override=1.0)
        assert r.mean == pytest.approx(1.0, abs=1e-14)
        assert r.stderr <= 1e-14

    def test_requires_finite_mean(self):
        with pytest.raises(ValueError):
            lln_check(alpha=1.0, dim=1, t=100.0, replicas=10, seed=3)

    def test_reproducible(self):
        a = lln_check(alpha=2.0, dim=1, t=200.0, replicas=256, seed=4)
        b = lln_check(alpha=2.0, dim=1, t=200.0, replicas=256, seed=4)
        assert a == b


class TestScaling:
    def test_unit_override_slope_exactly_one(self):
        r = scaling_exponent_estimate(
            alpha=0.8,
            dim=1,
            t_grid=[10, 30, 100, 300, 1000],
            replicas=128,
            quantile=0.5,
            seed=5,
            law_override=1.0,
        )
        assert r.slope == pytest.approx(1.0, abs=1e-12)
        assert r.reference == 1.0

    def test_one_sided_bound_d2(self):
        r = scaling_exponent_estimate(
            alpha=0.8,
            dim=2,
            t_grid=[100, 316, 1000, 3162, 10_000],
            replicas=1500,
            quantile=0.5,
            seed=6,
        )
        assert r.one_sided
        assert r.reference == pytest.approx(1.25)
        assert r.slope <= r.reference + 0.1

    def test_validation(self):
        with pytest.raises(ValueError):
            scaling_exponent_estimate(0.8, 1, [10, 20], 10, 0.5, 0)
        with pytest.raises(ValueError):
            scaling_exponent_estimate(2.0, 1, [10, 20, 40, 80, 160], 10, 0.5, 0)
        with pytest.raises(ValueError):
            scaling_exponent_estimate(0.8, 1, [10, 20, 40, 80, 160], 10, 1.5, 0)

    def test_jobs_do_not_change_results(self):
        kw = dict(alpha=0.8, dim=1, t_grid=[10, 30, 100, 300, 1000], replicas=256, quantile=0.5, seed=7)
        assert scaling_exponent_estimate(**kw) == scaling_exponent_estimate(**kw, jobs=4)


class TestTailScan:
    def test_trivial_certain_event(self):
        scan = tail_prob_scan("rwrs", 0.5, 1, [2.0, 4.0, 8.0], 200, seed=8, rho=0.9)
        assert all(e.probability == 1.0 for e in scan.estimates)

    def test_polynomial_scan_floor(self):
        scan = tail_prob_scan("rwrs", 0.5, 1, [100.0, 1000.0], 2000, seed=9, rho=1.2)
        assert scan.floor_ok
        assert scan.slope is not None

    def test_stretched_regime_refused(self):
        with pytest.raises(StretchedRegimeError):
            tail_prob_scan("rwrs", 0.5, 1, [100.0], 100, seed=10, rho=2.0)

    def test_rcm_guard(self):
        with pytest.raises(StretchedRegimeError):
            tail_prob_scan("rcm", 1.0, 1, [100.0], 100, seed=11, delta=1.0, gamma=0.0)

    def test_rcm_polynomial_point(self):
        scan = tail_prob_scan(
            "rcm", 1.0, 1, [50.0, 100.0], 20_000, seed=12, delta=0.45, gamma=0.3
        )
        assert all(e.probability > 0 for e in scan.estimates)
        assert scan.floor_ok

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            tail_prob_scan("brownian", 1.0, 1, [10.0], 10, seed=0, rho=1.0)


class TestStrategyBound:
    def test_second_regime_stay_factor_exact(self):
        # second regime: the walk holds the peak through the whole window,
        # so the stay factor is exactly -(t/4) * rate
        sb = strategy_lower_bound(1.0, 1, 3.0, 40.0, field_seed=3)
        assert sb.regime == "second"
        assert sb.stay == pytest.approx(-10.0)
        assert sb.log_probability == pytest.approx(sb.travel + sb.stay + sb.ret)

    def test_peak_at_origin_no_travel(self):
        f = TableField(table={(0,): 500.0}, dim=1)
        sb = strategy_lower_bound(1.0, 1, 1.2, 8.0, field_seed=0, field=f)
        from scenerywalk.ctrw import transition_prob_exact

        assert sb.site == (0,)
        assert sb.travel == pytest.approx(np.log(transition_prob_exact(1, 1.0, 2.0, [0])))
        assert sb.log_probability == pytest.approx(sb.travel + sb.stay + sb.ret)

    def test_pilot_quantile_slack(self):
        slack = CALIBRATION["strategy_slack"]
        p = exponents.p_exponent(1.0, 1.5, 1).value
        exps = np.array(
            [strategy_lower_bound(1.0, 1, 1.5, 1000.0, field_seed=s).exponent for s in range(50)]
        )
        share = float(np.mean(exps <= p + slack["epsilon_tol"]))
        assert share >= slack["quantile"]

    def test_regime_mismatch(self):
        with pytest.raises(ValueError):
            strategy_lower_bound(0.5, 1, 1.2, 100.0, field_seed=0)  # polynomial regime

    def test_bound_is_valid_log_probability(self):
        sb = strategy_lower_bound(1.0, 1, 1.5, 200.0, field_seed=1)
        assert sb.log_probability < 0
        assert np.isfinite(sb.log_probability)


class TestChen:
    def test_hand_values(self):
        assert chen_bound(ChenParams(4 / np.e, 1.0, 2.0)) == pytest.approx(1.4744, abs=2e-4)
        assert chen_bound(ChenParams(4.0, 1.0, 11.0)) == pytest.approx(6.4e-5, abs=5e-6)

    def test_large_lambda_limit(self):
        assert chen_bound(ChenParams(1e9, 1.0, 3.0)) < 1e-15

    def test_b_above_one_required(self):
        with pytest.raises(ValueError):
            ChenParams(1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            chen_verify(1, 100.0, 1.0, 100, seed=0)

    def test_small_lambda_vacuous(self):
        # bound >= 1 whenever lambda <= 4/e
        assert chen_bound(ChenParams(4 / np.e, 1.0, 5.0)) >= 1.0

    def test_verify_no_violations_small(self):
        rep = chen_verify(1, 100.0, 5.0, 100_000, seed=13)
        assert rep.n_violations == 0
        assert rep.a_value > 0


class TestKhasminskii:
    def test_first_moment_equality(self):
        rep = khasminskii_verify(1, 50.0, 1, 20_000, seed=14)
        assert rep.lhs == pytest.approx(rep.base_moment, rel=1e-12)
        assert not rep.violated

    def test_constant_integrand_is_deterministic(self):
        # f == 1 everywhere: the integral is exactly t, so moments are t^m
        occ = _kernels.occupation_batch(
            1, 1.0, 25.0, 0, 256, tag=4999, indicator=lambda pos: np.ones(pos.shape[:-1])
        )
        assert np.allclose(occ, 25.0, rtol=1e-12)
        m = 3
        assert (occ**m).mean() <= math.factorial(m) * occ.mean() ** m

    def test_third_moment_holds(self):
        rep = khasminskii_verify(1, 100.0, 3, 100_000, seed=15)
        assert not rep.violated
        assert rep.lhs <= rep.rhs

    def test_multi_site_support(self):
        rep = khasminskii_verify(1, 30.0, 2, 20_000, seed=16, sites=[(0,), (2,)])
        assert not rep.violated

    def test_moment_order_validation(self):
        with pytest.raises(ValueError):
            khasminskii_verify(1, 10.0, 5, 100, seed=0)


class TestLevelOccupation:
    def test_empty_level_set_gives_zero(self):
        rep = level_mean_occupation(
            alpha=1.0,
            dim=1,
            eta=1.0,
            k_eps=3.0,  # threshold t^3: far above any site the walk can see
            box_radius=0,
            t_grid=[16.0, 64.0],
            seeds=[SceneryField(1.0, 1, 0).seed],
            replicas=16,
            master_seed=17,
        )
        assert all(v == 0.0 for _, v in rep.means)

    def test_whole_lattice_threshold_one(self):
        rep = level_mean_occupation(
            alpha=1.0,
            dim=1,
            eta=1.0,
            k_eps=0.0,
            box_radius=0,
            t_grid=[9.0, 81.0],
            seeds=[3],
            replicas=16,
            master_seed=18,
        )
        assert [v for _, v in rep.means] == pytest.approx([9.0, 81.0], rel=1e-9)

    def test_hypothesis_guard(self):
        with pytest.raises(ValueError):
            level_mean_occupation(1.0, 1, 1.0, 0.4, 0, [10.0], [0], 8, 0)
        with pytest.raises(ValueError):
            level_mean_occupation(1.0, 2, 1.0, 0.9, 0, [10.0], [0], 8, 0)

    def test_growth_bound_small(self):
        rep = level_mean_occupation(
            alpha=1.0,
            dim=1,
            eta=1.0,
            k_eps=0.75,
            box_radius=1,
            t_grid=[100.0, 1000.0],
            seeds=range(60),
            replicas=12,
            master_seed=19,
        )
        assert rep.slope.slope <= 0.5 + 0.25


class TestTimeChangeComparison:
    def test_constant_field_passes(self):
        f = ConstantField(1.0, 1)
        cmp_ = montecarlo.time_change_distribution_check(f, 20.0, 15_000, seed=20)
        assert cmp_.chi2.passed

    def test_reproducible(self):
        f = ConstantField(2.0, 1)
        a = montecarlo.time_change_distribution_check(f, 10.0, 5_000, seed=21)
        b = montecarlo.time_change_distribution_check(f, 10.0, 5_000, seed=21)
        assert a == b


class TestKernels:
    def test_partition_of_time(self):
        pos, dur = _kernels.srw_paths_batch(1, 1.0, 50.0, 256, philox(22, 0))
        assert np.allclose(dur.sum(axis=1), 50.0, rtol=1e-9)

    def test_pareto_strip_matches_direct_hash(self):
        seeds = np.arange(8, dtype=np.uint64)
        pos = np.array([[[k] for k in range(-3, 4)]] * 8, dtype=np.int32)
        strip = _kernels.pareto_values_at(seeds, pos, 1.0)
        for i, s in enumerate(seeds):
            f = SceneryField(alpha=1.0, dim=1, seed=int(s))
            direct = f.values(pos[i].astype(np.int64))
            assert np.array_equal(strip[i], direct)

    def test_vsrw_batch_matches_event_driven_moments(self):
        f = ConstantField(1.0, 1)
        ends = _kernels.vsrw_endpoints_batch(f, 30.0, 23, 20_000, tag=90)
        # z == 1: each coordinate jumps at rate 2 -> variance 2t
        assert abs(ends[:, 0].var() / 60.0 - 1.0) <= 0.07
        assert abs(ends[:, 1].var() / 60.0 - 1.0) <= 0.07
