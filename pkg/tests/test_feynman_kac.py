"""Monte Carlo semigroup estimator: action algebra, oracles, coupling."""

import cmath
import math

import numpy as np
import pytest

from relfk.errors import ConfigError
from relfk.fields import (FieldSpec, box_fields, bump_fields,
                          with_constant_shift)
from relfk.feynman_kac import (action, certify_epsilon, epsilon_budget,
                               estimate_u, estimate_u_coupled,
                               estimate_u_grid, _Geometry)
from relfk.levy import ModelParams, small_ball_second_moment
from relfk.sampler import JumpPath, RngStream, sample_path, sample_paths

SEED = 20260814


def const_potential_fields(d, c):
    base = bump_fields(d)

    def v(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.full(pts.shape[0], c)

    return FieldSpec(d=d, a=base.a, trace_da=base.trace_da, v=v, g=base.g,
                     support_radius=base.support_radius, sup_a=0.0,
                     sup_da=0.0, sup_v=c, sup_dv=0.0, sup_d2v=0.0,
                     v_floor=c, sup_g=base.sup_g, sup_dg=base.sup_dg,
                     sup_d2g=base.sup_d2g)


def arctan_box(x, t):
    return (math.atan((1.0 - x) / t) + math.atan((1.0 + x) / t)) / math.pi


class TestAction:
    def test_zero_fields_give_unit_weight(self):
        fields = bump_fields(1)
        path = sample_path(ModelParams(1, 0.0), 1.0, 1e-2,
                           RngStream(SEED, 90, 0))
        act = action(path, [4.0], fields)
        assert act.jump_phase == 0.0 and act.potential >= 0.0
        far = action(path, [50.0], fields)
        assert far.weight == 1.0 + 0.0j

    def test_constant_potential_integrates_exactly(self):
        fields = const_potential_fields(1, 0.37)
        path = sample_path(ModelParams(1, 0.5), 2.0, 1e-2,
                           RngStream(SEED, 90, 1))
        act = action(path, [0.0], fields)
        assert act.potential == pytest.approx(0.37 * 2.0, rel=1e-12)

    def test_weight_is_contraction_for_nonnegative_potential(self):
        fields = bump_fields(1, a_amp=0.7, v_amp=0.9)
        for i in range(20):
            path = sample_path(ModelParams(1, 0.0), 1.0, 1e-3,
                               RngStream(SEED, 91, i))
            assert abs(action(path, [0.1], fields).weight) <= 1.0 + 1e-15

    def test_correction_flag_multiplies_by_compensator_phase(self):
        fields = bump_fields(1, a_amp=0.5, v_amp=0.3)
        path = sample_path(ModelParams(1, 0.0), 1.0, 1e-2,
                           RngStream(SEED, 92, 3))
        on = action(path, [0.2], fields, correction=True)
        off = action(path, [0.2], fields, correction=False)
        assert off.correction_phase == 0.0
        ratio = on.weight / off.weight
        assert cmath.isclose(ratio, cmath.exp(-1j * on.correction_phase),
                             rel_tol=1e-14)

    def test_small_phase_budget_value(self):
        fields = bump_fields(1, a_amp=0.5)
        path = sample_path(ModelParams(1, 0.0), 2.0, 1e-2,
                           RngStream(SEED, 92, 4))
        m2 = small_ball_second_moment(path.cutoff, path.params)
        act = action(path, [0.0], fields)
        assert act.small_phase_budget == pytest.approx(
            0.5 * fields.sup_da * 2.0 * m2, rel=1e-14)
        assert act.small_phase == 0.0

    def test_compensated_summation_branch(self):
        # one path with enough jumps to trip the exact-summation path
        n = 150_000
        rng = np.random.default_rng(5)
        times = np.sort(rng.random(n)) * 0.999 + 5e-4
        jumps = (rng.integers(0, 2, n) * 2.0 - 1.0)[:, None] * 2e-6
        path = JumpPath(ModelParams(1, 0.0), 1.0, 1e-6, 1e-6, times, jumps)
        fields = bump_fields(1, a_amp=0.5, v_amp=0.5)
        act = action(path, [0.1], fields)
        assert math.isfinite(act.jump_phase) and math.isfinite(act.potential)
        assert abs(act.weight) <= 1.0

    def test_dimension_mismatch(self):
        path = sample_path(ModelParams(2, 0.0), 1.0, 1e-2,
                           RngStream(SEED, 92, 5))
        with pytest.raises(ConfigError):
            action(path, [0.0], bump_fields(1))


class TestGaugeCovariance:
    @pytest.mark.parametrize("d", [1, 3])
    def test_constant_shift_identity(self, d):
        fields = bump_fields(d, a_amp=0.6, v_amp=0.4)
        c = np.arange(1.0, d + 1.0) * 0.3
        shifted = with_constant_shift(fields, c)
        x = np.full(d, 0.05)
        for i in range(200):
            path = sample_path(ModelParams(d, 0.0), 1.0, 1e-2,
                               RngStream(SEED, 93, i))
            w = action(path, x, fields).weight
            ws = action(path, x, shifted).weight
            expected = cmath.exp(-1j * float(c @ path.endpoint())) * w
            assert abs(ws - expected) <= 1e-12 * abs(ws)


class TestBatchGeometry:
    def test_batch_values_match_per_path_actions(self):
        fields = bump_fields(1, a_amp=0.5, v_amp=0.6)
        batch = sample_paths(ModelParams(1, 0.5), 1.0, 1e-2, SEED, 94, 64)
        geo = _Geometry(batch)
        m2 = small_ball_second_moment(batch.cutoff, batch.params)
        for x in (np.array([0.0]), np.array([0.4])):
            vals = geo.values(fields, x, m2, True)
            for i in range(batch.n_paths):
                p = batch.path(i)
                ref = action(p, x, fields).weight \
                    * fields.g(np.atleast_2d(x + p.endpoint()))[0]
                assert abs(vals[i] - ref) <= 1e-9 * max(abs(ref), 1e-12)

    def test_empty_batch_paths_reduce_to_start_point(self):
        fields = bump_fields(2, v_amp=0.5)
        # huge cutoff: almost every path has zero jumps
        batch = sample_paths(ModelParams(2, 0.0), 1.0, 50.0, SEED, 94, 8)
        geo = _Geometry(batch)
        x = np.array([0.1, -0.2])
        vals = geo.values(fields, x, 0.0, True)
        expect = math.exp(-fields.v(x[None, :])[0]) \
            * fields.g(x[None, :])[0]
        for i in range(batch.n_paths):
            if batch.path(i).n_jumps == 0:
                assert vals[i] == pytest.approx(expect, rel=1e-14)


class TestEstimates:
    def test_arctan_box_oracle(self):
        fields = box_fields(1, half_width=1.0)
        params = ModelParams(1, 0.0)
        xs = np.array([[-1.5], [-0.5], [0.0], [0.5], [1.5]])
        ests = estimate_u_grid(params, fields, xs, 1.0, 1e-3, 30_000,
                               SEED, 95)
        for x, est in zip(xs[:, 0], ests):
            oracle = arctan_box(float(x), 1.0)
            assert abs(est.mean.real - oracle) <= 3.0 * est.stderr_re
            assert abs(est.mean.imag) < 1e-14

    def test_estimate_is_contraction(self):
        fields = bump_fields(1, a_amp=0.5, v_amp=0.5)
        est = estimate_u(ModelParams(1, 0.3), fields, [0.0], 1.0, 1e-2,
                         4000, SEED, 95)
        assert abs(est.mean) <= fields.sup_g

    def test_short_time_recovers_profile(self):
        fields = bump_fields(1)
        x = 0.3
        est = estimate_u(ModelParams(1, 0.0), fields, [x], 2.0 ** -10,
                         1e-3, 20_000, SEED, 96)
        g0 = fields.g(np.array([[x]]))[0]
        assert abs(est.mean.real - g0) < 0.01

    def test_zero_field_estimate_is_profile_average(self):
        fields = bump_fields(1)
        params = ModelParams(1, 0.0)
        est = estimate_u(params, fields, [0.2], 1.0, 1e-2, 2048, SEED, 97)
        batch = sample_paths(params, 1.0, 1e-2, SEED, 97, 2048)
        manual = np.mean(fields.g(0.2 + batch.endpoints()))
        assert est.mean.real == manual
        assert est.mean.imag == 0.0

    def test_thread_count_does_not_change_estimates(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        args = (ModelParams(1, 0.1), fields, [[0.0], [0.5]], 1.0, 1e-2,
                5000, SEED, 98)
        one = estimate_u_grid(*args, threads=1)
        many = estimate_u_grid(*args, threads=3)
        for a, b in zip(one, many):
            assert a.mean == b.mean
            assert a.stderr_re == b.stderr_re

    def test_coupled_massless_row_is_bit_identical_to_direct(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        xs = [[0.0], [0.7]]
        coupled = estimate_u_coupled([0.5, 0.0], fields, xs, 1.0, 1e-2,
                                     3000, SEED, 99)
        direct = estimate_u_grid(ModelParams(1, 0.0), fields, xs, 1.0,
                                 1e-2, 3000, SEED, 99)
        for k, est in enumerate(direct):
            assert coupled.means[-1, k] == est.mean
            assert coupled.stderrs_re[-1, k] == est.stderr_re

    def test_coupling_beats_independent_differencing(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        xs = [[0.0]]
        coupled = estimate_u_coupled([0.1, 0.0], fields, xs, 1.0, 1e-3,
                                     4000, SEED, 100)
        a = estimate_u(ModelParams(1, 0.1), fields, [0.0], 1.0, 1e-3,
                       4000, SEED, 101)
        b = estimate_u(ModelParams(1, 0.0), fields, [0.0], 1.0, 1e-3,
                       4000, SEED, 102)
        independent = math.hypot(a.stderr, b.stderr)
        assert coupled.diff_stderr(0, 0) < 0.2 * independent

    def test_coupled_differences_shrink_with_mass(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        xs = [[0.0], [0.5], [1.0]]
        res = estimate_u_coupled([1.0, 0.1, 0.0], fields, xs, 1.0, 1e-3,
                                 4000, SEED, 103)
        sup_big = np.max(np.abs(res.diff_means[0]))
        sup_small = np.max(np.abs(res.diff_means[1]))
        assert sup_small < 0.5 * sup_big
        assert np.all(np.abs(res.diff_means[-1]) == 0.0)

    def test_cutoff_robustness_within_budget(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        params = ModelParams(1, 0.0)
        eps = 0.05
        a = estimate_u(params, fields, [0.2], 1.0, eps, 40_000, SEED, 104)
        b = estimate_u(params, fields, [0.2], 1.0, eps / 8.0, 40_000,
                       SEED, 105)
        allowance = epsilon_budget(params, fields, 1.0, eps)["total"] \
            + epsilon_budget(params, fields, 1.0, eps / 8.0)["total"] \
            + 3.0 * math.hypot(a.stderr, b.stderr)
        assert abs(a.mean - b.mean) <= allowance

    def test_validation_errors(self):
        fields = bump_fields(1)
        with pytest.raises(ConfigError):
            estimate_u(ModelParams(2, 0.0), fields, [0.0, 0.0], 1.0, 1e-2,
                       100, SEED, 106)
        with pytest.raises(ConfigError):
            estimate_u_coupled([0.5, 0.1], fields, [[0.0]], 1.0, 1e-2,
                               100, SEED, 106)
        with pytest.raises(ConfigError):
            estimate_u_coupled([0.1, 0.5, 0.0], fields, [[0.0]], 1.0,
                               1e-2, 100, SEED, 106)


class TestBudget:
    def test_components_sum_to_total(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        parts = epsilon_budget(ModelParams(1, 0.0), fields, 1.0, 0.01)
        assert parts["total"] == pytest.approx(
            parts["curvature"] + parts["phase_mean"] + parts["phase_var"],
            rel=1e-15)
        assert parts["phase_mean"] > 0.0 and parts["phase_var"] > 0.0

    def test_budget_monotone_in_cutoff(self):
        fields = bump_fields(1, v_amp=0.5)
        params = ModelParams(1, 0.0)
        totals = [epsilon_budget(params, fields, 1.0, e)["total"]
                  for e in (0.1, 0.05, 0.01, 0.001)]
        assert all(a > b for a, b in zip(totals, totals[1:]))

    def test_certify_reaches_percent_target(self):
        fields = bump_fields(1, v_amp=0.5)
        cert = certify_epsilon(ModelParams(1, 0.0), fields, 1.0, 1e-2)
        assert cert.cutoff <= 0.1
        assert cert.parts["total"] <= 1e-2
        assert cert.ladder[-1][0] == cert.cutoff

    def test_looser_target_never_certifies_smaller_cutoff(self):
        fields = bump_fields(1, a_amp=0.4, v_amp=0.5)
        params = ModelParams(1, 0.0)
        tight = certify_epsilon(params, fields, 1.0, 1e-3)
        loose = certify_epsilon(params, fields, 1.0, 1e-1)
        assert loose.cutoff >= tight.cutoff

    def test_indicator_profile_cannot_be_certified(self):
        with pytest.raises(ConfigError):
            certify_epsilon(ModelParams(1, 0.0), box_fields(1), 1.0, 1e-2)

    def test_unreachable_target_fails_explicitly(self):
        fields = bump_fields(1, v_amp=0.5)
        with pytest.raises(ConfigError):
            certify_epsilon(ModelParams(1, 0.0), fields, 1.0, 1e-12,
                            max_halvings=4)
