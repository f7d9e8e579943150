import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from shapebandit.core import BanditInstance, Environment, InvalidRange, simple_regret
from shapebandit.ctb import (
    COST_FACTOR,
    CtbTrace,
    PhaseState,
    ctb_run,
    ctb_schedule,
    decide,
    log_set,
    mirrored_log_set,
    schedule_cost,
)
from shapebandit.instances import gen_lower_bound_instance, gen_random_instance


class TestLogSet:
    def test_examples(self):
        assert log_set(1, 100) == [1, 2, 3, 5, 9, 17, 33, 50]
        assert log_set(1, 3) == [1, 2]
        assert log_set(1, 2) == [1]

    def test_bad_range(self):
        with pytest.raises(InvalidRange):
            log_set(5, 4)

    @settings(max_examples=500)
    @given(st.integers(-100, 100), st.integers(0, 2000))
    def test_matches_definition(self, l, width):
        r = l + width
        assert log_set(l, r) == oracles.log_set(l, r)
        mirror = mirrored_log_set(l, r)
        assert mirror == sorted(-x for x in oracles.log_set(-r, -l))
        assert all((l + r) // 2 <= x <= r for x in mirror)


class TestSchedule:
    def test_first_phase(self):
        s = ctb_schedule(64, 10 ** 6, 4)
        assert s.eps[0] == 0.875
        assert s.thresholds(0.0)[0] == pytest.approx(-0.65625)

    def test_delta(self):
        s = ctb_schedule(64, schedule_cost(64, 10, 4), 4)
        assert s.m_phases == 10
        assert s.delta[2] == 0.0078125

    def test_brute_force_m(self):
        K, B, c = 256, 10 ** 6, 4
        s = ctb_schedule(K, B, c)
        M = s.m_phases
        cost = lambda m: COST_FACTOR * sum(oracles.ctb_phase_pulls(K, i, m, c) for i in range(1, m + 1))
        assert cost(M) <= B < cost(M + 1)
        assert s.t2 == tuple(oracles.ctb_phase_pulls(K, i, M, c) for i in range(1, M + 1))

    def test_paper_constant_desk_budget(self):
        # the default constant leaves no usable phase at desk budgets
        s = ctb_schedule(64, 10 ** 5)
        assert s.m_phases <= 1


def _deterministic_ramp(K, level, eps=0.5, sigma=0.0):
    g = gen_lower_bound_instance("concave_ramp", K, eps, 1.0, level)
    return BanditInstance.deterministic(g.means, g.tau, "concave", sigma)


class TestRun:
    @pytest.mark.parametrize("K,level", [(8, 1), (16, 2), (64, 1), (256, 2)])
    def test_noiseless_ramp(self, K, level):
        inst = _deterministic_ramp(K, level)
        for seed in range(20):
            q = ctb_run(Environment(inst, seed=seed), inst.tau, 20000, constant_c=1)
            assert simple_regret(inst, q) == 0.0

    def test_unresolvable_ramp_level(self):
        # crossing gap eps/8 sits below the last phase's eps: the boundary arm is missed
        inst = _deterministic_ramp(64, 3)
        trace = CtbTrace()
        ctb_run(Environment(inst), inst.tau, 20000, constant_c=1, trace=trace)
        assert min(trace.schedule.eps) > 0.5 / 8
        assert (trace.lhat, trace.rhat) != (8, 64)

    def test_all_far_below(self):
        inst = BanditInstance.deterministic([0.0, 0.5, 0.8, 0.9, 0.7, 0.2], 2.0, "concave")
        trace = CtbTrace()
        q = ctb_run(Environment(inst), 2.0, 20000, constant_c=1, trace=trace)
        assert q == (-1,) * 6 and (trace.lhat, trace.rhat) == (None, None)

    def test_falls_back_when_no_phase_fits(self):
        inst = _deterministic_ramp(16, 1)
        trace = CtbTrace()
        q = ctb_run(Environment(inst), inst.tau, 5000, trace=trace)
        assert trace.fallback and simple_regret(inst, q) == 0.0

    @settings(max_examples=120, deadline=None)
    @given(st.integers(3, 64), st.integers(0, 10 ** 6), st.integers(2000, 40000))
    def test_budget_and_nesting(self, K, seed, budget):
        inst = gen_random_instance("concave", K, seed, variant="deterministic")
        trace = CtbTrace()
        env = Environment(inst, seed=seed, budget_cap=budget)
        q = ctb_run(env, inst.tau, budget, constant_c=1, trace=trace)
        assert env.pulls_used <= budget
        ls = [p.l for p in trace.phases]
        rs = [p.r for p in trace.phases]
        assert ls == sorted(ls) and rs == sorted(rs, reverse=True)
        if not trace.fallback:
            plus = [k for k, v in enumerate(q) if v == 1]
            if plus:
                assert plus == list(range(plus[0], plus[-1] + 1))


class TestDecide:
    def _phase(self, l, m, r, mus, eps=0.1):
        return PhaseState(1, l, m, r, eps, *mus)

    def test_empty_middle(self):
        p = self._phase(1, 5, 9, (0.0, 0.0, 0.0, 0.0, 0.0))
        assert decide([p], 1.0) == (None, None)

    def test_interval(self):
        # mu_l, mu_lo, mu_r, mu_ro, mu_m
        p = self._phase(3, 5, 8, (1.0, 0.5, 1.0, 0.5, 2.0))
        assert decide([p], 1.0) == (3, 8)

    def test_missing_side(self):
        p = self._phase(3, 5, 8, (1.0, 0.99, 1.0, 0.5, 2.0))
        assert decide([p], 1.0) == (None, None)


def test_ramp_rate_with_reduced_constant():
    from shapebandit.harness import family_regrets, mean_se
    r1, _ = family_regrets("ctb", "concave_ramp", 64, 2000, 400, 5, {"ctb_constant": 4})
    r4, _ = family_regrets("ctb", "concave_ramp", 64, 8000, 400, 5, {"ctb_constant": 4})
    (m1, s1), (m4, s4) = mean_se(r1), mean_se(r4)
    assert m4 <= (0.5 + 3 * np.hypot(s1 / m1, s4 / m4)) * m1


def test_k_growth_at_most_loglog():
    import math
    from shapebandit.harness import family_regrets, fit_power_law, mean_se
    Ks = [16, 256, 4096]
    means = [mean_se(family_regrets("ctb", "concave_ramp", K, 32000, 200, 3,
                                    {"ctb_constant": 4})[0])[0] for K in Ks]
    fit = fit_power_law([math.log(math.log(K)) for K in Ks], means)
    assert fit.slope <= 1.0 + 3 * fit.slope_se
