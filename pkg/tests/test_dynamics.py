"""Better-response dynamics: determinism, move semantics, convergence."""
from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from pbcg.core import StrategyProfile, gallery
from pbcg.dynamics import DynamicsConfig, run_dynamics
from pbcg.rules import RuleId

from conftest import random_costs, random_game


def _g1_start(p1: F = F(8), p2: F = F(8)) -> StrategyProfile:
    return StrategyProfile({"p1": p1, "p2": p2})


@pytest.fixture(scope="module")
def fine_trace():
    """A record-every-iteration walk used by the move-semantics tests."""
    g1 = gallery()["g1"]
    config = DynamicsConfig(seed=11, iterations=400, record_every=1)
    return g1, run_dynamics(g1.game, RuleId.AV_OVER_COST, _g1_start(), config)


class TestConfig:
    def test_defaults(self):
        config = DynamicsConfig(seed=1)
        assert config.iterations == 10_000
        assert config.step_fraction == F(1, 10)
        assert config.record_every == 100

    def test_negative_iterations_rejected(self):
        with pytest.raises(ValueError):
            DynamicsConfig(seed=1, iterations=-1)

    @pytest.mark.parametrize("frac", [F(0), F(11, 10), F(-1, 2)])
    def test_step_fraction_outside_unit_interval_rejected(self, frac):
        with pytest.raises(ValueError):
            DynamicsConfig(seed=1, step_fraction=frac)

    def test_nonpositive_record_every_rejected(self):
        with pytest.raises(ValueError):
            DynamicsConfig(seed=1, record_every=0)


class TestTraceShape:
    def test_zero_iterations_returns_start_unchanged(self):
        g1 = gallery()["g1"]
        trace = run_dynamics(
            g1.game, RuleId.AV_OVER_COST, _g1_start(), DynamicsConfig(seed=3, iterations=0)
        )
        assert trace.final.costs == trace.initial.costs == _g1_start().costs
        assert trace.snapshots == ()
        assert trace.initial_funded == trace.final_funded
        for counter in (
            trace.accepted_increases,
            trace.rejected_increases,
            trace.decreases,
            trace.skipped_zero_cost,
        ):
            assert all(v == 0 for v in counter.values())

    def test_generator_and_config_recorded(self, fine_trace):
        _, trace = fine_trace
        assert trace.generator == "mt19937"
        assert trace.config.seed == 11
        assert trace.rule is RuleId.AV_OVER_COST

    def test_snapshot_schedule(self):
        g1 = gallery()["g1"]
        config = DynamicsConfig(seed=5, iterations=250, record_every=40)
        trace = run_dynamics(g1.game, RuleId.AV_OVER_COST, _g1_start(), config)
        iterations = [it for it, _, _ in trace.snapshots]
        assert iterations == [40, 80, 120, 160, 200, 240]
        assert all(b > a for a, b in zip(iterations, iterations[1:]))

    def test_final_matches_last_snapshot_when_schedule_divides(self, fine_trace):
        _, trace = fine_trace
        last_it, last_profile, last_funded = trace.snapshots[-1]
        assert last_it == trace.config.iterations
        assert last_profile.costs == trace.final.costs
        assert last_funded == trace.final_funded

    def test_counters_account_for_every_iteration(self, fine_trace):
        _, trace = fine_trace
        total = sum(
            sum(counter.values())
            for counter in (
                trace.accepted_increases,
                trace.rejected_increases,
                trace.decreases,
                trace.skipped_zero_cost,
            )
        )
        assert total == trace.config.iterations


class TestDeterminism:
    def test_identical_seeds_reproduce_identical_traces(self):
        g1 = gallery()["g1"]
        config = DynamicsConfig(seed=42, iterations=300, record_every=10)
        runs = [
            run_dynamics(g1.game, RuleId.AV_OVER_COST, _g1_start(), config)
            for _ in range(2)
        ]
        assert runs[0].final.costs == runs[1].final.costs
        assert runs[0].final_funded == runs[1].final_funded
        assert len(runs[0].snapshots) == len(runs[1].snapshots)
        for (it_a, prof_a, fund_a), (it_b, prof_b, fund_b) in zip(*[
            r.snapshots for r in runs
        ]):
            assert it_a == it_b
            assert prof_a.costs == prof_b.costs
            assert fund_a == fund_b
        assert runs[0].accepted_increases == runs[1].accepted_increases
        assert runs[0].decreases == runs[1].decreases

    def test_distinct_seeds_diverge(self):
        g1 = gallery()["g1"]
        finals = [
            run_dynamics(
                g1.game,
                RuleId.AV_OVER_COST,
                _g1_start(),
                DynamicsConfig(seed=seed, iterations=200),
            ).final.costs
            for seed in (1, 2)
        ]
        assert finals[0] != finals[1]


class TestMoveSemantics:
    def test_at_most_one_report_changes_per_iteration(self, fine_trace):
        g1, trace = fine_trace
        prev = trace.initial
        for _, profile, _ in trace.snapshots:
            changed = [p for p in g1.game.projects if profile.cost(p) != prev.cost(p)]
            assert len(changed) <= 1
            prev = profile

    def test_raises_only_by_winners_and_never_fatal(self, fine_trace):
        g1, trace = fine_trace
        prev_profile, prev_funded = trace.initial, trace.initial_funded
        for _, profile, funded in trace.snapshots:
            for p in g1.game.projects:
                if profile.cost(p) > prev_profile.cost(p):
                    assert p in prev_funded, "only a funded project may raise"
                    assert p in funded, "an accepted raise never loses funding"
            prev_profile, prev_funded = profile, funded

    def test_cuts_only_by_losers(self, fine_trace):
        g1, trace = fine_trace
        prev_profile, prev_funded = trace.initial, trace.initial_funded
        for _, profile, funded in trace.snapshots:
            for p in g1.game.projects:
                if profile.cost(p) < prev_profile.cost(p):
                    assert p not in prev_funded, "only a losing project cuts"
            prev_profile, prev_funded = profile, funded

    def test_reports_stay_inside_step_envelope(self):
        rng = random.Random(909)
        game = random_game(rng, zero_delivery=True)
        start = random_costs(rng, game)
        if any(start.cost(p) == 0 for p in game.projects):
            start = StrategyProfile(
                {p: start.cost(p) or F(1) for p in game.projects}
            )
        config = DynamicsConfig(seed=17, iterations=200, record_every=20)
        trace = run_dynamics(game, RuleId.AV_OVER_COST, start, config)
        up = 1 + config.step_fraction
        down = 1 - config.step_fraction
        for it, profile, _ in trace.snapshots:
            for p in game.projects:
                initial = start.cost(p)
                assert profile.cost(p) <= initial * up**it
                assert profile.cost(p) > initial * down**it > 0

    def test_zero_report_is_flagged_and_skipped(self):
        g1 = gallery()["g1"]
        start = StrategyProfile({"p1": F(0), "p2": F(6)})
        trace = run_dynamics(
            g1.game,
            RuleId.AV_OVER_COST,
            start,
            DynamicsConfig(seed=9, iterations=120),
        )
        assert trace.final.cost("p1") == 0
        assert trace.skipped_zero_cost["p1"] > 0
        assert trace.skipped_zero_cost["p2"] == 0


class TestConvergence:
    def test_ratio_rule_start_at_equilibrium_never_moves(self):
        g1 = gallery()["g1"]
        trace = run_dynamics(
            g1.game,
            RuleId.AV_OVER_COST,
            _g1_start(F(4), F(6)),
            DynamicsConfig(seed=7, iterations=500),
        )
        assert trace.final.costs == {"p1": F(4), "p2": F(6)}
        assert sum(trace.rejected_increases.values()) == 500
        assert sum(trace.decreases.values()) == 0

    def test_ratio_rule_converges_back_to_equilibrium(self):
        g1 = gallery()["g1"]
        trace = run_dynamics(
            g1.game,
            RuleId.AV_OVER_COST,
            _g1_start(F(8), F(8)),
            DynamicsConfig(seed=1, iterations=3000),
        )
        tolerance = g1.game.budget / 100
        assert abs(trace.final.cost("p1") - F(4)) <= tolerance
        assert abs(trace.final.cost("p2") - F(6)) <= tolerance

    def test_approval_max_project_captures_budget(self):
        g1 = gallery()["g1"]
        trace = run_dynamics(
            g1.game,
            RuleId.BASIC_AV,
            _g1_start(F(4), F(6)),
            DynamicsConfig(seed=1, iterations=2000),
        )
        budget = g1.game.budget
        assert trace.final.cost("p2") >= budget * F(95, 100)
        assert trace.final.cost("p1") <= F(1, 2)

    def test_time_based_rule_keeps_oscillating(self):
        g3 = gallery()["g3"]
        start = StrategyProfile({p: F(1, 10) for p in g3.game.projects})
        trace = run_dynamics(
            g3.game,
            RuleId.PHRAGMEN,
            start,
            DynamicsConfig(seed=5, iterations=1200, record_every=1),
        )
        window = trace.snapshots[-800:]
        spread = max(
            max(s.cost(p) for _, s, _ in window) - min(s.cost(p) for _, s, _ in window)
            for p in g3.game.projects
        )
        assert spread > g3.game.budget / 1000
