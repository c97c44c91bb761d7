"""Better-response cost dynamics.

Each iteration a uniformly random project proposes a step: losers cut their
report, winners tentatively raise it and revert if the raise would cost them
funding.  Step sizes are a uniform fraction of the current report, drawn as
64-bit integers and mapped to exact rationals, so runs are reproducible from
the recorded generator name and seed alone.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import Money, PbGame, StrategyProfile, TieBreakOrder, ZERO, default_order
from .rules import RuleId, run_rule

_GENERATOR = "mt19937"
_U64 = 1 << 64


@dataclass(frozen=True)
class DynamicsConfig:
    seed: int
    iterations: int = 10_000
    step_fraction: Fraction = Fraction(1, 10)
    record_every: int = 100

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not 0 < self.step_fraction <= 1:
            raise ValueError("step fraction must lie in (0, 1]")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")


@dataclass(frozen=True)
class DynamicsTrace:
    rule: RuleId
    config: DynamicsConfig
    generator: str
    initial: StrategyProfile
    initial_funded: frozenset[str]
    snapshots: tuple[tuple[int, StrategyProfile, frozenset[str]], ...]
    final: StrategyProfile
    final_funded: frozenset[str]
    accepted_increases: Mapping[str, int]
    rejected_increases: Mapping[str, int]
    decreases: Mapping[str, int]
    skipped_zero_cost: Mapping[str, int]


def run_dynamics(
    game: PbGame,
    rule: RuleId,
    start: StrategyProfile,
    config: DynamicsConfig,
    order: TieBreakOrder | None = None,
) -> DynamicsTrace:
    order = order or default_order(game)
    projects = game.projects
    rng = random.Random(config.seed)
    costs = {p: start.cost(p) for p in projects}

    def outcome_funded() -> frozenset[str]:
        instance = game.to_instance(StrategyProfile(dict(costs)), order)
        return run_rule(instance, rule).funded_set

    funded = outcome_funded()
    initial_funded = funded
    accepted = {p: 0 for p in projects}
    rejected = {p: 0 for p in projects}
    decreases = {p: 0 for p in projects}
    skipped = {p: 0 for p in projects}
    snapshots: list[tuple[int, StrategyProfile, frozenset[str]]] = []
    for it in range(1, config.iterations + 1):
        p = projects[rng.randrange(len(projects))]
        cost = costs[p]
        if cost == 0:
            skipped[p] += 1  # cannot step a zero report
        else:
            step = cost * config.step_fraction * rng.getrandbits(64) / _U64
            if p in funded:
                costs[p] = cost + step
                trial = outcome_funded()
                if p in trial:
                    funded = trial
                    accepted[p] += 1
                else:
                    costs[p] = cost  # revert: never trade funding for a raise
                    rejected[p] += 1
            else:
                costs[p] = cost - step
                funded = outcome_funded()
                decreases[p] += 1
        if it % config.record_every == 0:
            snapshots.append((it, StrategyProfile(dict(costs)), funded))
    return DynamicsTrace(
        rule=rule,
        config=config,
        generator=_GENERATOR,
        initial=start,
        initial_funded=initial_funded,
        snapshots=tuple(snapshots),
        final=StrategyProfile(dict(costs)),
        final_funded=funded,
        accepted_increases=accepted,
        rejected_increases=rejected,
        decreases=decreases,
        skipped_zero_cost=skipped,
    )
