"""Best responses, winning/losing margins, equilibrium verification, and a
brute-force grid search used as an oracle for no-equilibrium claims.

A project's best response under a fixed opponent profile is the supremum of
reports keeping it funded; bisection brackets it to a requested tolerance and
a coarse scan certifies the funded region looks like a single interval from
zero.  Exact checks (tolerance 0) rely on closed forms and candidate-cost
probes instead.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    Money,
    PbGame,
    StrategyProfile,
    TieBreakOrder,
    ZERO,
    approval_proportional,
    default_order,
)
from .rules import RuleId, run_rule

_SCAN_POINTS = 32

WINNING = "winning"
LOSING = "losing"


def funded_at(
    game: PbGame,
    rule: RuleId,
    profile: StrategyProfile,
    project: str,
    cost: Money,
    order: TieBreakOrder | None = None,
) -> bool:
    """Would `project` be funded if it alone re-reported `cost`?"""
    order = order or default_order(game)
    instance = game.to_instance(profile.replace(project, cost), order)
    return project in run_rule(instance, rule).funded_set


@dataclass(frozen=True)
class BestResponse:
    """A bracket [lower, upper] around the supremum of funded reports."""

    project: str
    lower: Fraction
    upper: Fraction
    monotone_certified: bool
    payoff_at_lower: Fraction
    never_funded: bool = False

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def best_response(
    game: PbGame,
    rule: RuleId,
    profile: StrategyProfile,
    project: str,
    tolerance: Money,
    order: TieBreakOrder | None = None,
) -> BestResponse:
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    order = order or default_order(game)

    def funded(cost: Fraction) -> bool:
        return funded_at(game, rule, profile, project, cost, order)

    grid = [game.budget * k / (_SCAN_POINTS - 1) for k in range(_SCAN_POINTS)]
    scan = [(x, funded(x)) for x in grid]
    funded_points = [x for x, f in scan if f]
    if not funded_points:
        return BestResponse(project, ZERO, ZERO, True, ZERO, never_funded=True)
    lo = max(funded_points)
    if lo == game.budget:
        # Funded all the way up; certify there is no unfunded hole below.
        certified = all(f for _, f in scan)
        d = game.delivery[project]
        return BestResponse(project, game.budget, game.budget, certified, game.budget - d)
    hi = min(x for x, f in scan if not f and x > lo)
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        if funded(mid):
            lo = mid
        else:
            hi = mid
    certified = all(f for x, f in scan if x <= lo) and not any(
        f for x, f in scan if x > hi and f
    )
    return BestResponse(project, lo, hi, certified, lo - game.delivery[project])


def exact_threshold_basic_av(
    game: PbGame,
    profile: StrategyProfile,
    project: str,
    order: TieBreakOrder | None = None,
) -> Fraction:
    """Closed-form best response under greedy-by-approvals: the budget minus
    whatever the projects considered earlier have locked in.  The project's
    own report never changes its slot, so this is exact."""
    order = order or default_order(game)
    order.validate_for(game.projects)
    score = game.approvals.approval_score
    consideration = sorted(game.projects, key=lambda p: (-score(p), order.index(p)))
    spent = ZERO
    for p in consideration:
        if p == project:
            return game.budget - spent
        if spent + profile.cost(p) <= game.budget:
            spent += profile.cost(p)
    raise KeyError(f"unknown project {project!r}")


@dataclass(frozen=True)
class Margin:
    """How far a project sits from the funding boundary."""

    project: str
    kind: str  # winning | losing
    value: Fraction
    response: BestResponse


def _margin_for(
    game: PbGame,
    rule: RuleId,
    profile: StrategyProfile,
    project: str,
    tolerance: Money,
    order: TieBreakOrder,
    funded: frozenset[str],
) -> Margin:
    if rule is RuleId.BASIC_AV:
        thr = exact_threshold_basic_av(game, profile, project, order)
        br = BestResponse(project, thr, thr, True, thr - game.delivery[project])
    else:
        br = best_response(game, rule, profile, project, tolerance, order)
    cost = profile.cost(project)
    if project in funded:
        return Margin(project, WINNING, max(ZERO, br.lower - cost), br)
    return Margin(project, LOSING, max(ZERO, cost - br.lower), br)


def margins(
    game: PbGame,
    rule: RuleId,
    profile: StrategyProfile,
    tolerance: Money,
    order: TieBreakOrder | None = None,
    workers: int | None = None,
) -> list[Margin]:
    """Margins for every project, ordered by approval count descending.

    Worker count defaults to the PBCG_THREADS environment variable; results
    are merged in input order, so the output is deterministic either way.
    """
    order = order or default_order(game)
    outcome = run_rule(game.to_instance(profile, order), rule)
    funded = outcome.funded_set
    pos = {p: i for i, p in enumerate(game.projects)}
    ranked = sorted(
        game.projects, key=lambda p: (-game.approvals.approval_score(p), pos[p])
    )
    if workers is None:
        workers = int(os.environ.get("PBCG_THREADS", "1") or "1")

    def one(p: str) -> Margin:
        return _margin_for(game, rule, profile, p, tolerance, order, funded)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, ranked))
    return [one(p) for p in ranked]


@dataclass(frozen=True)
class Violation:
    project: str
    deviate_to: Fraction
    gain: Fraction


@dataclass(frozen=True)
class NeReport:
    verified: bool
    violations: tuple[Violation, ...]
    warnings: tuple[str, ...]


def _probe_costs(
    game: PbGame, profile: StrategyProfile, project: str, tolerance: Money
) -> list[Fraction]:
    ap = approval_proportional(game)
    probes = {ZERO, game.delivery[project], ap.cost(project)}
    for q in game.projects:
        if q == project:
            continue
        c = profile.cost(q)
        probes.add(c)
        if tolerance > 0:
            probes.update({c - tolerance, c + tolerance})
    return sorted(x for x in probes if 0 <= x <= game.budget)


def verify_ne(
    game: PbGame,
    rule: RuleId,
    profile: StrategyProfile,
    order: TieBreakOrder,
    tolerance: Money,
) -> NeReport:
    """Check that no project has a profitable unilateral deviation.

    Always probes the exact candidate costs (zero, own delivery, own
    approval-proportional share, every opponent's cost, and at positive
    tolerance those costs nudged by it); with positive tolerance it also
    brackets each best response and flags gains exceeding the tolerance.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    order.validate_for(game.projects)
    outcome = run_rule(game.to_instance(profile, order), rule)
    funded = outcome.funded_set
    violations: list[Violation] = []
    warnings: list[str] = []
    for p in game.projects:
        current = profile.cost(p) - game.delivery[p] if p in funded else ZERO
        seen = ZERO  # best gain found, to keep one violation per project
        best_dev: Fraction | None = None
        for c in _probe_costs(game, profile, p, tolerance):
            if funded_at(game, rule, profile, p, c, order):
                gain = (c - game.delivery[p]) - current
                if gain > tolerance and gain > seen:
                    seen = gain
                    best_dev = c
        if best_dev is None and tolerance > 0:
            br = best_response(game, rule, profile, p, tolerance, order)
            if not br.monotone_certified:
                warnings.append(f"funded region of {p!r} not certified monotone")
            if not br.never_funded:
                gain = br.payoff_at_lower - current
                if gain > tolerance:
                    seen = gain
                    best_dev = br.lower
        if best_dev is not None:
            violations.append(Violation(p, best_dev, seen))
    return NeReport(not violations, tuple(violations), tuple(warnings))


def _axis_values(step: Fraction, cap: Fraction, floor: Fraction) -> list[Fraction]:
    count = cap / step
    if count.denominator != 1:
        raise ValueError("grid step must divide the cost cap")
    start = floor / step
    if start.denominator != 1:
        raise ValueError("grid step must divide the cost floor")
    if floor < 0 or floor > cap:
        raise ValueError("cost floor must lie in [0, cost cap]")
    return [step * i for i in range(int(start), int(count) + 1)]


def grid_ne_search(
    game: PbGame,
    rule: RuleId,
    order: TieBreakOrder,
    grid_step: Money,
    cost_cap: Money | Mapping[str, Money],
    cost_floor: Money | Mapping[str, Money] = ZERO,
    guard: int = 10_000_000,
) -> list[StrategyProfile]:
    """Enumerate every profile on the grid and keep those with no profitable
    grid deviation.  `cost_cap` and `cost_floor` may each be one value or a
    per-project map, and both deviations and profiles stay inside the box they
    describe; the total grid size is guarded."""
    if grid_step <= 0:
        raise ValueError("grid step must be positive")
    caps = (
        {p: cost_cap for p in game.projects}
        if not isinstance(cost_cap, Mapping)
        else dict(cost_cap)
    )
    if set(caps) != set(game.projects):
        raise ValueError("cost cap map must cover exactly the project set")
    floors = (
        {p: cost_floor for p in game.projects}
        if not isinstance(cost_floor, Mapping)
        else dict(cost_floor)
    )
    if set(floors) != set(game.projects):
        raise ValueError("cost floor map must cover exactly the project set")
    axes = {p: _axis_values(grid_step, caps[p], floors[p]) for p in game.projects}
    total = 1
    for vals in axes.values():
        total *= len(vals)
    if total > guard:
        raise ValueError(f"grid has {total} profiles, above the {guard} guard")
    projects = game.projects
    value_lists = [axes[p] for p in projects]
    delivery = [game.delivery[p] for p in projects]

    bit = {p: 1 << i for i, p in enumerate(projects)}
    outcomes: dict[tuple[int, ...], int] = {}
    for idx in itertools.product(*(range(len(v)) for v in value_lists)):
        costs = {p: value_lists[i][idx[i]] for i, p in enumerate(projects)}
        instance = game.to_instance(StrategyProfile(costs), order)
        mask = 0
        for p in run_rule(instance, rule).funded:
            mask |= bit[p]
        outcomes[idx] = mask

    survivors: list[StrategyProfile] = []
    for idx, mask in outcomes.items():
        stable = True
        for i, p in enumerate(projects):
            val = value_lists[i][idx[i]]
            current = val - delivery[i] if mask & bit[p] else ZERO
            for alt in range(len(value_lists[i])):
                if alt == idx[i]:
                    continue
                alt_idx = idx[:i] + (alt,) + idx[i + 1 :]
                alt_mask = outcomes[alt_idx]
                alt_val = value_lists[i][alt]
                alt_payoff = alt_val - delivery[i] if alt_mask & bit[p] else ZERO
                if alt_payoff > current:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            survivors.append(
                StrategyProfile({p: value_lists[i][idx[i]] for i, p in enumerate(projects)})
            )
    return survivors
