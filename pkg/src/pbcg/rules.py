"""The funding rules: greedy approval, approval-per-cost, continuous load
balancing, and the two equal-shares variants (plus their completed forms).

Everything runs on exact rationals; ties are detected exactly and broken by
the instance's tie-break order.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import Money, Outcome, PbInstance, ZERO


class RuleId(enum.Enum):
    BASIC_AV = "basicav"
    AV_OVER_COST = "avcost"
    PHRAGMEN = "phragmen"
    MES_COST = "mescost"
    MES_APR = "mesapr"
    MES_COST_PH = "mescost-ph"
    MES_APR_PH = "mesapr-ph"

    @classmethod
    def from_name(cls, name: str) -> "RuleId":
        for rule in cls:
            if rule.value == name:
                return rule
        raise ValueError(f"unknown rule {name!r}")


class Variant(enum.Enum):
    """Which quantity the equal-shares affordability coefficient scales."""

    COST = "cost"
    APR = "apr"


@dataclass(frozen=True)
class Affordability:
    """An affordability coefficient, or the distinguished value Infinite."""

    value: Fraction | None

    @classmethod
    def infinite(cls) -> "Affordability":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None


def _zero_balances(instance: PbInstance) -> dict[str, Fraction]:
    return {v: ZERO for v in instance.approvals.voters}


def run_basic_av(instance: PbInstance) -> Outcome:
    """Greedy by approval count; add a project whenever it still fits the budget."""
    score = instance.approvals.approval_score
    consideration = sorted(
        instance.projects, key=lambda p: (-score(p), instance.order.index(p))
    )
    funded: list[str] = []
    spent = ZERO
    for p in consideration:
        if spent + instance.cost(p) <= instance.budget:
            funded.append(p)
            spent += instance.cost(p)
    return Outcome(tuple(funded), {}, _zero_balances(instance))


def run_av_over_cost(instance: PbInstance) -> Outcome:
    """Greedy by approvals per unit cost; zero-cost projects count as infinite
    ratio and are considered first (among themselves by the tie-break order)."""
    score = instance.approvals.approval_score

    def key(p: str):
        c = instance.cost(p)
        ratio = ZERO if c == 0 else -Fraction(score(p), 1) / c
        return (0 if c == 0 else 1, ratio, instance.order.index(p))

    funded: list[str] = []
    spent = ZERO
    for p in sorted(instance.projects, key=key):
        if spent + instance.cost(p) <= instance.budget:
            funded.append(p)
            spent += instance.cost(p)
    return Outcome(tuple(funded), {}, _zero_balances(instance))


def run_phragmen(
    instance: PbInstance,
    initial_balances: Mapping[str, Fraction] | None = None,
    eligible: Iterable[str] | None = None,
    spent: Money = ZERO,
) -> Outcome:
    """Continuous load balancing.

    Voters earn money at unit rate; the first moment the approvers of a
    project jointly hold its cost, the highest-priority such project is
    bought and the buyers' balances reset to zero.  A purchasable project
    that no longer fits the remaining budget is dropped on the spot, without
    advancing the clock or touching any balance.

    `initial_balances`, `eligible`, and `spent` exist so a completion phase
    can resume from an earlier rule's state; they default to a fresh run.
    """
    voters = instance.approvals.voters
    # balance(v) at time t is t + offset[v]; a reset at time tau sets offset to -tau.
    offset: dict[str, Fraction] = {v: ZERO for v in voters}
    if initial_balances is not None:
        for v, b in initial_balances.items():
            offset[v] = b
    remaining = list(instance.projects) if eligible is None else [
        p for p in instance.projects if p in set(eligible)
    ]
    supporters = {p: instance.approvals.approvers(p) for p in remaining}
    budget_left = instance.budget - spent
    t = ZERO
    funded: list[str] = []
    removed: list[str] = []
    payments: dict[tuple[str, str], Fraction] = {}
    while remaining:
        times: dict[str, Fraction] = {}
        for p in remaining:
            backing = sum((offset[v] for v in supporters[p]), ZERO)
            need = (instance.cost(p) - backing) / len(supporters[p])
            times[p] = max(t, need)
        t = min(times.values())
        purchasable = [p for p in remaining if times[p] == t]
        best = min(purchasable, key=instance.order.index)
        if instance.cost(best) <= budget_left:
            for v in supporters[best]:
                payments[(v, best)] = t + offset[v]
                offset[v] = -t
            budget_left -= instance.cost(best)
            funded.append(best)
        else:
            removed.append(best)
        remaining.remove(best)
    balances = {v: t + offset[v] for v in voters}
    return Outcome(tuple(funded), payments, balances, tuple(removed))


def _solve_alpha(balances: Sequence[Fraction], cost: Fraction, scale: Fraction) -> Affordability:
    # Smallest alpha with sum(min(b_i, alpha * scale)) == cost; scale is the
    # project cost for the Cost variant and 1 for the Apr variant.
    if cost < 0:
        raise ValueError("cost must be nonnegative")
    if cost == 0:
        return Affordability(ZERO)
    if not balances or sum(balances) < cost:
        return Affordability.infinite()
    paid = ZERO
    ordered = sorted(balances)
    for i, b in enumerate(ordered):
        share = (cost - paid) / (len(ordered) - i)
        if share <= b:
            return Affordability(share / scale)
        paid += b
    raise AssertionError("unreachable: total balance covers the cost")


def solve_alpha_cost(balances: Sequence[Fraction], cost: Fraction) -> Affordability:
    """Affordability against payments capped at alpha * cost (lands in (0, 1])."""
    if cost == 0:
        return Affordability(ZERO)
    return _solve_alpha(balances, cost, cost)


def solve_alpha_apr(balances: Sequence[Fraction], cost: Fraction) -> Affordability:
    """Affordability against payments capped at alpha itself."""
    return _solve_alpha(balances, cost, Fraction(1))


_INF_KEY = (1, ZERO)


def run_mes(instance: PbInstance, variant: Variant) -> Outcome:
    """Equal shares: everyone starts with budget/n; repeatedly fund the
    project with the smallest affordability coefficient (ties by priority)
    and charge its approvers their capped shares; stop when nothing is
    affordable."""
    voters = instance.approvals.voters
    share = instance.budget / len(voters)
    balances = {v: share for v in voters}
    supporters = {p: instance.approvals.approvers(p) for p in instance.projects}
    solver = solve_alpha_cost if variant is Variant.COST else solve_alpha_apr

    def alpha_key(p: str) -> tuple:
        a = solver([balances[v] for v in supporters[p]], instance.cost(p))
        return _INF_KEY if a.is_infinite else (0, a.value)

    # Affordability only grows as balances shrink, so stale heap entries are
    # safe: re-solve on pop and re-push unless the entry was already current.
    heap = [(alpha_key(p), instance.order.index(p), p) for p in instance.projects]
    heapq.heapify(heap)
    funded: list[str] = []
    alphas: list[Fraction | None] = []
    payments: dict[tuple[str, str], Fraction] = {}
    while heap:
        key, idx, p = heapq.heappop(heap)
        fresh = alpha_key(p)
        if fresh != key:
            heapq.heappush(heap, (fresh, idx, p))
            continue
        if key == _INF_KEY:
            # The minimum is unaffordable, hence everything left is.
            leftover = [p] + [q for _, _, q in heap]
            removed = tuple(q for q in instance.projects if q in set(leftover))
            return Outcome(
                tuple(funded), payments, balances, removed, tuple(alphas)
            )
        alpha = fresh[1]
        cap = alpha * instance.cost(p) if variant is Variant.COST else alpha
        for v in supporters[p]:
            pay = min(balances[v], cap)
            payments[(v, p)] = pay
            balances[v] -= pay
        funded.append(p)
        alphas.append(alpha)
    return Outcome(tuple(funded), payments, balances, (), tuple(alphas))


def run_with_completion(instance: PbInstance, variant: Variant) -> Outcome:
    """Equal shares, then the load balancer resumes with the leftover
    balances and the unspent budget; dropped-by-shares projects stay eligible."""
    mes = run_mes(instance, variant)
    spent = sum((instance.cost(p) for p in mes.funded), ZERO)
    leftover = [p for p in instance.projects if p not in mes.funded_set]
    ph = run_phragmen(
        instance,
        initial_balances=mes.final_balances,
        eligible=leftover,
        spent=spent,
    )
    payments = dict(mes.payments)
    payments.update(ph.payments)
    return Outcome(
        mes.funded + ph.funded,
        payments,
        ph.final_balances,
        ph.removed,
        mes.alphas + (None,) * len(ph.funded),
    )


def run_rule(instance: PbInstance, rule: RuleId) -> Outcome:
    if rule is RuleId.BASIC_AV:
        return run_basic_av(instance)
    if rule is RuleId.AV_OVER_COST:
        return run_av_over_cost(instance)
    if rule is RuleId.PHRAGMEN:
        return run_phragmen(instance)
    if rule is RuleId.MES_COST:
        return run_mes(instance, Variant.COST)
    if rule is RuleId.MES_APR:
        return run_mes(instance, Variant.APR)
    if rule is RuleId.MES_COST_PH:
        return run_with_completion(instance, Variant.COST)
    if rule is RuleId.MES_APR_PH:
        return run_with_completion(instance, Variant.APR)
    raise ValueError(f"unknown rule {rule!r}")
