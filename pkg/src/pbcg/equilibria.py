"""Constructive equilibria of the cost-reporting game, one constructor per
rule/ballot-class cell that admits one.

Each constructor returns an `NeConstruction` (profile, order, guarantee,
predicted funded set) and raises `NotApplicable` when its precondition
fails.  Unfunded projects always report their delivery cost.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import (
    ApprovalProfile,
    BallotClass,
    Money,
    PbGame,
    StrategyProfile,
    TieBreakOrder,
    ZERO,
    approval_proportional,
    classify_ballots,
    default_order,
    validate_ad_order,
)
from .rules import RuleId

ALL_ORDERS = "all-orders"
THIS_AD_ORDER = "this-ad-order"


@dataclass(frozen=True)
class NeConstruction:
    """A constructed equilibrium profile and what it is guaranteed for."""

    profile: StrategyProfile
    order: TieBreakOrder
    rule: RuleId
    guarantee: str
    predicted_funded: tuple[str, ...]


class NotApplicable(Exception):
    """The construction's precondition does not hold for this game."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def ne_basic_av(game: PbGame, order: TieBreakOrder | None = None) -> NeConstruction:
    """The approval-maximal project takes the whole budget; everyone else
    reports delivery cost."""
    order = order or default_order(game)
    order.validate_for(game.projects)
    score = game.approvals.approval_score
    top = min(game.projects, key=lambda p: (-score(p), order.index(p)))
    costs = {p: game.delivery[p] for p in game.projects}
    costs[top] = game.budget
    return NeConstruction(
        StrategyProfile(costs), order, RuleId.BASIC_AV, ALL_ORDERS, (top,)
    )


def ne_avcost_ap(game: PbGame) -> NeConstruction:
    """Approval-proportional shares; the unique ratio-rule equilibrium when
    every delivery cost fits under its share."""
    ap = approval_proportional(game)
    for p in game.projects:
        if game.delivery[p] > ap.cost(p):
            raise NotApplicable(
                f"delivery cost of {p!r} exceeds its approval-proportional share"
            )
    return NeConstruction(
        ap, default_order(game), RuleId.AV_OVER_COST, ALL_ORDERS, tuple(game.projects)
    )


def _ratio_replay(
    game: PbGame, order: TieBreakOrder, costs: Mapping[str, Fraction]
) -> tuple[set[str], dict[str, Fraction]]:
    """Replay the ratio rule on a raw cost map.

    Returns the funded set and, for each project, the budget still unspent at
    the moment it was considered (its room).
    """
    score = game.approvals.approval_score

    def key(p: str):
        c = costs[p]
        ratio = ZERO if c == 0 else -Fraction(score(p), 1) / c
        return (0 if c == 0 else 1, ratio, order.index(p))

    remaining = game.budget
    funded: set[str] = set()
    room: dict[str, Fraction] = {}
    for p in sorted(game.projects, key=key):
        room[p] = remaining
        if costs[p] <= remaining:
            funded.add(p)
            remaining -= costs[p]
    return funded, room


def _best_funded_cost(
    game: PbGame, order: TieBreakOrder, costs: Mapping[str, Fraction], p: str
) -> Fraction | None:
    """Largest report at which the ratio rule funds `p`, everyone else fixed.

    As p's report grows it slides down the consideration order; between two
    consecutive ratio alignments nothing else moves, so p's room there is a
    constant that one midpoint replay reads off.  The maximum is attained at
    an alignment point or at a room value, so testing those finitely many
    candidates is exact.  Returns None when no report gets p funded.
    """
    w = game.approvals.approval_score(p)
    candidates = {ZERO, game.budget}
    for q in game.projects:
        if q != p and costs[q] > 0:
            aligned = costs[q] * w / game.approvals.approval_score(q)
            if aligned <= game.budget:
                candidates.add(aligned)
    bands = sorted(candidates)
    for lo, hi in zip(bands, bands[1:]):
        probe = dict(costs)
        probe[p] = (lo + hi) / 2
        _, room = _ratio_replay(game, order, probe)
        candidates.add(room[p])
    for c in sorted(candidates, reverse=True):
        probe = dict(costs)
        probe[p] = c
        funded, _ = _ratio_replay(game, order, probe)
        if p in funded:
            return c
    return None


def ne_avcost_ad(game: PbGame, order: TieBreakOrder) -> NeConstruction:
    """Ratio-rule equilibrium for an approvals-to-delivery order, any deliveries.

    Waterfilling.  A common per-approval level rises from zero; every project
    whose delivery fits when the level reaches its own delivery-per-approval
    ratio joins the pool and its report rises with the level.  When the level
    hits the ratio of a project too expensive to join, that project stays out
    at its delivery cost, and just enough pool weight freezes at the tie,
    heaviest projects first, that the outsider no longer fits the money left
    at its slot.  Freezing that much weight is what keeps the frozen reports
    stable: if one of them backed off, the outsider would slide into the
    vacated room and eat it.  The rest of the pool keeps rising until the
    budget is spent or the prospects run out.

    A best-response pass then double-checks every report and fixes the rare
    leftovers the level sweep cannot see; it normally changes nothing.
    """
    validate_ad_order(game, order)
    score = game.approvals.approval_score
    costs: dict[str, Fraction] = dict(game.delivery)
    pool: list[str] = []
    spent_frozen = ZERO
    pending = list(order.ranking)
    idx = 0
    while idx < len(pending) or pool:
        weight = sum(score(p) for p in pool)
        exhaust = (game.budget - spent_frozen) / weight if weight else None
        t_next = (
            game.delivery[pending[idx]] / score(pending[idx])
            if idx < len(pending)
            else None
        )
        if t_next is None or (exhaust is not None and exhaust <= t_next):
            for p in pool:
                costs[p] = exhaust * score(p)
            break
        q = pending[idx]
        idx += 1
        level = t_next
        room = game.budget - spent_frozen - level * weight
        if game.delivery[q] <= room:
            pool.append(q)
            continue
        shortfall = (game.budget - spent_frozen) - game.delivery[q]
        if shortfall >= 0:
            # q would fit at its slot once the pool's reports sit above its
            # ratio; freeze heavy pool members at the tie until it cannot
            frozen_weight = ZERO
            for p in sorted(pool, key=lambda p: (-score(p), order.index(p))):
                if level * frozen_weight > shortfall:
                    break
                pool.remove(p)
                costs[p] = level * score(p)
                spent_frozen += costs[p]
                frozen_weight += score(p)

    for _ in range(16 * len(game.projects) + 32):
        funded_now, _ = _ratio_replay(game, order, costs)
        for p in order.ranking:
            if p in funded_now:
                best = _best_funded_cost(game, order, costs, p)
                if best is not None and best > costs[p]:
                    costs[p] = best
                    break
            elif costs[p] != game.delivery[p]:
                costs[p] = game.delivery[p]  # dropped out; stop overreporting
                break
            else:
                best = _best_funded_cost(game, order, costs, p)
                if best is not None and best > game.delivery[p]:
                    costs[p] = best  # profitable entry
                    break
        else:
            break
    else:
        raise RuntimeError("best-response stabilization did not settle")

    funded_set, _ = _ratio_replay(game, order, costs)
    funded = tuple(p for p in order.ranking if p in funded_set)
    return NeConstruction(
        StrategyProfile(costs), order, RuleId.AV_OVER_COST, THIS_AD_ORDER, funded
    )


def _require_party_list(game: PbGame) -> BallotClass:
    cls = classify_ballots(game.approvals)
    if not cls.is_party_list:
        raise NotApplicable("ballots are not party-list")
    return cls


def ne_phragmen_partylist_zero(game: PbGame) -> NeConstruction:
    """Load-balancer equilibrium for party-list ballots with free delivery:
    each project reports its party's voter share split evenly over the party."""
    cls = _require_party_list(game)
    if any(game.delivery[p] != 0 for p in game.projects):
        raise NotApplicable("construction requires zero delivery costs")
    n = len(game.approvals.voters)
    costs = {
        p: game.budget
        * game.approvals.approval_score(p)
        / (n * len(cls.party_of(p)))
        for p in game.projects
    }
    return NeConstruction(
        StrategyProfile(costs),
        default_order(game),
        RuleId.PHRAGMEN,
        ALL_ORDERS,
        tuple(game.projects),
    )


def ne_mes_cost(game: PbGame, order: TieBreakOrder | None = None) -> NeConstruction:
    """Equal-shares (cost variant) equilibrium, any game.

    Repeatedly: drop projects whose un-consumed supporters cannot cover their
    delivery cost (they report delivery, unfunded); the project with the most
    un-consumed supporters reports exactly their pooled endowment and consumes
    them.  Dropped zero-delivery projects with no supporters left report 0 and
    are still picked up (for free) at replay time, so they lead the predicted
    funding sequence.
    """
    order = order or default_order(game)
    order.validate_for(game.projects)
    n = len(game.approvals.voters)
    share = game.budget / n
    live_voters = set(game.approvals.voters)
    live = [p for p in order.ranking]
    costs: dict[str, Fraction] = {}
    selected: list[str] = []
    free_riders: list[str] = []
    while live:
        kept = []
        for p in live:
            backing = sum(1 for v in game.approvals.approvers(p) if v in live_voters)
            if backing == 0 or backing * share < game.delivery[p]:
                costs[p] = game.delivery[p]
                if backing == 0 and game.delivery[p] == 0:
                    free_riders.append(p)
            else:
                kept.append(p)
        live = kept
        if not live:
            break
        star = min(
            live,
            key=lambda p: (
                -sum(1 for v in game.approvals.approvers(p) if v in live_voters),
                order.index(p),
            ),
        )
        backers = [v for v in game.approvals.approvers(star) if v in live_voters]
        costs[star] = len(backers) * share
        live_voters.difference_update(backers)
        live.remove(star)
        selected.append(star)
    predicted = tuple(sorted(free_riders, key=order.index)) + tuple(selected)
    return NeConstruction(
        StrategyProfile(costs), order, RuleId.MES_COST, ALL_ORDERS, predicted
    )


def _voter_share_cap(game: PbGame, project: str) -> Fraction:
    return game.approvals.approval_score(project) * game.budget / len(game.approvals.voters)


def ne_mes_apr_plurality(game: PbGame) -> NeConstruction:
    """Equal-shares (approval variant) equilibrium for plurality ballots:
    report the supporters' pooled endowment when delivery fits under it,
    otherwise report delivery cost and stay unfunded."""
    cls = classify_ballots(game.approvals)
    if not cls.is_plurality:
        raise NotApplicable("ballots are not plurality")
    costs: dict[str, Fraction] = {}
    funded: list[str] = []
    for p in game.projects:
        cap = _voter_share_cap(game, p)
        if game.delivery[p] <= cap:
            costs[p] = cap
            funded.append(p)
        else:
            costs[p] = game.delivery[p]
    return NeConstruction(
        StrategyProfile(costs),
        default_order(game),
        RuleId.MES_APR,
        ALL_ORDERS,
        tuple(funded),
    )


def ne_mes_apr_partylist(
    game: PbGame, order: TieBreakOrder | None = None
) -> NeConstruction:
    """Equal-shares (approval variant) equilibrium for party-list ballots
    under an approvals-to-delivery order.

    Within each party, peel the lowest-priority member while the survivors
    cannot all be paid its delivery cost from the party endowment; peeled
    members report delivery cost, the survivors split the endowment evenly,
    capped at the last peeled delivery cost.
    """
    cls = _require_party_list(game)
    order = order or (
        default_order(game)
        if all(game.delivery[p] == 0 for p in game.projects)
        else None
    )
    if order is None:
        raise ValueError("an approvals-to-delivery order is required with nonzero deliveries")
    validate_ad_order(game, order)
    zero_delivery = all(game.delivery[p] == 0 for p in game.projects)
    costs: dict[str, Fraction] = {}
    funded: list[str] = []
    for party in cls.parties:
        members = sorted(party, key=order.index)
        endowment = _voter_share_cap(game, members[0])
        last_peeled: str | None = None
        while members and len(members) * game.delivery[members[-1]] > endowment:
            last_peeled = members.pop()
            costs[last_peeled] = game.delivery[last_peeled]
        if not members:
            continue
        even = endowment / len(members)
        cost = even if last_peeled is None else min(even, game.delivery[last_peeled])
        for p in members:
            costs[p] = cost
            funded.append(p)
    funded.sort(key=order.index)
    return NeConstruction(
        StrategyProfile(costs),
        order,
        RuleId.MES_APR,
        ALL_ORDERS if zero_delivery else THIS_AD_ORDER,
        tuple(funded),
    )


def small_cost_witness(gamma: int) -> tuple[PbGame, TieBreakOrder, StrategyProfile]:
    """A load-balancer equilibrium whose funded spending is only budget/gamma.

    Two singleton projects tie with a mass project at purchase time
    1/(2*gamma); both get bought for pennies and the mass project then
    exceeds the remaining budget and is dropped.
    """
    if gamma < 1:
        raise ValueError("gamma must be a positive integer")
    heavy = 20 * gamma - 1
    voters = ("w1", "w2") + tuple(f"z{i}" for i in range(1, heavy + 1))
    ballots: dict[str, frozenset[str]] = {
        "w1": frozenset({"p1"}),
        "w2": frozenset({"p2"}),
    }
    for i in range(1, heavy + 1):
        ballots[f"z{i}"] = frozenset({"p3"})
    tiny = Fraction(1, 2 * gamma)
    game = PbGame(
        projects=("p1", "p2", "p3"),
        approvals=ApprovalProfile(voters, ballots),
        budget=Fraction(10),
        delivery={"p1": ZERO, "p2": ZERO, "p3": Fraction(10) - tiny},
    )
    order = TieBreakOrder(("p1", "p2", "p3"))
    profile = StrategyProfile({"p1": tiny, "p2": tiny, "p3": Fraction(10) - tiny})
    return game, order, profile
