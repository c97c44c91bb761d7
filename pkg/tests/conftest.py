"""Shared builders for randomized game fixtures.

Every builder takes an explicit ``random.Random`` so callers control seeds;
tests stay reproducible run to run.
"""
from __future__ import annotations

import random
from fractions import Fraction

from pbcg.core import ApprovalProfile, PbGame, PbInstance, StrategyProfile, TieBreakOrder, ZERO


def _ballots_from_approvers(approvers: dict[str, list[str]]) -> dict[str, set[str]]:
    ballots: dict[str, set[str]] = {}
    for p, voters in approvers.items():
        for v in voters:
            ballots.setdefault(v, set()).add(p)
    return ballots


def _random_delivery(
    rng: random.Random, budget: Fraction, zero_share: float
) -> Fraction:
    if rng.random() < zero_share:
        return ZERO
    den = rng.choice((1, 2, 4, 5, 10))
    return Fraction(rng.randint(0, int(budget) * den), den)


def random_game(
    rng: random.Random,
    max_projects: int = 6,
    max_voters: int = 40,
    zero_delivery: bool = False,
    zero_share: float = 0.4,
) -> PbGame:
    """Unrestricted ballots; every project keeps at least one approver."""
    n_projects = rng.randint(2, max_projects)
    projects = tuple(f"p{i}" for i in range(n_projects))
    n_voters = rng.randint(n_projects, max_voters)
    voters = [f"v{i}" for i in range(n_voters)]
    approvers = {p: [] for p in projects}
    for v in voters:
        for p in rng.sample(projects, rng.randint(1, n_projects)):
            approvers[p].append(v)
    for i, p in enumerate(projects):
        if not approvers[p]:
            approvers[p].append(voters[i % n_voters])
    budget = Fraction(rng.randint(4, 60))
    delivery = {
        p: ZERO if zero_delivery else _random_delivery(rng, budget, zero_share)
        for p in projects
    }
    return PbGame(
        projects,
        ApprovalProfile.from_ballots(_ballots_from_approvers(approvers)),
        budget,
        delivery,
    )


def random_costs(
    rng: random.Random, game: PbGame, allow_zero: bool = True
) -> StrategyProfile:
    costs = {}
    for p in game.projects:
        if allow_zero and rng.random() < 0.1:
            costs[p] = ZERO
        else:
            den = rng.choice((1, 2, 4, 10))
            costs[p] = Fraction(rng.randint(1, int(game.budget) * den + den), den)
    return StrategyProfile(costs)


def random_order(rng: random.Random, game: PbGame) -> TieBreakOrder:
    ranking = list(game.projects)
    rng.shuffle(ranking)
    return TieBreakOrder(tuple(ranking))


def random_instance(rng: random.Random, **kwargs) -> PbInstance:
    game = random_game(rng, **kwargs)
    return game.to_instance(random_costs(rng, game), random_order(rng, game))


def random_plurality_game(
    rng: random.Random,
    max_projects: int = 6,
    max_voters: int = 40,
    zero_delivery: bool = False,
    zero_share: float = 0.4,
) -> PbGame:
    """Every voter approves exactly one project; every project gets a voter."""
    n_projects = rng.randint(2, max_projects)
    projects = tuple(f"p{i}" for i in range(n_projects))
    n_voters = rng.randint(n_projects, max_voters)
    ballots = {}
    for i in range(n_voters):
        target = projects[i] if i < n_projects else rng.choice(projects)
        ballots[f"v{i}"] = {target}
    budget = Fraction(rng.randint(4, 60))
    delivery = {
        p: ZERO if zero_delivery else _random_delivery(rng, budget, zero_share)
        for p in projects
    }
    return PbGame(
        projects, ApprovalProfile.from_ballots(ballots), budget, delivery
    )


def random_party_list_game(
    rng: random.Random,
    max_projects: int = 6,
    max_voters: int = 40,
    zero_delivery: bool = False,
    zero_share: float = 0.4,
    cap_delivery_to_pot: bool = False,
) -> PbGame:
    """Projects split into parties; each voter approves one party's full slate."""
    n_projects = rng.randint(2, max_projects)
    projects = [f"p{i}" for i in range(n_projects)]
    rng.shuffle(projects)
    parties: list[list[str]] = []
    i = 0
    while i < n_projects:
        size = rng.randint(1, n_projects - i)
        parties.append(projects[i : i + size])
        i += size
    n_voters = rng.randint(len(parties), max_voters)
    ballots = {}
    for i in range(n_voters):
        party = parties[i] if i < len(parties) else rng.choice(parties)
        ballots[f"v{i}"] = set(party)
    budget = Fraction(rng.randint(4, 60))
    approvals = ApprovalProfile.from_ballots(ballots)
    delivery: dict[str, Fraction] = {}
    for party in parties:
        pot = approvals.approval_score(party[0]) * budget / n_voters
        for p in party:
            if zero_delivery:
                delivery[p] = ZERO
            else:
                d = _random_delivery(rng, budget, zero_share)
                delivery[p] = min(d, pot) if cap_delivery_to_pot else d
    return PbGame(tuple(sorted(projects)), approvals, budget, delivery)
