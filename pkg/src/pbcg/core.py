"""Domain model for participatory-budgeting cost games.

All quantities of money are exact rationals (``fractions.Fraction``); tie
detection in the rules is exact, so nothing here ever touches floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Money = Fraction

ZERO = Fraction(0)


def money(value: int | str | Fraction) -> Fraction:
    """Coerce an exact value to a Fraction.

    Accepts ints, Fractions, and decimal/rational strings ("0.1" parses to
    exactly 1/10). Floats are rejected: they would smuggle in rounding error.
    """
    if isinstance(value, bool):
        raise TypeError("money() does not accept booleans")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("money() does not accept floats; pass a string or Fraction")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a valid money value: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to money")


@dataclass(frozen=True)
class ApprovalProfile:
    """Approval ballots: an ordered voter list plus one nonempty ballot each."""

    voters: tuple[str, ...]
    ballots: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        if not self.voters:
            raise ValueError("approval profile needs at least one voter")
        if len(set(self.voters)) != len(self.voters):
            raise ValueError("duplicate voter identifier")
        if set(self.ballots) != set(self.voters):
            raise ValueError("ballots must cover exactly the voter list")
        for v in self.voters:
            if not self.ballots[v]:
                raise ValueError(f"voter {v!r} has an empty ballot")

    @classmethod
    def from_ballots(cls, ballots: Mapping[str, Iterable[str]]) -> "ApprovalProfile":
        return cls(tuple(ballots), {v: frozenset(b) for v, b in ballots.items()})

    def approvers(self, project: str) -> tuple[str, ...]:
        """Voters approving `project`, in voter-list order."""
        return tuple(v for v in self.voters if project in self.ballots[v])

    def approval_score(self, project: str) -> int:
        return sum(1 for v in self.voters if project in self.ballots[v])

    def approved_projects(self) -> frozenset[str]:
        out: set[str] = set()
        for b in self.ballots.values():
            out |= b
        return frozenset(out)


@dataclass(frozen=True)
class TieBreakOrder:
    """A total strict priority order over project identifiers."""

    ranking: tuple[str, ...]
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.ranking)) != len(self.ranking):
            raise ValueError("tie-break order repeats a project")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.ranking)})

    def index(self, project: str) -> int:
        try:
            return self._index[project]
        except KeyError:
            raise KeyError(f"project {project!r} not in tie-break order") from None

    def validate_for(self, projects: Iterable[str]) -> None:
        if set(self.ranking) != set(projects):
            raise ValueError("tie-break order must be a permutation of the project set")

    def prefers(self, a: str, b: str) -> bool:
        return self.index(a) < self.index(b)


def _check_population(
    projects: tuple[str, ...], approvals: ApprovalProfile, budget: Fraction
) -> None:
    if not projects:
        raise ValueError("need at least one project")
    if len(set(projects)) != len(projects):
        raise ValueError("duplicate project identifier")
    if budget <= 0:
        raise ValueError("budget must be positive")
    known = set(projects)
    for v in approvals.voters:
        extra = approvals.ballots[v] - known
        if extra:
            raise ValueError(f"voter {v!r} approves unknown project(s) {sorted(extra)}")
    for p in projects:
        if approvals.approval_score(p) == 0:
            raise ValueError(f"project {p!r} has no approvers")


@dataclass(frozen=True)
class PbInstance:
    """A concrete election: projects with costs, ballots, budget, tie-break order."""

    projects: tuple[str, ...]
    approvals: ApprovalProfile
    budget: Fraction
    costs: Mapping[str, Fraction]
    order: TieBreakOrder

    def __post_init__(self) -> None:
        _check_population(self.projects, self.approvals, self.budget)
        if set(self.costs) != set(self.projects):
            raise ValueError("cost map must cover exactly the project set")
        for p, c in self.costs.items():
            if c < 0:
                raise ValueError(f"negative cost for {p!r}")
        self.order.validate_for(self.projects)

    def cost(self, project: str) -> Fraction:
        return self.costs[project]


@dataclass(frozen=True)
class PbGame:
    """A cost game: the election with costs left open, plus per-project delivery costs."""

    projects: tuple[str, ...]
    approvals: ApprovalProfile
    budget: Fraction
    delivery: Mapping[str, Fraction]

    def __post_init__(self) -> None:
        _check_population(self.projects, self.approvals, self.budget)
        if set(self.delivery) != set(self.projects):
            raise ValueError("delivery map must cover exactly the project set")
        for p, d in self.delivery.items():
            if d < 0:
                raise ValueError(f"negative delivery cost for {p!r}")
            if d > self.budget:
                raise ValueError(f"delivery cost of {p!r} exceeds the budget")

    def to_instance(self, profile: "StrategyProfile", order: TieBreakOrder) -> PbInstance:
        return PbInstance(
            projects=self.projects,
            approvals=self.approvals,
            budget=self.budget,
            costs={p: profile.cost(p) for p in self.projects},
            order=order,
        )


@dataclass(frozen=True)
class StrategyProfile:
    """Reported costs, one per project."""

    costs: Mapping[str, Fraction]

    def __post_init__(self) -> None:
        for p, c in self.costs.items():
            if c < 0:
                raise ValueError(f"negative reported cost for {p!r}")

    def cost(self, project: str) -> Fraction:
        try:
            return self.costs[project]
        except KeyError:
            raise KeyError(f"no reported cost for project {project!r}") from None

    def replace(self, project: str, cost: Fraction) -> "StrategyProfile":
        if project not in self.costs:
            raise KeyError(f"no reported cost for project {project!r}")
        out = dict(self.costs)
        out[project] = cost
        return StrategyProfile(out)

    def as_tuple(self, projects: Iterable[str]) -> tuple[Fraction, ...]:
        return tuple(self.cost(p) for p in projects)


@dataclass(frozen=True)
class Outcome:
    """Result of running a rule.

    `funded` preserves selection order.  `payments` maps (voter, project) to
    the amount debited; empty for the two AV rules.  `alphas` aligns with
    `funded` and holds the affordability coefficient for MES selections
    (None for selections made by other phases).
    """

    funded: tuple[str, ...]
    payments: Mapping[tuple[str, str], Fraction]
    final_balances: Mapping[str, Fraction]
    removed: tuple[str, ...] = ()
    alphas: tuple[Fraction | None, ...] = ()

    @property
    def funded_set(self) -> frozenset[str]:
        return frozenset(self.funded)


PLURALITY = "plurality"
PARTY_LIST = "party-list"
UNRESTRICTED = "unrestricted"


@dataclass(frozen=True)
class BallotClass:
    """Ballot-structure classification, with the induced project partition when it exists."""

    kind: str
    parties: tuple[frozenset[str], ...] | None = None

    @property
    def is_plurality(self) -> bool:
        return self.kind == PLURALITY

    @property
    def is_party_list(self) -> bool:
        return self.kind in (PLURALITY, PARTY_LIST)

    def party_of(self, project: str) -> frozenset[str]:
        if self.parties is None:
            raise ValueError("no party partition for unrestricted ballots")
        for party in self.parties:
            if project in party:
                return party
        raise KeyError(f"project {project!r} not in any party")


def classify_ballots(approvals: ApprovalProfile) -> BallotClass:
    """Classify ballots as plurality, party-list, or unrestricted.

    Plurality means every ballot approves exactly one project; party-list
    means any two ballots are equal or disjoint.  Plurality is the more
    specific class and is reported as such, with its (singleton) partition.
    """
    ballots = [approvals.ballots[v] for v in approvals.voters]
    plurality = all(len(b) == 1 for b in ballots)
    party_list = True
    distinct = set(ballots)
    if not plurality:
        items = list(distinct)
        for i, a in enumerate(items):
            for b in items[i + 1 :]:
                if a != b and a & b:
                    party_list = False
                    break
            if not party_list:
                break
    if not party_list:
        return BallotClass(UNRESTRICTED)
    # Equal-or-disjoint ballots partition the approved projects.
    parties = tuple(sorted(distinct, key=lambda s: min(s)))
    return BallotClass(PLURALITY if plurality else PARTY_LIST, parties)


def payoff(game: PbGame, profile: StrategyProfile, funded: Iterable[str], project: str) -> Fraction:
    """Reported cost minus delivery cost if funded, else zero."""
    if project not in game.delivery:
        raise KeyError(f"unknown project {project!r}")
    if project in set(funded):
        return profile.cost(project) - game.delivery[project]
    return ZERO


def approval_proportional(game: PbGame) -> StrategyProfile:
    """Split the budget across projects in proportion to approval counts.

    The shares are exact rationals and sum to exactly the budget.
    """
    total = sum(game.approvals.approval_score(p) for p in game.projects)
    return StrategyProfile(
        {p: game.budget * game.approvals.approval_score(p) / total for p in game.projects}
    )


def default_order(game: PbGame | PbInstance) -> TieBreakOrder:
    """Approval score descending, then declaration order."""
    pos = {p: i for i, p in enumerate(game.projects)}
    ranked = sorted(
        game.projects, key=lambda p: (-game.approvals.approval_score(p), pos[p])
    )
    return TieBreakOrder(tuple(ranked))


def _delivery_time(game: PbGame, project: str) -> Fraction:
    # Delivery cost per approval; zero-delivery projects come first in A/D orders.
    return game.delivery[project] / game.approvals.approval_score(project)


def ad_order(game: PbGame) -> TieBreakOrder:
    """Canonical approvals-to-delivery order.

    Zero-delivery projects first; then ratio |A(p)|/d(p) descending; ties by
    approval count descending, then project identifier ascending.
    """
    ranked = sorted(
        game.projects,
        key=lambda p: (
            _delivery_time(game, p),
            -game.approvals.approval_score(p),
            p,
        ),
    )
    return TieBreakOrder(tuple(ranked))


def is_ad_order(game: PbGame, order: TieBreakOrder) -> bool:
    """True if delivery-per-approval is nondecreasing along the order."""
    order.validate_for(game.projects)
    times = [_delivery_time(game, p) for p in order.ranking]
    return all(a <= b for a, b in zip(times, times[1:]))


def validate_ad_order(game: PbGame, order: TieBreakOrder) -> None:
    if not is_ad_order(game, order):
        raise ValueError("order is not an approvals-to-delivery order for this game")


@dataclass(frozen=True)
class GalleryEntry:
    """A named reference game with its documented tie-break orders."""

    name: str
    game: PbGame
    orders: Mapping[str, TieBreakOrder]
    note: str

    @property
    def default(self) -> TieBreakOrder:
        return self.orders["default"]


def _zero_delivery(projects: Iterable[str]) -> dict[str, Fraction]:
    return {p: ZERO for p in projects}


def _plurality_ballots(assignment: Mapping[str, Iterable[str]]) -> dict[str, frozenset[str]]:
    # assignment maps project -> voters approving exactly that project.
    out: dict[str, frozenset[str]] = {}
    for p, voters in assignment.items():
        for v in voters:
            out[v] = frozenset({p})
    return out


def _g1() -> GalleryEntry:
    voters = tuple(f"v{i}" for i in range(1, 6))
    ballots = {"v1": {"p1"}, "v2": {"p1"}, "v3": {"p2"}, "v4": {"p2"}, "v5": {"p2"}}
    game = PbGame(
        projects=("p1", "p2"),
        approvals=ApprovalProfile(voters, {v: frozenset(b) for v, b in ballots.items()}),
        budget=Fraction(10),
        delivery=_zero_delivery(("p1", "p2")),
    )
    return GalleryEntry(
        "G1",
        game,
        {
            "default": TieBreakOrder(("p1", "p2")),
            "p2_first": TieBreakOrder(("p2", "p1")),
        },
        "Two projects, five voters, budget 10; free delivery.",
    )


def _g2() -> GalleryEntry:
    voters = tuple(f"v{i}" for i in range(1, 11))
    ballots = {v: {"p1"} for v in voters[:5]}
    ballots.update({v: {"p2"} for v in voters[5:]})
    game = PbGame(
        projects=("p1", "p2"),
        approvals=ApprovalProfile(voters, {v: frozenset(b) for v, b in ballots.items()}),
        budget=Fraction(10),
        delivery={"p1": ZERO, "p2": Fraction(6)},
    )
    return GalleryEntry(
        "G2",
        game,
        {
            "default": TieBreakOrder(("p1", "p2")),
            "no_ne": TieBreakOrder(("p2", "p1")),
        },
        "Plurality, 5 approvals each, budget 10, delivery (0, 6); the reversed "
        "order admits no ratio-rule equilibrium.",
    )


def _g3() -> GalleryEntry:
    # Two mirrored halves: two single-voter leaves plus one project approved
    # by all three voters of the half.
    projects = ("pa1", "pa2", "pa3", "pb1", "pb2", "pb3")
    voters = ("va1", "va2", "va3", "vb1", "vb2", "vb3")
    ballots = {
        "va1": {"pa1", "pa3"},
        "va2": {"pa2", "pa3"},
        "va3": {"pa3"},
        "vb1": {"pb1", "pb3"},
        "vb2": {"pb2", "pb3"},
        "vb3": {"pb3"},
    }
    game = PbGame(
        projects=projects,
        approvals=ApprovalProfile(voters, {v: frozenset(b) for v, b in ballots.items()}),
        budget=Fraction(1),
        delivery=_zero_delivery(projects),
    )
    return GalleryEntry(
        "G3",
        game,
        {"default": TieBreakOrder(projects)},
        "Six projects in two mirrored halves, budget 1, free delivery; the load "
        "balancer has no equilibrium here under any order.",
    )


def _g4() -> GalleryEntry:
    projects = ("p1", "p2", "p3")
    game = PbGame(
        projects=projects,
        approvals=ApprovalProfile(("v1",), {"v1": frozenset(projects)}),
        budget=Fraction(6),
        delivery={"p1": Fraction(3), "p2": ZERO, "p3": ZERO},
    )
    return GalleryEntry(
        "G4",
        game,
        {
            "default": TieBreakOrder(("p1", "p2", "p3")),
            "reversed": TieBreakOrder(("p3", "p2", "p1")),
        },
        "One voter approving three projects, budget 6, delivery (3, 0, 0); the "
        "default order kills every share-capped equilibrium, the reversed one "
        "admits (3, 3, 3).",
    )


def _g5() -> GalleryEntry:
    # 16 voters on a circle; each project is approved by an arc of 5,
    # consecutive arcs overlapping in exactly one voter.
    projects = ("p1", "p2", "p3", "p4")
    voters = tuple(f"v{i}" for i in range(1, 17))
    arcs = {
        "p1": [f"v{i}" for i in range(1, 6)],
        "p3": [f"v{i}" for i in range(5, 10)],
        "p4": [f"v{i}" for i in range(9, 14)],
        "p2": ["v13", "v14", "v15", "v16", "v1"],
    }
    ballots: dict[str, set[str]] = {v: set() for v in voters}
    for p, arc in arcs.items():
        for v in arc:
            ballots[v].add(p)
    game = PbGame(
        projects=projects,
        approvals=ApprovalProfile(voters, {v: frozenset(b) for v, b in ballots.items()}),
        budget=Fraction(16),
        delivery=_zero_delivery(projects),
    )
    return GalleryEntry(
        "G5",
        game,
        {"default": TieBreakOrder(projects)},
        "Four arcs of five voters on a 16-voter circle, budget 16, free delivery; "
        "no share-capped equilibrium under any order.",
    )


def _g6() -> GalleryEntry:
    projects = ("p1", "p2", "p3")
    ballots = {"v1": {"p1", "p3"}, "v2": {"p2", "p3"}, "v3": {"p3"}}
    game = PbGame(
        projects=projects,
        approvals=ApprovalProfile(("v1", "v2", "v3"), {v: frozenset(b) for v, b in ballots.items()}),
        budget=Fraction(36),
        delivery=_zero_delivery(projects),
    )
    return GalleryEntry(
        "G6",
        game,
        {"default": TieBreakOrder(projects)},
        "Three voters, budget 36, free delivery; admits two asymmetric "
        "share-capped equilibria despite symmetric leaves.",
    )


def gallery() -> dict[str, GalleryEntry]:
    """Named reference games used across the test suite and the CLI."""
    entries = (_g1(), _g2(), _g3(), _g4(), _g5(), _g6())
    return {e.name.lower(): e for e in entries}
