"""Reading Pabulib-style `.pb` files and writing result artifacts.

A `.pb` file has three `;`-separated sections, each with a header row::

    META            key;value rows (num_projects, num_votes, budget,
                    vote_type, rule, plus free keys)
    PROJECTS        project_id;cost;... one row per project
    VOTES           voter_id;vote;...   vote is a comma-separated id list

Only approval ballots are supported.  Money fields are parsed as exact
decimals; raw strings are kept so files round-trip byte-for-byte.  Result
artifacts (margins, dynamics traces, equilibrium reports) are emitted as
schema "v1" JSON with every money value carried both as a decimal string
and as exact num/den sidecars, plus a CSV mirror.
"""
from __future__ import annotations

import csv
import io
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    ApprovalProfile,
    Money,
    Outcome,
    PbGame,
    PbInstance,
    StrategyProfile,
    TieBreakOrder,
    ZERO,
    money,
)
from .dynamics import DynamicsTrace
from .equilibria import NeConstruction
from .response import Margin, NeReport
from .rules import RuleId

SCHEMA = "v1"


class PabulibError(ValueError):
    """A located parse failure: `kind` names the invariant, `line` is 1-based."""

    def __init__(self, kind: str, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.kind = kind
        self.line = line


@dataclass(frozen=True)
class ProjectRow:
    id: str
    cost: Fraction
    cost_text: str
    extras: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class VoteRow:
    voter: str
    approved: tuple[str, ...]
    extras: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class PabulibFile:
    meta: Mapping[str, str]
    projects: tuple[ProjectRow, ...]
    votes: tuple[VoteRow, ...]
    project_columns: tuple[str, ...]
    vote_columns: tuple[str, ...]

    @property
    def budget(self) -> Fraction:
        return money(self.meta["budget"])


_REQUIRED_META = ("num_projects", "num_votes", "budget", "vote_type", "rule")


def _parse_count(raw: str, line: int, what: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise PabulibError("bad-number", line, f"malformed {what} {raw!r}") from None


def _parse_money(raw: str, line: int, what: str) -> Fraction:
    try:
        value = money(raw)
    except (ValueError, TypeError):
        raise PabulibError("bad-number", line, f"malformed {what} {raw!r}") from None
    if value < 0:
        raise PabulibError("bad-number", line, f"negative {what} {raw!r}")
    return value


def parse_pabulib(text: str | bytes) -> PabulibFile:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    sections: dict[str, tuple[int, list[tuple[int, str]]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("﻿").rstrip("\r\n")
        if not line.strip():
            continue
        if line.strip() in ("META", "PROJECTS", "VOTES") and ";" not in line:
            name = line.strip()
            if name in sections:
                raise PabulibError("duplicate-section", lineno, f"second {name} section")
            sections[name] = (lineno, [])
            current = name
            continue
        if current is None:
            raise PabulibError("missing-section", lineno, "content before the META header")
        sections[current][1].append((lineno, line))
    last_line = text.count("\n") + 1
    for name in ("META", "PROJECTS", "VOTES"):
        if name not in sections:
            raise PabulibError("missing-section", last_line, f"missing {name} section")

    meta: dict[str, str] = {}
    meta_start, meta_rows = sections["META"]
    if not meta_rows or meta_rows[0][1].split(";")[0] != "key":
        raise PabulibError("bad-row", meta_start, "META must start with a key;value header")
    for lineno, row in meta_rows[1:]:
        parts = row.split(";")
        if len(parts) < 2:
            raise PabulibError("bad-row", lineno, f"META row needs key;value: {row!r}")
        key = parts[0].strip()
        if key in meta:
            raise PabulibError("duplicate-key", lineno, f"duplicate META key {key!r}")
        meta[key] = ";".join(parts[1:]).strip()
    for key in _REQUIRED_META:
        if key not in meta:
            raise PabulibError("missing-key", meta_start, f"META lacks required key {key!r}")
    if meta["vote_type"] != "approval":
        raise PabulibError(
            "vote-type",
            meta_start,
            f"only approval ballots are supported, got {meta['vote_type']!r}",
        )
    declared_projects = _parse_count(meta["num_projects"], meta_start, "num_projects")
    declared_votes = _parse_count(meta["num_votes"], meta_start, "num_votes")
    _parse_money(meta["budget"], meta_start, "budget")

    proj_start, proj_rows = sections["PROJECTS"]
    if not proj_rows:
        raise PabulibError("bad-row", proj_start, "PROJECTS section has no header")
    columns = tuple(c.strip() for c in proj_rows[0][1].split(";"))
    if "project_id" not in columns or "cost" not in columns:
        raise PabulibError(
            "bad-row", proj_rows[0][0], "PROJECTS header needs project_id and cost"
        )
    projects: list[ProjectRow] = []
    seen_projects: set[str] = set()
    for lineno, row in proj_rows[1:]:
        parts = row.split(";")
        if len(parts) != len(columns):
            raise PabulibError("bad-row", lineno, f"expected {len(columns)} fields: {row!r}")
        record = dict(zip(columns, (p.strip() for p in parts)))
        pid = record.pop("project_id")
        if not pid:
            raise PabulibError("bad-row", lineno, "empty project_id")
        if pid in seen_projects:
            raise PabulibError("duplicate-project", lineno, f"duplicate project id {pid!r}")
        seen_projects.add(pid)
        cost_text = record.pop("cost")
        cost = _parse_money(cost_text, lineno, "cost")
        projects.append(ProjectRow(pid, cost, cost_text, record))
    if len(projects) != declared_projects:
        raise PabulibError(
            "count-mismatch",
            proj_start,
            f"META declares {declared_projects} projects, found {len(projects)}",
        )

    vote_start, vote_rows = sections["VOTES"]
    if not vote_rows:
        raise PabulibError("bad-row", vote_start, "VOTES section has no header")
    vcolumns = tuple(c.strip() for c in vote_rows[0][1].split(";"))
    if "voter_id" not in vcolumns or "vote" not in vcolumns:
        raise PabulibError("bad-row", vote_rows[0][0], "VOTES header needs voter_id and vote")
    votes: list[VoteRow] = []
    seen_voters: set[str] = set()
    for lineno, row in vote_rows[1:]:
        parts = row.split(";")
        if len(parts) != len(vcolumns):
            raise PabulibError("bad-row", lineno, f"expected {len(vcolumns)} fields: {row!r}")
        record = dict(zip(vcolumns, (p.strip() for p in parts)))
        voter = record.pop("voter_id")
        if not voter:
            raise PabulibError("bad-row", lineno, "empty voter_id")
        if voter in seen_voters:
            raise PabulibError("duplicate-voter", lineno, f"duplicate voter id {voter!r}")
        seen_voters.add(voter)
        ballot = tuple(x.strip() for x in record.pop("vote").split(",") if x.strip())
        if not ballot:
            raise PabulibError("empty-vote", lineno, f"voter {voter!r} approves nothing")
        for pid in ballot:
            if pid not in seen_projects:
                raise PabulibError(
                    "unknown-project", lineno, f"vote references unknown project {pid!r}"
                )
        if len(set(ballot)) != len(ballot):
            raise PabulibError("bad-row", lineno, f"repeated project in vote: {row!r}")
        votes.append(VoteRow(voter, ballot, record))
    if len(votes) != declared_votes:
        raise PabulibError(
            "count-mismatch",
            vote_start,
            f"META declares {declared_votes} votes, found {len(votes)}",
        )
    return PabulibFile(meta, tuple(projects), tuple(votes), columns, vcolumns)


def write_pabulib(file: PabulibFile) -> str:
    """Regenerate `.pb` text; raw money strings are reused, so a parsed file
    writes back byte-exactly."""
    out = ["META", "key;value"]
    for key, value in file.meta.items():
        out.append(f"{key};{value}")
    out.append("PROJECTS")
    out.append(";".join(file.project_columns))
    for row in file.projects:
        record = {"project_id": row.id, "cost": row.cost_text, **row.extras}
        out.append(";".join(record[c] for c in file.project_columns))
    out.append("VOTES")
    out.append(";".join(file.vote_columns))
    for vote in file.votes:
        record = {"voter_id": vote.voter, "vote": ",".join(vote.approved), **vote.extras}
        out.append(";".join(record[c] for c in file.vote_columns))
    return "\n".join(out) + "\n"


def to_instance(file: PabulibFile, order: TieBreakOrder | None = None) -> PbInstance:
    """Build the election; the default tie-break order is approval count
    descending, then file order."""
    approvals = ApprovalProfile(
        tuple(v.voter for v in file.votes),
        {v.voter: frozenset(v.approved) for v in file.votes},
    )
    projects = tuple(p.id for p in file.projects)
    if order is None:
        pos = {p: i for i, p in enumerate(projects)}
        order = TieBreakOrder(
            tuple(sorted(projects, key=lambda p: (-approvals.approval_score(p), pos[p])))
        )
    return PbInstance(
        projects=projects,
        approvals=approvals,
        budget=file.budget,
        costs={p.id: p.cost for p in file.projects},
        order=order,
    )


@dataclass(frozen=True)
class DeliveryPolicy:
    """How to invent delivery costs for a parsed file."""

    kind: str  # zero | fraction | explicit
    phi: Fraction | None = None
    table: Mapping[str, Fraction] | None = None

    @classmethod
    def zero(cls) -> "DeliveryPolicy":
        return cls("zero")

    @classmethod
    def fraction(cls, phi: Money) -> "DeliveryPolicy":
        if not 0 <= phi <= 1:
            raise ValueError("delivery fraction must lie in [0, 1]")
        return cls("fraction", phi=phi)

    @classmethod
    def explicit(cls, table: Mapping[str, Money]) -> "DeliveryPolicy":
        return cls("explicit", table=dict(table))


def to_game(file: PabulibFile, policy: DeliveryPolicy) -> PbGame:
    instance = to_instance(file)
    if policy.kind == "zero":
        delivery = {p: ZERO for p in instance.projects}
    elif policy.kind == "fraction":
        assert policy.phi is not None
        delivery = {p: instance.cost(p) * policy.phi for p in instance.projects}
    elif policy.kind == "explicit":
        assert policy.table is not None
        missing = set(instance.projects) - set(policy.table)
        if missing:
            raise ValueError(f"delivery table lacks project(s) {sorted(missing)}")
        delivery = {p: policy.table[p] for p in instance.projects}
    else:
        raise ValueError(f"unknown delivery policy {policy.kind!r}")
    for p, d in delivery.items():
        if d > instance.budget:
            warnings.warn(
                f"delivery cost of {p!r} clamped to the budget", stacklevel=2
            )
            delivery[p] = instance.budget
    return PbGame(
        projects=instance.projects,
        approvals=instance.approvals,
        budget=instance.budget,
        delivery=delivery,
    )


# --- result artifacts -------------------------------------------------------

_TWELVE = 10**12


def format_money(value: Fraction, max_frac_digits: int = 12) -> tuple[str, bool]:
    """Render to decimal with at most `max_frac_digits` places; the flag says
    whether the rendering is exact."""
    sign = "-" if value < 0 else ""
    scale = 10**max_frac_digits
    scaled, rem = divmod(abs(value.numerator) * scale, value.denominator)
    exact = rem == 0
    if not exact and 2 * rem >= value.denominator:
        scaled += 1
    whole, frac = divmod(scaled, scale)
    if frac == 0:
        return f"{sign}{whole}", exact
    digits = str(frac).rjust(max_frac_digits, "0").rstrip("0")
    return f"{sign}{whole}.{digits}", exact


def money_json(value: Fraction) -> dict:
    decimal, _ = format_money(value)
    return {
        "decimal": decimal,
        "num": str(value.numerator),
        "den": str(value.denominator),
    }


def money_from_json(obj) -> Fraction:
    if isinstance(obj, str):
        return money(obj)
    if isinstance(obj, dict) and "num" in obj and "den" in obj:
        return Fraction(int(obj["num"]), int(obj["den"]))
    raise ValueError(f"not a money value: {obj!r}")


def _ranked_projects(game: PbGame) -> list[str]:
    pos = {p: i for i, p in enumerate(game.projects)}
    return sorted(game.projects, key=lambda p: (-game.approvals.approval_score(p), pos[p]))


def write_margins_json(
    game: PbGame,
    rule: RuleId,
    profile: StrategyProfile,
    results: Sequence[Margin],
    tolerance: Money,
) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "margins",
        "rule": rule.value,
        "budget": money_json(game.budget),
        "tolerance": money_json(tolerance),
        "projects": [
            {
                "project": m.project,
                "approvals": game.approvals.approval_score(m.project),
                "cost": money_json(profile.cost(m.project)),
                "status": m.kind,
                "margin": money_json(m.value),
                "best_response_low": money_json(m.response.lower),
                "best_response_high": money_json(m.response.upper),
                "monotone_certified": m.response.monotone_certified,
                "never_funded": m.response.never_funded,
            }
            for m in results
        ],
    }


def write_dynamics_json(game: PbGame, trace: DynamicsTrace) -> dict:
    ranked = _ranked_projects(game)

    def costs_obj(profile: StrategyProfile) -> dict:
        return {p: money_json(profile.cost(p)) for p in ranked}

    return {
        "schema": SCHEMA,
        "kind": "dynamics",
        "rule": trace.rule.value,
        "generator": {"name": trace.generator, "seed": trace.config.seed},
        "config": {
            "iterations": trace.config.iterations,
            "step_fraction": money_json(trace.config.step_fraction),
            "record_every": trace.config.record_every,
        },
        "budget": money_json(game.budget),
        "projects": ranked,
        "approvals": {p: game.approvals.approval_score(p) for p in ranked},
        "initial": costs_obj(trace.initial),
        "initial_funded": sorted(trace.initial_funded),
        "snapshots": [
            {
                "iteration": it,
                "costs": costs_obj(profile),
                "funded": sorted(funded),
            }
            for it, profile, funded in trace.snapshots
        ],
        "final": costs_obj(trace.final),
        "final_funded": sorted(trace.final_funded),
        "moves": {
            "accepted_increases": dict(trace.accepted_increases),
            "rejected_increases": dict(trace.rejected_increases),
            "decreases": dict(trace.decreases),
            "skipped_zero_cost": dict(trace.skipped_zero_cost),
        },
    }


def write_ne_json(
    game: PbGame,
    construction: NeConstruction,
    report: NeReport | None = None,
    tolerance: Money | None = None,
) -> dict:
    ranked = _ranked_projects(game)
    out = {
        "schema": SCHEMA,
        "kind": "equilibrium",
        "rule": construction.rule.value,
        "guarantee": construction.guarantee,
        "order": list(construction.order.ranking),
        "budget": money_json(game.budget),
        "projects": ranked,
        "profile": {p: money_json(construction.profile.cost(p)) for p in ranked},
        "predicted_funded": list(construction.predicted_funded),
        "verification": None,
    }
    if report is not None:
        out["verification"] = {
            "tolerance": money_json(tolerance if tolerance is not None else ZERO),
            "verified": report.verified,
            "violations": [
                {
                    "project": v.project,
                    "deviate_to": money_json(v.deviate_to),
                    "gain": money_json(v.gain),
                }
                for v in report.violations
            ],
            "warnings": list(report.warnings),
        }
    return out


def outcome_json(rule: RuleId, instance: PbInstance, outcome: Outcome) -> dict:
    spent = sum((instance.cost(p) for p in outcome.funded), ZERO)
    return {
        "schema": SCHEMA,
        "kind": "outcome",
        "rule": rule.value,
        "budget": money_json(instance.budget),
        "funded": list(outcome.funded),
        "spent": money_json(spent),
        "removed": list(outcome.removed),
        "alphas": [None if a is None else money_json(a) for a in outcome.alphas],
        "final_balances": {v: money_json(b) for v, b in outcome.final_balances.items()},
    }


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _cell(obj: dict) -> tuple[str, bool]:
    value = Fraction(int(obj["num"]), int(obj["den"]))
    return format_money(value)


def write_margins_csv(doc: Mapping) -> str:
    rows = []
    for entry in doc["projects"]:
        cost, e1 = _cell(entry["cost"])
        margin, e2 = _cell(entry["margin"])
        lo, e3 = _cell(entry["best_response_low"])
        hi, e4 = _cell(entry["best_response_high"])
        rows.append(
            [
                entry["project"],
                entry["approvals"],
                cost,
                entry["status"],
                margin,
                lo,
                hi,
                entry["monotone_certified"],
                all((e1, e2, e3, e4)),
            ]
        )
    return _csv_text(
        [
            "project",
            "approvals",
            "cost",
            "status",
            "margin",
            "best_response_low",
            "best_response_high",
            "monotone_certified",
            "exact",
        ],
        rows,
    )


def write_dynamics_csv(doc: Mapping) -> str:
    rows = []
    for p in doc["projects"]:
        initial, e1 = _cell(doc["initial"][p])
        final, e2 = _cell(doc["final"][p])
        rows.append(
            [
                p,
                doc["approvals"][p],
                initial,
                final,
                p in doc["initial_funded"],
                p in doc["final_funded"],
                e1 and e2,
            ]
        )
    return _csv_text(
        ["project", "approvals", "initial", "final", "initially_funded", "finally_funded", "exact"],
        rows,
    )


def write_ne_csv(doc: Mapping) -> str:
    rows = []
    for p in doc["projects"]:
        cost, exact = _cell(doc["profile"][p])
        rows.append([p, cost, p in doc["predicted_funded"], exact])
    return _csv_text(["project", "cost", "predicted_funded", "exact"], rows)


def synthetic_file(
    num_projects: int,
    num_votes: int,
    budget: str,
    seed: int,
    max_approvals: int = 4,
) -> PabulibFile:
    """A random but well-formed approval file, for demos and robustness tests."""
    rng = random.Random(seed)
    ids = [f"p{i}" for i in range(1, num_projects + 1)]
    budget_frac = money(budget)
    projects = tuple(
        ProjectRow(
            pid,
            Fraction((i + 1) * int(budget_frac) // (2 * num_projects) or 1),
            str((i + 1) * int(budget_frac) // (2 * num_projects) or 1),
            {},
        )
        for i, pid in enumerate(ids)
    )
    votes = []
    for i in range(1, num_votes + 1):
        size = rng.randint(1, max_approvals)
        ballot = tuple(sorted(rng.sample(ids, min(size, len(ids)))))
        votes.append(VoteRow(f"v{i}", ballot, {}))
    # Every project needs at least one approver.
    approved = {p for v in votes for p in v.approved}
    missing = [p for p in ids if p not in approved]
    for i, p in enumerate(missing):
        v = votes[i % len(votes)]
        votes[i % len(votes)] = VoteRow(v.voter, tuple(sorted(set(v.approved) | {p})), v.extras)
    meta = {
        "description": "synthetic approval instance",
        "num_projects": str(num_projects),
        "num_votes": str(num_votes),
        "budget": budget,
        "vote_type": "approval",
        "rule": "greedy",
    }
    return PabulibFile(meta, projects, tuple(votes), ("project_id", "cost"), ("voter_id", "vote"))
