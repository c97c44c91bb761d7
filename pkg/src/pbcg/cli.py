"""Command-line front end.

Subcommands: evaluate, margins, equilibrium, dynamics, verify.  Inputs come
either from a Pabulib-style `.pb` file or from the built-in gallery of small
games.  Results print as text by default; `--json` switches to the schema
"v1" JSON artifacts and `--out` writes them to a file instead of stdout.

Exit codes: 0 on success, 1 when the request is well-formed but the answer
is negative (no known equilibrium construction, verification failure), 2 on
bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import (
    BallotClass,
    PbGame,
    StrategyProfile,
    TieBreakOrder,
    ZERO,
    ad_order,
    approval_proportional,
    classify_ballots,
    default_order,
    gallery,
    money,
)
from .dynamics import DynamicsConfig, run_dynamics
from .equilibria import (
    NeConstruction,
    NotApplicable,
    ne_avcost_ad,
    ne_avcost_ap,
    ne_basic_av,
    ne_mes_apr_partylist,
    ne_mes_apr_plurality,
    ne_mes_cost,
    ne_phragmen_partylist_zero,
)
from .pabulib import (
    DeliveryPolicy,
    PabulibError,
    money_from_json,
    outcome_json,
    parse_pabulib,
    to_game,
    to_instance,
    write_dynamics_csv,
    write_dynamics_json,
    write_margins_csv,
    write_margins_json,
    write_ne_csv,
    write_ne_json,
)
from .response import margins as compute_margins
from .response import verify_ne
from .rules import RuleId, run_rule

_RULE_NAMES = [r.value for r in RuleId]


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help="path to a .pb approval file")
    src.add_argument("--gallery", help="name of a built-in game (g1..g6)")
    parser.add_argument(
        "--delivery",
        default="zero",
        help="delivery costs: zero, frac:PHI, or file:PATH (JSON map)",
    )
    parser.add_argument(
        "--order",
        default="default",
        help="tie-break order: default, ad, or a comma-separated project list",
    )


def _parse_delivery(spec: str) -> DeliveryPolicy:
    if spec == "zero":
        return DeliveryPolicy.zero()
    if spec.startswith("frac:"):
        return DeliveryPolicy.fraction(money(spec[len("frac:"):]))
    if spec.startswith("file:"):
        with open(spec[len("file:"):], "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return DeliveryPolicy.explicit({p: money_from_json(v) for p, v in raw.items()})
    raise ValueError(f"bad delivery spec {spec!r}")


def _parse_costs(spec: str, game: PbGame) -> StrategyProfile:
    costs = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ValueError(f"bad cost entry {part!r}, expected PROJECT=AMOUNT")
        pid, raw = part.split("=", 1)
        pid = pid.strip()
        if pid not in game.projects:
            raise ValueError(f"unknown project {pid!r} in --costs")
        costs[pid] = money(raw.strip())
    missing = set(game.projects) - set(costs)
    if missing:
        raise ValueError(f"--costs misses project(s) {sorted(missing)}")
    return StrategyProfile(costs)


class _Loaded:
    def __init__(self, game: PbGame, base_costs: StrategyProfile, order: TieBreakOrder):
        self.game = game
        self.base_costs = base_costs
        self.order = order


def _load(args) -> _Loaded:
    policy = _parse_delivery(args.delivery)
    if args.gallery is not None:
        entries = gallery()
        name = args.gallery.lower()
        if name not in entries:
            raise ValueError(f"unknown gallery game {args.gallery!r}, have {sorted(entries)}")
        entry = entries[name]
        game = entry.game
        if policy.kind != "zero":
            game = to_game_from_policy(game, policy)
        base = approval_proportional(game)
        order = _resolve_order(args.order, game, entry.default)
        return _Loaded(game, base, order)
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    file = parse_pabulib(text)
    game = to_game(file, policy)
    instance = to_instance(file)
    base = StrategyProfile({p: instance.cost(p) for p in game.projects})
    order = _resolve_order(args.order, game, instance.order)
    return _Loaded(game, base, order)


def to_game_from_policy(game: PbGame, policy: DeliveryPolicy) -> PbGame:
    if policy.kind == "fraction":
        raise ValueError("frac delivery needs declared costs; use an explicit table")
    if policy.kind == "explicit":
        assert policy.table is not None
        missing = set(game.projects) - set(policy.table)
        if missing:
            raise ValueError(f"delivery table lacks project(s) {sorted(missing)}")
        delivery = {p: min(policy.table[p], game.budget) for p in game.projects}
        return PbGame(game.projects, game.approvals, game.budget, delivery)
    return game


def _resolve_order(spec: str, game: PbGame, fallback: TieBreakOrder) -> TieBreakOrder:
    if spec == "default":
        return fallback
    if spec == "ad":
        return ad_order(game)
    ranking = tuple(p.strip() for p in spec.split(",") if p.strip())
    order = TieBreakOrder(ranking)
    order.validate_for(game.projects)
    return order


def _emit(args, doc: dict, text: str, csv_text: str | None = None) -> None:
    if getattr(args, "csv", False):
        payload = csv_text if csv_text is not None else ""
    elif args.json or args.out:
        payload = json.dumps(doc, indent=2) + "\n"
    else:
        payload = text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _fmt(value: Fraction) -> str:
    from .pabulib import format_money

    rendered, exact = format_money(value)
    return rendered if exact else rendered + "~"


def _cmd_evaluate(args) -> int:
    loaded = _load(args)
    profile = _parse_costs(args.costs, loaded.game) if args.costs else loaded.base_costs
    rule = RuleId.from_name(args.rule)
    instance = loaded.game.to_instance(profile, loaded.order)
    outcome = run_rule(instance, rule)
    doc = outcome_json(rule, instance, outcome)
    lines = [
        f"rule: {rule.value}",
        f"funded ({len(outcome.funded)}): {', '.join(outcome.funded) or '(none)'}",
        f"spent: {_fmt(sum((instance.cost(p) for p in outcome.funded), ZERO))}"
        f" of {_fmt(instance.budget)}",
    ]
    if outcome.removed:
        lines.append(f"removed: {', '.join(outcome.removed)}")
    if outcome.alphas:
        shown = ", ".join(
            f"{p}={'completion' if a is None else _fmt(a)}"
            for p, a in zip(outcome.funded, outcome.alphas)
        )
        lines.append(f"affordability: {shown}")
    leftover = sum(outcome.final_balances.values(), ZERO)
    lines.append(f"unspent voter budget: {_fmt(leftover)}")
    _emit(args, doc, "\n".join(lines) + "\n")
    return 0


def _tolerance(args, game: PbGame) -> Fraction:
    if args.tolerance is not None:
        return money(args.tolerance)
    return game.budget / 10**6


def _cmd_margins(args) -> int:
    loaded = _load(args)
    profile = _parse_costs(args.costs, loaded.game) if args.costs else loaded.base_costs
    rule = RuleId.from_name(args.rule)
    tol = _tolerance(args, loaded.game)
    workers = int(os.environ.get("PBCG_THREADS", "1"))
    results = compute_margins(
        loaded.game, rule, profile, tol, order=loaded.order, workers=workers
    )
    doc = write_margins_json(loaded.game, rule, profile, results, tol)
    lines = [f"rule: {rule.value}  tolerance: {_fmt(tol)}"]
    for m in results:
        lines.append(
            f"{m.project}: {m.kind:7s} cost={_fmt(profile.cost(m.project))}"
            f" margin={_fmt(m.value)}"
            + ("" if m.response.monotone_certified else " (uncertified)")
        )
    _emit(args, doc, "\n".join(lines) + "\n", write_margins_csv(doc))
    return 0


def _equilibrium_construction(args, loaded: _Loaded, rule: RuleId) -> NeConstruction:
    game = loaded.game
    base = RuleId(rule.value.removesuffix("-ph"))
    explicit = args.order not in ("default", "ad")
    if base is RuleId.BASIC_AV:
        return ne_basic_av(game, loaded.order)
    if base is RuleId.AV_OVER_COST:
        if args.order == "ad" or explicit:
            return ne_avcost_ad(game, loaded.order if explicit else ad_order(game))
        try:
            return ne_avcost_ap(game)
        except NotApplicable:
            return ne_avcost_ad(game, ad_order(game))
    ballots = classify_ballots(game.approvals)
    zero_delivery = all(game.delivery[p] == 0 for p in game.projects)
    if base is RuleId.PHRAGMEN:
        if ballots.is_party_list and zero_delivery:
            return ne_phragmen_partylist_zero(game)
        raise NotApplicable(
            "no equilibrium construction is known for this rule beyond party-list "
            "ballots with zero delivery costs; the built-in game g3 shows that "
            "equilibria can fail to exist here"
        )
    if base is RuleId.MES_COST:
        return ne_mes_cost(game, loaded.order)
    if base is RuleId.MES_APR:
        if ballots.is_plurality:
            return ne_mes_apr_plurality(game)
        if ballots.is_party_list:
            if zero_delivery:
                return ne_mes_apr_partylist(game, loaded.order)
            return ne_mes_apr_partylist(
                game, loaded.order if explicit else ad_order(game)
            )
        raise NotApplicable(
            "no equilibrium construction is known for this rule on unrestricted "
            "ballots; the built-in game g5 has no pure equilibrium, while g6 has "
            "two that a grid search can find"
        )
    raise NotApplicable(f"no construction for rule {rule.value}")


def _cmd_equilibrium(args) -> int:
    loaded = _load(args)
    rule = RuleId.from_name(args.rule)
    try:
        construction = _equilibrium_construction(args, loaded, rule)
    except NotApplicable as exc:
        print(f"no construction: {exc}", file=sys.stderr)
        return 1
    if rule is not construction.rule:
        # Completed variants reuse the base construction, checked under the
        # completed rule.
        construction = NeConstruction(
            profile=construction.profile,
            order=construction.order,
            rule=rule,
            guarantee=construction.guarantee,
            predicted_funded=construction.predicted_funded,
        )
    report = None
    tol = _tolerance(args, loaded.game)
    if args.verify:
        report = verify_ne(
            loaded.game, rule, construction.profile, construction.order, tol
        )
    doc = write_ne_json(loaded.game, construction, report, tol if args.verify else None)
    lines = [
        f"rule: {rule.value}  guarantee: {construction.guarantee}",
        f"order: {' > '.join(construction.order.ranking)}",
    ]
    for p in construction.order.ranking:
        mark = "*" if p in construction.predicted_funded else " "
        lines.append(f" {mark} {p} = {_fmt(construction.profile.cost(p))}")
    lines.append(f"predicted funded: {', '.join(construction.predicted_funded) or '(none)'}")
    if report is not None:
        lines.append(f"verified: {report.verified}")
        for v in report.violations:
            lines.append(
                f"  violation: {v.project} -> {_fmt(v.deviate_to)} gains {_fmt(v.gain)}"
            )
        for w in report.warnings:
            lines.append(f"  warning: {w}")
    _emit(args, doc, "\n".join(lines) + "\n", write_ne_csv(doc))
    if report is not None and not report.verified:
        return 1
    return 0


def _cmd_dynamics(args) -> int:
    loaded = _load(args)
    rule = RuleId.from_name(args.rule)
    start = _parse_costs(args.start, loaded.game) if args.start else loaded.base_costs
    config = DynamicsConfig(
        seed=args.seed,
        iterations=args.iterations,
        step_fraction=money(args.step_fraction),
        record_every=args.record_every,
    )
    trace = run_dynamics(loaded.game, rule, start, config, order=loaded.order)
    doc = write_dynamics_json(loaded.game, trace)
    lines = [
        f"rule: {rule.value}  seed: {config.seed}  iterations: {config.iterations}",
        f"initially funded: {', '.join(sorted(trace.initial_funded)) or '(none)'}",
        f"finally funded: {', '.join(sorted(trace.final_funded)) or '(none)'}",
    ]
    for p in doc["projects"]:
        lines.append(
            f"  {p}: {_fmt(start.cost(p))} -> {_fmt(trace.final.cost(p))}"
        )
    lines.append(
        "moves: "
        f"+{sum(trace.accepted_increases.values())} accepted, "
        f"{sum(trace.rejected_increases.values())} reverted, "
        f"-{sum(trace.decreases.values())} decreases, "
        f"{sum(trace.skipped_zero_cost.values())} skipped"
    )
    _emit(args, doc, "\n".join(lines) + "\n", write_dynamics_csv(doc))
    return 0


def _load_profile_file(path: str, game: PbGame) -> StrategyProfile:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("profile file must hold a JSON object of project costs")
    costs = {}
    for pid, value in raw.items():
        if pid not in game.projects:
            raise ValueError(f"unknown project {pid!r} in profile file")
        costs[pid] = money_from_json(value) if not isinstance(value, int) else money(value)
    missing = set(game.projects) - set(costs)
    if missing:
        raise ValueError(f"profile file misses project(s) {sorted(missing)}")
    return StrategyProfile(costs)


def _cmd_verify(args) -> int:
    loaded = _load(args)
    rule = RuleId.from_name(args.rule)
    if args.costs:
        profile = _parse_costs(args.costs, loaded.game)
    else:
        profile = _load_profile_file(args.profile, loaded.game)
    tol = _tolerance(args, loaded.game)
    report = verify_ne(loaded.game, rule, profile, loaded.order, tol)
    doc = {
        "schema": "v1",
        "kind": "verification",
        "rule": rule.value,
        "tolerance": {"decimal": _fmt(tol).rstrip("~")},
        "verified": report.verified,
        "violations": [
            {"project": v.project, "deviate_to": _fmt(v.deviate_to), "gain": _fmt(v.gain)}
            for v in report.violations
        ],
        "warnings": list(report.warnings),
    }
    lines = [f"rule: {rule.value}  tolerance: {_fmt(tol)}", f"verified: {report.verified}"]
    for v in report.violations:
        lines.append(f"  violation: {v.project} -> {_fmt(v.deviate_to)} gains {_fmt(v.gain)}")
    for w in report.warnings:
        lines.append(f"  warning: {w}")
    _emit(args, doc, "\n".join(lines) + "\n")
    return 0 if report.verified else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbcg",
        description="participatory budgeting cost games: rules, margins, "
        "equilibria, and best-response dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, rule=True) -> None:
        _add_input_args(p)
        if rule:
            p.add_argument("--rule", required=True, choices=_RULE_NAMES)
        p.add_argument("--json", action="store_true", help="print JSON instead of text")
        p.add_argument("--out", help="write the artifact to this path")

    p = sub.add_parser("evaluate", help="run one rule on one cost profile")
    common(p)
    p.add_argument("--costs", help="override costs, e.g. p1=4,p2=6")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("margins", help="winning/losing margins for every project")
    common(p)
    p.add_argument("--costs", help="cost profile to analyse, e.g. p1=4,p2=6")
    p.add_argument("--tolerance", help="bisection tolerance (money, default budget/1e6)")
    p.add_argument("--csv", action="store_true", help="emit the CSV mirror")
    p.set_defaults(func=_cmd_margins)

    p = sub.add_parser("equilibrium", help="construct a pure equilibrium when known")
    common(p)
    p.add_argument("--verify", action="store_true", help="check the construction")
    p.add_argument("--tolerance", help="verification tolerance (money)")
    p.add_argument("--csv", action="store_true", help="emit the CSV mirror")
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("dynamics", help="run best-response cost dynamics")
    common(p)
    p.add_argument("--start", help="starting costs, e.g. p1=4,p2=6")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--step-fraction", default="1/10")
    p.add_argument("--record-every", type=int, default=100)
    p.add_argument("--csv", action="store_true", help="emit the CSV mirror")
    p.set_defaults(func=_cmd_dynamics)

    p = sub.add_parser("verify", help="check whether a profile is an equilibrium")
    common(p)
    prof = p.add_mutually_exclusive_group(required=True)
    prof.add_argument("--costs", help="profile to check, e.g. p1=4,p2=6")
    prof.add_argument("--profile", help="path to a JSON object mapping project to cost")
    p.add_argument("--tolerance", help="slack for deviation gains (money, 0 = probes only)")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PabulibError as exc:
        print(f"parse error [{exc.kind}]: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
