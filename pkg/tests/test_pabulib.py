"""Election-file parsing, delivery policies, and result artifacts."""
from __future__ import annotations

import json
import random
from fractions import Fraction as F

import pytest

from pbcg.core import StrategyProfile, gallery
from pbcg.dynamics import DynamicsConfig, run_dynamics
from pbcg.equilibria import ne_avcost_ap
from pbcg.pabulib import (
    DeliveryPolicy,
    PabulibError,
    format_money,
    money_from_json,
    money_json,
    outcome_json,
    parse_pabulib,
    synthetic_file,
    to_game,
    to_instance,
    write_dynamics_csv,
    write_dynamics_json,
    write_margins_csv,
    write_margins_json,
    write_ne_csv,
    write_ne_json,
    write_pabulib,
)
from pbcg.response import margins, verify_ne
from pbcg.rules import RuleId, run_rule

FIXTURE = """META
key;value
description;two projects, five voters
num_projects;2
num_votes;5
budget;10
vote_type;approval
rule;greedy
PROJECTS
project_id;cost
p1;4
p2;6
VOTES
voter_id;vote
v1;p1
v2;p1
v3;p2
v4;p2
v5;p2
"""


def _mutate(lines: list[str], drop: int | None = None, replace: tuple[int, str] | None = None,
            insert: tuple[int, str] | None = None) -> str:
    out = list(lines)
    if drop is not None:
        del out[drop]
    if replace is not None:
        out[replace[0]] = replace[1]
    if insert is not None:
        out.insert(insert[0], insert[1])
    return "\n".join(out) + "\n"


class TestParse:
    def test_fixture_matches_two_project_gallery_game(self):
        file = parse_pabulib(FIXTURE)
        instance = to_instance(file)
        g1 = gallery()["g1"].game
        assert instance.projects == g1.projects
        assert instance.budget == g1.budget
        assert instance.costs == {"p1": F(4), "p2": F(6)}
        assert instance.approvals.voters == g1.approvals.voters
        assert instance.approvals.ballots == g1.approvals.ballots
        # Default tie-break: approval count descending, then file order.
        assert instance.order.ranking == ("p2", "p1")

    def test_bytes_input_accepted(self):
        file = parse_pabulib(FIXTURE.encode("utf-8"))
        assert file.budget == F(10)

    def test_unknown_columns_and_meta_preserved(self):
        lines = FIXTURE.splitlines()
        text = _mutate(
            lines,
            replace=(9, "project_id;cost;category"),
        ).replace("p1;4\n", "p1;4;roads\n").replace("p2;6\n", "p2;6;parks\n")
        file = parse_pabulib(text)
        assert file.projects[0].extras == {"category": "roads"}
        assert file.meta["description"] == "two projects, five voters"
        assert file.meta["rule"] == "greedy"

    def test_decimal_costs_parse_exactly(self):
        text = FIXTURE.replace("p1;4", "p1;4.50").replace("budget;10", "budget;10.50")
        file = parse_pabulib(text)
        assert file.projects[0].cost == F(9, 2)
        assert file.projects[0].cost_text == "4.50"
        assert file.budget == F(21, 2)

    def test_explicit_order_override(self):
        file = parse_pabulib(FIXTURE)
        from pbcg.core import TieBreakOrder

        instance = to_instance(file, TieBreakOrder(("p1", "p2")))
        assert instance.order.ranking == ("p1", "p2")


class TestRoundTrip:
    def test_write_reproduces_input_byte_for_byte(self):
        file = parse_pabulib(FIXTURE)
        assert write_pabulib(file) == FIXTURE

    def test_raw_money_strings_survive(self):
        text = FIXTURE.replace("p1;4", "p1;4.50")
        assert write_pabulib(parse_pabulib(text)) == text

    def test_reparse_is_identity(self):
        file = parse_pabulib(FIXTURE)
        again = parse_pabulib(write_pabulib(file))
        assert again == file


class TestLocatedErrors:
    def _expect(self, text: str, kind: str, line: int | None = None):
        with pytest.raises(PabulibError) as err:
            parse_pabulib(text)
        assert err.value.kind == kind
        if line is not None:
            assert err.value.line == line
        assert err.value.line >= 1

    def test_non_approval_vote_type(self):
        self._expect(FIXTURE.replace("vote_type;approval", "vote_type;ordinal"), "vote-type", 1)

    def test_malformed_cost(self):
        self._expect(FIXTURE.replace("p1;4", "p1;4x"), "bad-number", 11)

    def test_negative_cost(self):
        self._expect(FIXTURE.replace("p1;4", "p1;-4"), "bad-number", 11)

    def test_malformed_declared_count(self):
        self._expect(FIXTURE.replace("num_votes;5", "num_votes;five"), "bad-number")

    def test_duplicate_project_id(self):
        self._expect(FIXTURE.replace("p2;6", "p1;6"), "duplicate-project", 12)

    def test_duplicate_voter_id(self):
        self._expect(FIXTURE.replace("v2;p1", "v1;p1"), "duplicate-voter", 16)

    def test_vote_references_unknown_project(self):
        self._expect(FIXTURE.replace("v1;p1", "v1;p9"), "unknown-project", 15)

    def test_vote_count_mismatch_on_empty_votes(self):
        lines = FIXTURE.splitlines()
        text = "\n".join(lines[:14]) + "\n"  # keep the VOTES header, drop the rows
        self._expect(text, "count-mismatch", 13)

    def test_project_count_mismatch(self):
        self._expect(FIXTURE.replace("num_projects;2", "num_projects;3"), "count-mismatch", 9)

    def test_missing_votes_section(self):
        lines = FIXTURE.splitlines()
        text = "\n".join(lines[:12]) + "\n"
        self._expect(text, "missing-section", text.count("\n") + 1)

    def test_content_before_meta(self):
        self._expect("junk\n" + FIXTURE, "missing-section", 1)

    def test_duplicate_section(self):
        self._expect(FIXTURE + "VOTES\n", "duplicate-section")

    def test_duplicate_meta_key(self):
        lines = FIXTURE.splitlines()
        self._expect(_mutate(lines, insert=(6, "budget;11")), "duplicate-key", 7)

    def test_missing_required_meta_key(self):
        lines = FIXTURE.splitlines()
        self._expect(_mutate(lines, drop=7), "missing-key", 1)  # drop rule;greedy

    def test_repeated_project_inside_vote(self):
        self._expect(FIXTURE.replace("v1;p1", "v1;p1,p1"), "bad-row", 15)

    def test_empty_vote(self):
        self._expect(FIXTURE.replace("v1;p1", "v1;"), "empty-vote", 15)

    def test_field_count_mismatch(self):
        self._expect(FIXTURE.replace("p1;4", "p1;4;extra"), "bad-row", 11)

    def test_error_message_carries_line(self):
        with pytest.raises(PabulibError) as err:
            parse_pabulib(FIXTURE.replace("p1;4", "p1;4x"))
        assert "line 11" in str(err.value)


def _mutation_menu(rng: random.Random, lines: list[str]) -> str:
    """One random invariant-breaking edit of the fixture."""
    choice = rng.randrange(8)
    if choice == 0:  # delete a section header
        header = rng.choice(["META", "PROJECTS", "VOTES"])
        return _mutate(lines, drop=lines.index(header))
    if choice == 1:  # delete a required META row
        key = rng.choice(["num_projects", "num_votes", "budget", "vote_type", "rule"])
        idx = next(i for i, l in enumerate(lines) if l.startswith(key + ";"))
        return _mutate(lines, drop=idx)
    if choice == 2:  # corrupt a number
        target, bad = rng.choice(
            [("p1;4", "p1;x4"), ("p2;6", "p2;6,0"), ("budget;10", "budget;ten"),
             ("num_votes;5", "num_votes;5.5")]
        )
        return "\n".join(lines).replace(target, bad) + "\n"
    if choice == 3:  # duplicate a project id
        return "\n".join(lines).replace("p2;6", "p1;6") + "\n"
    if choice == 4:  # unknown project in a vote
        voter = rng.choice(["v1;p1", "v3;p2"])
        return "\n".join(lines).replace(voter, voter.split(";")[0] + ";zz") + "\n"
    if choice == 5:  # declared count off by one
        target = rng.choice([("num_projects;2", "num_projects;1"), ("num_votes;5", "num_votes;6")])
        return "\n".join(lines).replace(*target) + "\n"
    if choice == 6:  # unsupported ballot type
        return "\n".join(lines).replace("vote_type;approval", "vote_type;cumulative") + "\n"
    return "\n".join(lines).replace("v4;p2", "v3;p2") + "\n"  # duplicate voter


class TestMutationRobustness:
    def test_fifty_random_mutations_all_raise_located_errors(self):
        rng = random.Random(20260823)
        lines = FIXTURE.splitlines()
        for _ in range(50):
            mutated = _mutation_menu(rng, lines)
            assert mutated != FIXTURE
            with pytest.raises(PabulibError) as err:
                parse_pabulib(mutated)
            assert err.value.kind
            assert err.value.line >= 1


class TestSynthetic:
    def test_city_scale_shape_parses_with_matching_counts(self):
        file = synthetic_file(29, 1182, "1011000", seed=4)
        reparsed = parse_pabulib(write_pabulib(file))
        assert len(reparsed.projects) == 29
        assert len(reparsed.votes) == 1182
        assert reparsed.budget == F(1011000)
        instance = to_instance(reparsed)
        assert len(instance.projects) == 29
        assert len(instance.approvals.voters) == 1182

    def test_every_synthetic_project_has_an_approver(self):
        file = synthetic_file(8, 10, "100", seed=1)
        instance = to_instance(file)  # would raise if a project lacked approvers
        assert all(instance.approvals.approval_score(p) >= 1 for p in instance.projects)


class TestDeliveryPolicies:
    def test_zero_policy(self):
        game = to_game(parse_pabulib(FIXTURE), DeliveryPolicy.zero())
        assert all(game.delivery[p] == 0 for p in game.projects)

    def test_fraction_policy_halves_costs(self):
        game = to_game(parse_pabulib(FIXTURE), DeliveryPolicy.fraction(F(1, 2)))
        assert game.delivery == {"p1": F(2), "p2": F(3)}

    @pytest.mark.parametrize("phi", [F(3, 2), F(-1, 10)])
    def test_fraction_outside_unit_interval_rejected(self, phi):
        with pytest.raises(ValueError):
            DeliveryPolicy.fraction(phi)

    def test_explicit_policy(self):
        policy = DeliveryPolicy.explicit({"p1": F(1), "p2": F(5)})
        game = to_game(parse_pabulib(FIXTURE), policy)
        assert game.delivery == {"p1": F(1), "p2": F(5)}

    def test_explicit_policy_missing_project_rejected(self):
        with pytest.raises(ValueError):
            to_game(parse_pabulib(FIXTURE), DeliveryPolicy.explicit({"p1": F(1)}))

    def test_over_budget_delivery_clamped_with_warning(self):
        policy = DeliveryPolicy.explicit({"p1": F(15), "p2": F(3)})
        with pytest.warns(UserWarning, match="clamped"):
            game = to_game(parse_pabulib(FIXTURE), policy)
        assert game.delivery["p1"] == F(10)
        assert game.delivery["p2"] == F(3)


class TestMoneyRendering:
    @pytest.mark.parametrize(
        "value,expected,exact",
        [
            (F(4), "4", True),
            (F(9, 2), "4.5", True),
            (F(-9, 2), "-4.5", True),
            (F(0), "0", True),
            (F(1, 3), "0.333333333333", False),
            (F(2, 3), "0.666666666667", False),
            (F(1, 10**12), "0.000000000001", True),
            (F(1, 10**13), "0", False),
            (F(15, 10**13), "0.000000000002", False),  # half-up at the tie
        ],
    )
    def test_twelve_digit_rendering(self, value, expected, exact):
        assert format_money(value) == (expected, exact)

    def test_custom_digit_budget(self):
        assert format_money(F(1, 3), 2) == ("0.33", False)
        assert format_money(F(1, 4), 2) == ("0.25", True)

    def test_money_json_carries_exact_sidecar(self):
        doc = money_json(F(-7, 3))
        assert doc == {"decimal": "-2.333333333333", "num": "-7", "den": "3"}

    @pytest.mark.parametrize("value", [F(4), F(9, 2), F(-7, 3), F(1, 10**15)])
    def test_money_json_round_trip(self, value):
        assert money_from_json(money_json(value)) == value

    def test_money_from_json_accepts_decimal_strings(self):
        assert money_from_json("4.5") == F(9, 2)

    def test_money_from_json_rejects_junk(self):
        with pytest.raises(ValueError):
            money_from_json([1, 2])


@pytest.fixture(scope="module")
def g1():
    return gallery()["g1"]


@pytest.fixture(scope="module")
def margins_doc(g1):
    profile = StrategyProfile({"p1": F(4), "p2": F(6)})
    results = margins(g1.game, RuleId.BASIC_AV, profile, F(0), g1.orders["default"])
    return write_margins_json(g1.game, RuleId.BASIC_AV, profile, results, F(0))


@pytest.fixture(scope="module")
def dynamics_doc(g1):
    trace = run_dynamics(
        g1.game,
        RuleId.AV_OVER_COST,
        StrategyProfile({"p1": F(8), "p2": F(8)}),
        DynamicsConfig(seed=3, iterations=50, record_every=10),
    )
    return write_dynamics_json(g1.game, trace)


@pytest.fixture(scope="module")
def g1_construction(g1):
    return ne_avcost_ap(g1.game)


class TestMarginsArtifact:
    @pytest.fixture
    def doc(self, margins_doc):
        return margins_doc

    def test_schema_and_order(self, doc):
        assert doc["schema"] == "v1"
        assert doc["kind"] == "margins"
        assert doc["rule"] == "basicav"
        assert [e["project"] for e in doc["projects"]] == ["p2", "p1"]

    def test_entries_carry_exact_money(self, doc):
        by_project = {e["project"]: e for e in doc["projects"]}
        assert by_project["p2"]["status"] == "winning"
        assert money_from_json(by_project["p2"]["margin"]) == F(4)
        assert money_from_json(by_project["p2"]["best_response_low"]) == F(10)
        assert by_project["p2"]["approvals"] == 3

    def test_json_serializable(self, doc):
        assert json.loads(json.dumps(doc)) == doc

    def test_csv_mirror(self, doc):
        text = write_margins_csv(doc)
        lines = text.strip().splitlines()
        assert lines[0].startswith("project,approvals,cost,status,margin")
        assert len(lines) == 3
        assert lines[1].startswith("p2,3,6,winning,4,10,")
        assert lines[1].endswith("True")  # exact rendering flag


class TestDynamicsArtifact:
    @pytest.fixture
    def doc(self, dynamics_doc):
        return dynamics_doc

    def test_schema_and_generator(self, doc):
        assert doc["schema"] == "v1"
        assert doc["kind"] == "dynamics"
        assert doc["generator"] == {"name": "mt19937", "seed": 3}
        assert doc["config"]["iterations"] == 50
        assert doc["projects"] == ["p2", "p1"]

    def test_snapshots_and_moves(self, doc):
        assert [s["iteration"] for s in doc["snapshots"]] == [10, 20, 30, 40, 50]
        assert doc["snapshots"][-1]["costs"] == doc["final"]
        moved = sum(doc["moves"]["accepted_increases"].values()) + sum(
            doc["moves"]["rejected_increases"].values()
        ) + sum(doc["moves"]["decreases"].values())
        assert moved == 50

    def test_initial_preserved_exactly(self, doc):
        assert money_from_json(doc["initial"]["p1"]) == F(8)

    def test_json_serializable(self, doc):
        assert json.loads(json.dumps(doc)) == doc

    def test_csv_mirror(self, doc):
        text = write_dynamics_csv(doc)
        lines = text.strip().splitlines()
        assert lines[0] == (
            "project,approvals,initial,final,initially_funded,finally_funded,exact"
        )
        assert len(lines) == 3
        assert lines[1].startswith("p2,3,8,")


class TestEquilibriumArtifact:
    @pytest.fixture
    def construction(self, g1_construction):
        return g1_construction

    def test_without_verification(self, g1, construction):
        doc = write_ne_json(g1.game, construction)
        assert doc["schema"] == "v1"
        assert doc["kind"] == "equilibrium"
        assert doc["rule"] == "avcost"
        assert doc["guarantee"] == "all-orders"
        assert doc["verification"] is None
        assert money_from_json(doc["profile"]["p1"]) == F(4)
        assert money_from_json(doc["profile"]["p2"]) == F(6)
        assert json.loads(json.dumps(doc)) == doc

    def test_with_verification(self, g1, construction):
        report = verify_ne(
            g1.game, RuleId.AV_OVER_COST, construction.profile, construction.order, F(0)
        )
        doc = write_ne_json(g1.game, construction, report, F(0))
        assert doc["verification"]["verified"] is True
        assert doc["verification"]["violations"] == []
        assert json.loads(json.dumps(doc)) == doc

    def test_csv_mirror(self, g1, construction):
        doc = write_ne_json(g1.game, construction)
        lines = write_ne_csv(doc).strip().splitlines()
        assert lines[0] == "project,cost,predicted_funded,exact"
        assert len(lines) == 3


class TestOutcomeArtifact:
    def test_outcome_document(self, g1):
        instance = g1.game.to_instance(
            StrategyProfile({"p1": F(4), "p2": F(6)}), g1.orders["default"]
        )
        outcome = run_rule(instance, RuleId.AV_OVER_COST)
        doc = outcome_json(RuleId.AV_OVER_COST, instance, outcome)
        assert doc["schema"] == "v1"
        assert doc["kind"] == "outcome"
        assert set(doc["funded"]) == {"p1", "p2"}
        assert money_from_json(doc["spent"]) == F(10)
        assert doc["removed"] == []
        assert len(doc["final_balances"]) == 5
        assert json.loads(json.dumps(doc)) == doc
