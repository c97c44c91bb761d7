"""Participatory budgeting cost games.

Projects strategically report costs, a budgeting rule picks winners, and a
funded project's payoff is its reported cost minus its true delivery cost.
The package evaluates five approval-based rules exactly over rationals,
constructs pure Nash equilibria where constructions are known, measures
winning/losing margins via best responses, searches cost grids for
equilibria, and simulates best-response dynamics.
"""
from .core import (
    ApprovalProfile,
    BallotClass,
    GalleryEntry,
    Money,
    Outcome,
    PbGame,
    PbInstance,
    StrategyProfile,
    TieBreakOrder,
    ZERO,
    ad_order,
    approval_proportional,
    classify_ballots,
    default_order,
    gallery,
    is_ad_order,
    money,
    payoff,
    validate_ad_order,
)
from .dynamics import DynamicsConfig, DynamicsTrace, run_dynamics
from .equilibria import (
    ALL_ORDERS,
    THIS_AD_ORDER,
    NeConstruction,
    NotApplicable,
    ne_avcost_ad,
    ne_avcost_ap,
    ne_basic_av,
    ne_mes_apr_partylist,
    ne_mes_apr_plurality,
    ne_mes_cost,
    ne_phragmen_partylist_zero,
    small_cost_witness,
)
from .pabulib import (
    DeliveryPolicy,
    PabulibError,
    PabulibFile,
    ProjectRow,
    VoteRow,
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
from .response import (
    BestResponse,
    Margin,
    NeReport,
    Violation,
    best_response,
    exact_threshold_basic_av,
    funded_at,
    grid_ne_search,
    margins,
    verify_ne,
)
from .rules import (
    Affordability,
    RuleId,
    Variant,
    run_av_over_cost,
    run_basic_av,
    run_mes,
    run_phragmen,
    run_rule,
    run_with_completion,
    solve_alpha_apr,
    solve_alpha_cost,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_ORDERS",
    "Affordability",
    "ApprovalProfile",
    "BallotClass",
    "BestResponse",
    "DeliveryPolicy",
    "DynamicsConfig",
    "DynamicsTrace",
    "GalleryEntry",
    "Margin",
    "Money",
    "NeConstruction",
    "NeReport",
    "NotApplicable",
    "Outcome",
    "PabulibError",
    "PabulibFile",
    "PbGame",
    "PbInstance",
    "ProjectRow",
    "RuleId",
    "StrategyProfile",
    "THIS_AD_ORDER",
    "TieBreakOrder",
    "Variant",
    "Violation",
    "VoteRow",
    "ZERO",
    "ad_order",
    "approval_proportional",
    "best_response",
    "classify_ballots",
    "default_order",
    "exact_threshold_basic_av",
    "format_money",
    "funded_at",
    "gallery",
    "grid_ne_search",
    "is_ad_order",
    "margins",
    "money",
    "money_from_json",
    "money_json",
    "ne_avcost_ad",
    "ne_avcost_ap",
    "ne_basic_av",
    "ne_mes_apr_partylist",
    "ne_mes_apr_plurality",
    "ne_mes_cost",
    "ne_phragmen_partylist_zero",
    "outcome_json",
    "parse_pabulib",
    "payoff",
    "run_av_over_cost",
    "run_basic_av",
    "run_dynamics",
    "run_mes",
    "run_phragmen",
    "run_rule",
    "run_with_completion",
    "small_cost_witness",
    "solve_alpha_apr",
    "solve_alpha_cost",
    "synthetic_file",
    "to_game",
    "to_instance",
    "validate_ad_order",
    "verify_ne",
    "write_dynamics_csv",
    "write_dynamics_json",
    "write_margins_csv",
    "write_margins_json",
    "write_ne_csv",
    "write_ne_json",
    "write_pabulib",
]
