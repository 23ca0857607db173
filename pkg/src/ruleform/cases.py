"""Clinical case suites: run truthful simulations and collect per-case metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass

import yaml

from .catalog import most_general_code
from .display import Order, compile_display_rules
from .engine import simulate_truthful
from .errors import RuleformError
from .rules import PatientState, RuleBase


class CaseError(RuleformError):
    """Malformed case file or case referencing unknown conditions."""


@dataclass(frozen=True)
class ClinicalCase:
    id: str
    drugs: tuple[str, ...]
    ground_truth: tuple[str, ...]


def load_cases(text: str) -> list[ClinicalCase]:
    """Parse a case file: a list of {id, drugs, groundTruth} documents (YAML or JSON)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CaseError(f"invalid case file: {exc}") from exc
    if doc is None:
        return []
    if not isinstance(doc, list):
        raise CaseError("case file must contain a list of cases")
    cases = []
    for entry in doc:
        if not isinstance(entry, dict) or "id" not in entry:
            raise CaseError("each case must be a mapping with an 'id'")
        cases.append(
            ClinicalCase(
                id=str(entry["id"]),
                drugs=tuple(str(d) for d in entry.get("drugs", []) or []),
                ground_truth=tuple(str(c) for c in entry.get("groundTruth", []) or []),
            )
        )
    return cases


def dump_cases(cases: list[ClinicalCase]) -> str:
    return json.dumps(
        [
            {"id": c.id, "drugs": list(c.drugs), "groundTruth": list(c.ground_truth)}
            for c in cases
        ],
        indent=2,
    ) + "\n"


@dataclass(frozen=True)
class CaseMetrics:
    case_id: str
    drug_count: int
    execution_time_seconds: float
    conditions_displayed: int
    rules_triggered: int
    displayed_fraction: float


def case_state(rb: RuleBase, case: ClinicalCase) -> PatientState:
    """Ground-truth patient state for a case; codes default to the most general."""
    state = PatientState(present_nonclinical=set(case.drugs))
    for cond_id in case.ground_truth:
        cond = rb.catalog.condition(cond_id)
        if not cond.is_clinical:
            raise CaseError(f"case {case.id!r}: {cond_id!r} is not clinical")
        state.asserted_clinical[cond_id] = most_general_code(cond)
    for drug_id in case.drugs:
        if rb.catalog.condition(drug_id).is_clinical:
            raise CaseError(f"case {case.id!r}: {drug_id!r} is not a drug or lab")
    return state


def evaluate_cases(
    rb: RuleBase, cases: list[ClinicalCase], order: Order
) -> list[CaseMetrics]:
    """Truthful simulation of every case under one shared compiled rule set."""
    display_rules = compile_display_rules(rb, order)
    total_clinical = len(rb.referenced_clinical_ids())
    metrics = []
    for case in cases:
        result = simulate_truthful(rb, order, case_state(rb, case), display_rules)
        metrics.append(
            CaseMetrics(
                case_id=case.id,
                drug_count=len(case.drugs),
                execution_time_seconds=result.evaluation_seconds,
                conditions_displayed=result.displayed_total,
                rules_triggered=len(result.final_triggered),
                displayed_fraction=(
                    result.displayed_total / total_clinical if total_clinical else 0.0
                ),
            )
        )
    return metrics


@dataclass(frozen=True)
class CaseSummary:
    case_count: int
    mean_drugs: float
    mean_time_seconds: float
    mean_displayed: float
    mean_triggered: float
    mean_fraction: float


def summarize_cases(metrics: list[CaseMetrics]) -> CaseSummary | None:
    if not metrics:
        return None
    n = len(metrics)
    return CaseSummary(
        case_count=n,
        mean_drugs=sum(m.drug_count for m in metrics) / n,
        mean_time_seconds=sum(m.execution_time_seconds for m in metrics) / n,
        mean_displayed=sum(m.conditions_displayed for m in metrics) / n,
        mean_triggered=sum(m.rules_triggered for m in metrics) / n,
        mean_fraction=sum(m.displayed_fraction for m in metrics) / n,
    )
