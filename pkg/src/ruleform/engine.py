"""Interactive questionnaire sessions: answers in, appear/disappear diffs out.

A session keeps a patient state, re-runs the compiled display rules after every
mutation, and derives what the form should show. Checked conditions always stay
visible (so they can be unchecked) even when no display rule asks for them
anymore, and conditions with a more general displayed ancestor are folded into
that ancestor. Conditions that appear after the first render are flagged: the
"new" flag lasts until the next change, the star lasts for the whole session.
"""

from __future__ import annotations

import itertools
import time
import uuid
from dataclasses import dataclass, field

from .catalog import Catalog, Code, collapse_by_hierarchy, most_general_code
from .display import DisplayRuleSet, Order, compile_display_rules, displayed_conditions
from .errors import RuleformError
from .rules import (
    ClinicalRule,
    PatientState,
    RuleBase,
    rule_triggers,
    validate_patient_state,
)

SESSION_SCHEMA_VERSION = 1


class EngineError(RuleformError):
    """Invalid session mutation."""


class NotDisplayedError(EngineError):
    """Answer submitted for a condition the form is not currently showing."""


@dataclass(frozen=True)
class QuestionnaireDiff:
    appeared: frozenset[str] = frozenset()
    disappeared: frozenset[str] = frozenset()
    unchanged: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Item:
    condition_id: str
    label: str
    checked: bool
    chosen_code: Code | None
    available_codes: tuple[Code, ...]
    is_new: bool
    has_star: bool


@dataclass(frozen=True)
class Panel:
    category: str
    color: str
    items: tuple[Item, ...]


@dataclass(frozen=True)
class QuestionnaireView:
    panels: tuple[Panel, ...]


@dataclass(frozen=True)
class Recommendation:
    rule_id: str
    action_verb: str
    action_target: str | None
    action_text: str
    triggering_conditions: frozenset[str]


class Session:
    """One questionnaire in progress. Mutations must be serialized by the caller."""

    def __init__(
        self,
        rulebase: RuleBase,
        order: Order,
        patient: PatientState,
        display_rules: DisplayRuleSet,
        session_id: str | None = None,
    ):
        self.id = session_id or uuid.uuid4().hex
        self.rulebase = rulebase
        self.catalog = rulebase.catalog
        self.order = order
        self.display_rules = display_rules
        self.patient = patient
        self.ever_appeared_late: set[str] = set()
        self.last_diff: QuestionnaireDiff | None = None
        self.last_displayed: frozenset[str] = self._evaluate()

    # -- evaluation ---------------------------------------------------------

    def _evaluate(self) -> frozenset[str]:
        shown = displayed_conditions(self.display_rules, self.patient)
        asserted = frozenset(self.patient.asserted_clinical)
        # checked conditions are never folded away: the user must be able to
        # uncheck them even when a more general condition is also shown
        collapsed = collapse_by_hierarchy(set(shown | asserted), self.catalog)
        return frozenset(collapsed) | asserted

    def _refresh(self) -> QuestionnaireDiff:
        previous = self.last_displayed
        current = self._evaluate()
        diff = QuestionnaireDiff(
            appeared=frozenset(current - previous),
            disappeared=frozenset(previous - current),
            unchanged=frozenset(current & previous),
        )
        self.ever_appeared_late |= diff.appeared
        self.last_diff = diff
        self.last_displayed = current
        return diff

    # -- mutations ----------------------------------------------------------

    def set_condition(
        self, condition_id: str, checked: bool, code: Code | None = None
    ) -> QuestionnaireDiff:
        cond = self.catalog.condition(condition_id)
        if not cond.is_clinical:
            raise EngineError(f"{condition_id!r} is {cond.kind.value}, expected clinical")
        if condition_id not in self.last_displayed:
            raise NotDisplayedError(f"condition {condition_id!r} is not displayed")
        if checked:
            chosen = code if code is not None else most_general_code(cond)
            if chosen not in cond.codes:
                raise EngineError(
                    f"code {chosen.system}:{chosen.value} does not belong "
                    f"to condition {condition_id!r}"
                )
            self.patient.asserted_clinical[condition_id] = chosen
        else:
            self.patient.asserted_clinical.pop(condition_id, None)
        return self._refresh()

    def set_drugs(self, drugs: set[str]) -> QuestionnaireDiff:
        for drug_id in drugs:
            cond = self.catalog.condition(drug_id)
            if cond.is_clinical:
                raise EngineError(f"{drug_id!r} is clinical, expected a drug or lab")
        self.patient.present_nonclinical = set(drugs)
        return self._refresh()

    # -- read side ----------------------------------------------------------

    def view(self) -> QuestionnaireView:
        is_new = self.last_diff.appeared if self.last_diff else frozenset()
        shown = self.last_displayed
        # a folded-away descendant contributes its codes to the ancestor item
        absorbed: dict[str, list[str]] = {}
        raw = displayed_conditions(self.display_rules, self.patient) | frozenset(
            self.patient.asserted_clinical
        )
        for cond_id in raw - shown:
            for ancestor in self.catalog.ancestors(cond_id):
                if ancestor in shown:
                    absorbed.setdefault(ancestor, []).append(cond_id)
                    break

        panels = []
        for category in self.catalog.categories:
            members = sorted(
                (c for c in shown if self.catalog.condition(c).category == category.name),
                key=lambda c: (self.catalog.condition(c).label, c),
            )
            if not members:
                continue
            items = []
            for cond_id in members:
                cond = self.catalog.condition(cond_id)
                codes = list(cond.codes)
                for child_id in sorted(absorbed.get(cond_id, ())):
                    codes.extend(
                        code
                        for code in self.catalog.condition(child_id).codes
                        if code not in codes
                    )
                items.append(
                    Item(
                        condition_id=cond_id,
                        label=cond.label,
                        checked=cond_id in self.patient.asserted_clinical,
                        chosen_code=self.patient.asserted_clinical.get(cond_id),
                        available_codes=tuple(codes),
                        is_new=cond_id in is_new,
                        has_star=cond_id in self.ever_appeared_late,
                    )
                )
            panels.append(Panel(category.name, category.color, tuple(items)))
        return QuestionnaireView(tuple(panels))

    def recommendations(self) -> list[Recommendation]:
        out = []
        for rule in self.rulebase.rules.values():
            if rule_triggers(rule, self.patient):
                out.append(_recommendation(rule, self.patient))
        return out

    # -- persistence --------------------------------------------------------

    def to_document(self) -> dict:
        return {
            "schema": SESSION_SCHEMA_VERSION,
            "order": list(self.order.sequence),
            "drugs": sorted(self.patient.present_nonclinical),
            "asserted": {
                cond_id: {"system": code.system, "value": code.value}
                for cond_id, code in sorted(self.patient.asserted_clinical.items())
            },
            "stars": sorted(self.ever_appeared_late),
        }


def _recommendation(rule: ClinicalRule, patient: PatientState) -> Recommendation:
    p = rule.premise
    satisfied = set(p.c_present) | set(p.d_present)
    for group in p.any_of:
        satisfied |= {c for c in group.clinical if c in patient.asserted_clinical}
        satisfied |= {d for d in group.nonclinical if d in patient.present_nonclinical}
    return Recommendation(
        rule_id=rule.id,
        action_verb=rule.action.verb.value,
        action_target=rule.action.target,
        action_text=rule.action.text,
        triggering_conditions=frozenset(satisfied),
    )


def create_session(
    rulebase: RuleBase,
    order: Order,
    initial: PatientState | None = None,
    display_rules: DisplayRuleSet | None = None,
    session_id: str | None = None,
) -> Session:
    """Start a session; the initial form never carries stars or highlights."""
    for cond_id in rulebase.catalog.clinical_ids():
        if cond_id not in order:
            raise EngineError(f"order is missing clinical condition {cond_id!r}")
    patient = initial.copy() if initial is not None else PatientState()
    validate_patient_state(rulebase.catalog, patient)
    if display_rules is None:
        display_rules = compile_display_rules(rulebase, order)
    return Session(rulebase, order, patient, display_rules, session_id)


def restore_session(rulebase: RuleBase, document: dict, session_id: str | None = None) -> Session:
    """Rebuild a session from ``to_document`` output; displayed set is recomputed."""
    if document.get("schema") != SESSION_SCHEMA_VERSION:
        raise EngineError(f"unsupported session schema {document.get('schema')!r}")
    order = Order(tuple(document["order"]))
    patient = PatientState(present_nonclinical=set(document["drugs"]))
    for cond_id, ref in document["asserted"].items():
        cond = rulebase.catalog.condition(cond_id)
        match = [
            code
            for code in cond.codes
            if code.system == ref["system"] and code.value == ref["value"]
        ]
        if not match:
            raise EngineError(
                f"code {ref['system']}:{ref['value']} does not belong to {cond_id!r}"
            )
        patient.asserted_clinical[cond_id] = match[0]
    session = create_session(rulebase, order, patient, session_id=session_id)
    session.ever_appeared_late = set(document.get("stars", ()))
    return session


@dataclass(frozen=True)
class SimulationResult:
    steps: int
    final_triggered: frozenset[str]
    displayed_total: int
    evaluation_seconds: float


def simulate_truthful(
    rulebase: RuleBase,
    order: Order,
    ground_truth: PatientState,
    display_rules: DisplayRuleSet | None = None,
) -> SimulationResult:
    """Answer every displayed question according to ``ground_truth`` until stable.

    Starting with no clinical answers, each step asserts all currently
    displayed conditions that are true in the ground truth, then re-runs the
    display rules. Assertions only grow, so this terminates within one step per
    clinical condition. Also reports the wall time of one full display-rule
    evaluation pass.
    """
    validate_patient_state(rulebase.catalog, ground_truth)
    if display_rules is None:
        display_rules = compile_display_rules(rulebase, order)
    patient = PatientState(set(ground_truth.present_nonclinical), {})

    started = time.perf_counter()
    shown = displayed_conditions(display_rules, patient)
    evaluation_seconds = time.perf_counter() - started

    ever_shown = set(shown)
    steps = 0
    while True:
        to_assert = {
            cond_id
            for cond_id in shown
            if cond_id in ground_truth.asserted_clinical
            and cond_id not in patient.asserted_clinical
        }
        if not to_assert:
            break
        for cond_id in to_assert:
            patient.asserted_clinical[cond_id] = ground_truth.asserted_clinical[cond_id]
        steps += 1
        shown = displayed_conditions(display_rules, patient) | frozenset(
            patient.asserted_clinical
        )
        ever_shown |= shown
    triggered = frozenset(
        rule.id
        for rule in rulebase.rules.values()
        if rule_triggers(rule, patient)
    )
    return SimulationResult(steps, triggered, len(ever_shown), evaluation_seconds)
