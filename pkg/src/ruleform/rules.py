"""Clinical rule model: the 6-slot rule tuple and its evaluation against a patient.

A rule holds sets of clinical conditions that must be present (``c_present``) or
absent (``c_absent``), non-clinical conditions that must be present or absent
(``d_present`` / ``d_absent``), a list of any-of groups (each a disjunction over
clinical and non-clinical members), and an action. Unasserted clinical
conditions evaluate as absent (closed world): an unchecked box means "no".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .catalog import Catalog, Code, Kind
from .errors import RuleformError


class RuleError(RuleformError):
    """Invalid rule construction or patient state."""


@dataclass(frozen=True)
class AnyOf:
    """One disjunction: satisfied when any clinical or non-clinical member holds."""

    clinical: frozenset[str] = frozenset()
    nonclinical: frozenset[str] = frozenset()

    def members(self) -> frozenset[str]:
        return self.clinical | self.nonclinical


@dataclass(frozen=True)
class Premise:
    """The condition part shared by clinical rules and display rules."""

    c_present: frozenset[str] = frozenset()
    d_present: frozenset[str] = frozenset()
    c_absent: frozenset[str] = frozenset()
    d_absent: frozenset[str] = frozenset()
    any_of: tuple[AnyOf, ...] = ()

    def satisfied_by(self, patient: "PatientState") -> bool:
        asserted = patient.asserted_clinical
        present = patient.present_nonclinical
        if any(c not in asserted for c in self.c_present):
            return False
        if any(d not in present for d in self.d_present):
            return False
        if any(c in asserted for c in self.c_absent):
            return False
        if any(d in present for d in self.d_absent):
            return False
        for group in self.any_of:
            if not (
                any(c in asserted for c in group.clinical)
                or any(d in present for d in group.nonclinical)
            ):
                return False
        return True

    def mentioned_ids(self) -> frozenset[str]:
        ids = self.c_present | self.d_present | self.c_absent | self.d_absent
        for group in self.any_of:
            ids |= group.members()
        return ids

    def clinical_ids(self) -> frozenset[str]:
        ids = self.c_present | self.c_absent
        for group in self.any_of:
            ids |= group.clinical
        return ids


class Verb(str, Enum):
    START = "start"
    STOP = "stop"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Action:
    verb: Verb
    target: str | None
    text: str


@dataclass(frozen=True)
class ClinicalRule:
    id: str
    premise: Premise
    action: Action


@dataclass
class RuleBase:
    """An ordered set of clinical rules over one catalog."""

    catalog: Catalog
    rules: dict[str, ClinicalRule]

    def rule(self, rule_id: str) -> ClinicalRule:
        try:
            return self.rules[rule_id]
        except KeyError:
            raise RuleError(f"unknown rule id {rule_id!r}") from None

    def referenced_clinical_ids(self) -> frozenset[str]:
        ids: frozenset[str] = frozenset()
        for rule in self.rules.values():
            ids |= rule.premise.clinical_ids()
        return ids

    def referenced_ids(self) -> frozenset[str]:
        ids: frozenset[str] = frozenset()
        for rule in self.rules.values():
            ids |= rule.premise.mentioned_ids()
            if rule.action.target is not None:
                ids |= {rule.action.target}
        return ids


@dataclass
class PatientState:
    """Mutable patient snapshot: structured facts plus checked questionnaire answers."""

    present_nonclinical: set[str] = field(default_factory=set)
    asserted_clinical: dict[str, Code] = field(default_factory=dict)

    def copy(self) -> "PatientState":
        return PatientState(set(self.present_nonclinical), dict(self.asserted_clinical))


def validate_patient_state(catalog: Catalog, patient: PatientState) -> None:
    """Raise when ids do not resolve with the right kind or codes are foreign."""
    for drug_id in patient.present_nonclinical:
        if catalog.condition(drug_id).is_clinical:
            raise RuleError(f"{drug_id!r} is clinical, expected a drug or lab condition")
    for cond_id, code in patient.asserted_clinical.items():
        cond = catalog.condition(cond_id)
        if not cond.is_clinical:
            raise RuleError(f"{cond_id!r} is {cond.kind.value}, expected clinical")
        if code not in cond.codes:
            raise RuleError(
                f"code {code.system}:{code.value} does not belong to condition {cond_id!r}"
            )


def rule_triggers(rule: ClinicalRule, patient: PatientState) -> bool:
    """True when every present/absent/any-of requirement of the rule holds."""
    return rule.premise.satisfied_by(patient)


@dataclass(frozen=True)
class Diagnostic:
    level: str
    code: str
    message: str
    rule_id: str | None = None


def validate_rulebase(rb: RuleBase) -> list[Diagnostic]:
    """Non-fatal lint pass: unsatisfiable rules, degenerate any-of groups, unused conditions."""
    out: list[Diagnostic] = []
    for rule in rb.rules.values():
        p = rule.premise
        contradicted = (p.c_present & p.c_absent) | (p.d_present & p.d_absent)
        for cond_id in sorted(contradicted):
            out.append(
                Diagnostic(
                    "warning",
                    "unsatisfiable",
                    f"rule {rule.id!r} requires {cond_id!r} both present and absent",
                    rule.id,
                )
            )
        for index, group in enumerate(p.any_of):
            if len(group.members()) == 1:
                (member,) = group.members()
                out.append(
                    Diagnostic(
                        "warning",
                        "degenerate_union",
                        f"rule {rule.id!r} any_of #{index + 1} has the single member "
                        f"{member!r}; equivalent to a present condition",
                        rule.id,
                    )
                )
    used = rb.referenced_ids()
    for cond_id in rb.catalog.conditions:
        if cond_id not in used:
            out.append(
                Diagnostic(
                    "warning",
                    "unused_condition",
                    f"catalog condition {cond_id!r} is not referenced by any rule",
                )
            )
    return out
