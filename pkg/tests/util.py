"""Small builders for hand-crafted catalogs and rules in tests."""

from ruleform.catalog import (
    DEFAULT_CATEGORIES,
    Catalog,
    Code,
    Condition,
    Kind,
    build_catalog,
    most_general_code,
)
from ruleform.rules import Action, AnyOf, ClinicalRule, PatientState, Premise, RuleBase, Verb


def make_catalog(clinical=(), drugs=(), parents=None) -> Catalog:
    parents = parents or {}
    conditions = [
        Condition(
            id=cond_id,
            kind=Kind.CLINICAL,
            label=cond_id.replace("_", " ").capitalize(),
            codes=(Code("ICD10", f"X.{cond_id}", is_general=True),),
            category="General and other",
            parent=parents.get(cond_id),
        )
        for cond_id in clinical
    ]
    conditions += [
        Condition(
            id=drug_id,
            kind=Kind.DRUG,
            label=drug_id.replace("_", " ").capitalize(),
            codes=(Code("ATC", f"A.{drug_id}", is_general=True),),
            parent=parents.get(drug_id),
        )
        for drug_id in drugs
    ]
    return build_catalog(DEFAULT_CATEGORIES, conditions)


def make_rule(rule_id, cp=(), dp=(), ca=(), da=(), unions=(), action=None) -> ClinicalRule:
    groups = tuple(AnyOf(frozenset(c), frozenset(d)) for c, d in unions)
    premise = Premise(frozenset(cp), frozenset(dp), frozenset(ca), frozenset(da), groups)
    return ClinicalRule(rule_id, premise, action or Action(Verb.CUSTOM, None, f"review {rule_id}"))


def make_rulebase(catalog, *rules) -> RuleBase:
    return RuleBase(catalog, {rule.id: rule for rule in rules})


def pstate(catalog, asserted=(), drugs=()) -> PatientState:
    patient = PatientState(present_nonclinical=set(drugs))
    for cond_id in asserted:
        patient.asserted_clinical[cond_id] = most_general_code(catalog.condition(cond_id))
    return patient
