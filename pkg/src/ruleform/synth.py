"""Deterministic synthetic rulebases, catalogs and case suites for benchmarks.

Generated rule shapes mirror medication-review guidelines: "stop" rules require
at least one prescribed drug, "start" rules require clinical conditions and the
absence of the drug they recommend. Output is byte-identical for a given spec.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .cases import ClinicalCase
from .catalog import (
    DEFAULT_CATEGORIES,
    Catalog,
    Code,
    Condition,
    Kind,
    build_catalog,
)
from .dsl import print_rulebase
from .errors import RuleformError
from .rules import Action, AnyOf, ClinicalRule, Premise, RuleBase, Verb
from .catalog import serialize_catalog


class SynthError(RuleformError):
    """Infeasible generation spec."""


@dataclass(frozen=True)
class SynthSpec:
    rule_count: int
    clinical_count: int
    drug_count: int
    stopp_fraction: float = 1.0
    seed: int = 0
    max_present: int = 3
    absent_prob: float = 0.2
    union_prob: float = 0.25

    def validate(self) -> None:
        if self.rule_count < 1:
            raise SynthError("rule_count must be at least 1")
        if self.clinical_count < 1:
            raise SynthError("clinical_count must be at least 1")
        if self.drug_count < 0:
            raise SynthError("drug_count must not be negative")
        if not 0.0 <= self.stopp_fraction <= 1.0:
            raise SynthError("stopp_fraction must be within [0, 1]")
        if self.max_present < 1 or self.max_present > self.clinical_count:
            raise SynthError("max_present must be within [1, clinical_count]")
        if self.drug_count == 0 and self.stopp_fraction > 0:
            raise SynthError("stopp rules need drugs; set drug_count or stopp_fraction=0")


def _clinical_conditions(count: int, rng: random.Random) -> list[Condition]:
    conditions = []
    for i in range(count):
        cond_id = f"c{i:03d}"
        letter = chr(ord("A") + i % 26)
        base = f"{letter}{i:03d}"
        codes = [Code("ICD10", base, f"Condition {i:03d}", True)]
        for sub in range(rng.choice([0, 0, 0, 1, 2])):
            codes.append(Code("ICD10", f"{base}.{sub + 1}", f"Condition {i:03d} form {sub + 1}"))
        conditions.append(
            Condition(
                id=cond_id,
                kind=Kind.CLINICAL,
                label=f"Condition {i:03d}",
                codes=tuple(codes),
                category=rng.choice(DEFAULT_CATEGORIES).name,
            )
        )
    return conditions


def _drug_conditions(count: int) -> list[Condition]:
    return [
        Condition(
            id=f"d{i:03d}",
            kind=Kind.DRUG,
            label=f"Drug {i:03d}",
            codes=(Code("ATC", f"X{i:03d}", f"Drug {i:03d}", True),),
        )
        for i in range(count)
    ]


def build_model(spec: SynthSpec) -> tuple[Catalog, RuleBase]:
    """Build an in-memory catalog and rulebase for the spec (no files involved)."""
    spec.validate()
    rng = random.Random(spec.seed)
    clinical = _clinical_conditions(spec.clinical_count, rng)
    drugs = _drug_conditions(spec.drug_count)
    catalog = build_catalog(DEFAULT_CATEGORIES, clinical + drugs)
    clinical_ids = [c.id for c in clinical]
    drug_ids = [d.id for d in drugs]

    stopp_count = round(spec.stopp_fraction * spec.rule_count)
    rules: dict[str, ClinicalRule] = {}
    for i in range(spec.rule_count):
        rule_id = f"r{i:03d}"
        used_clinical: list[str] = []

        def pick_clinical(k: int) -> list[str]:
            pool = [c for c in clinical_ids if c not in used_clinical]
            chosen = rng.sample(pool, min(k, len(pool)))
            used_clinical.extend(chosen)
            return sorted(chosen)

        c_present = pick_clinical(rng.randint(1, spec.max_present))
        c_absent = pick_clinical(1) if rng.random() < spec.absent_prob else []
        any_of: list[AnyOf] = []
        if rng.random() < spec.union_prob and len(clinical_ids) - len(used_clinical) >= 2:
            members = pick_clinical(rng.randint(2, 3))
            any_of.append(AnyOf(frozenset(members), frozenset()))

        if i < stopp_count:
            d_present = sorted(rng.sample(drug_ids, min(rng.choice([1, 1, 2]), len(drug_ids))))
            d_absent: list[str] = []
            target = rng.choice(d_present)
            action = Action(Verb.STOP, target, f"Stop Drug {target[1:]}")
        elif drug_ids:
            d_present = []
            target = rng.choice(drug_ids)
            d_absent = [target]
            action = Action(Verb.START, target, f"Start Drug {target[1:]}")
        else:
            d_present = []
            d_absent = []
            action = Action(Verb.CUSTOM, None, f"Review finding set {i:03d}")

        rules[rule_id] = ClinicalRule(
            rule_id,
            Premise(
                frozenset(c_present),
                frozenset(d_present),
                frozenset(c_absent),
                frozenset(d_absent),
                tuple(any_of),
            ),
            action,
        )
    return catalog, RuleBase(catalog, rules)


def generate_synthetic(spec: SynthSpec) -> tuple[str, str]:
    """Render a spec to (catalog file text, rulebase file text); deterministic."""
    catalog, rb = build_model(spec)
    return serialize_catalog(catalog), print_rulebase(rb)


def restricted_model(
    clinical_count: int, rule_count: int, seed: int = 0, max_present: int | None = None
) -> tuple[Catalog, RuleBase]:
    """Rules with only required-present clinical conditions (reduction-compatible)."""
    if clinical_count < 1 or rule_count < 1:
        raise SynthError("restricted model needs at least one condition and one rule")
    rng = random.Random(seed)
    clinical = _clinical_conditions(clinical_count, rng)
    catalog = build_catalog(DEFAULT_CATEGORIES, clinical)
    ids = [c.id for c in clinical]
    ceiling = max_present if max_present is not None else clinical_count
    rules: dict[str, ClinicalRule] = {}
    for i in range(rule_count):
        rule_id = f"r{i:03d}"
        members = sorted(rng.sample(ids, rng.randint(1, min(ceiling, len(ids)))))
        rules[rule_id] = ClinicalRule(
            rule_id,
            Premise(c_present=frozenset(members)),
            Action(Verb.CUSTOM, None, f"Review finding set {i:03d}"),
        )
    return catalog, RuleBase(catalog, rules)


def random_cases(
    rb: RuleBase,
    count: int,
    mean_drugs: float = 11.5,
    truth_probability: float = 0.25,
    seed: int = 0,
) -> list[ClinicalCase]:
    """Sample cases with roughly ``mean_drugs`` prescriptions per patient."""
    if count < 1:
        raise SynthError("case count must be at least 1")
    rng = random.Random(seed)
    drug_ids = sorted(rb.catalog.nonclinical_ids())
    clinical_ids = sorted(rb.referenced_clinical_ids())
    cases = []
    for i in range(count):
        wanted = max(0, round(rng.gauss(mean_drugs, max(1.0, mean_drugs / 4))))
        drugs = sorted(rng.sample(drug_ids, min(wanted, len(drug_ids))))
        truth = sorted(c for c in clinical_ids if rng.random() < truth_probability)
        cases.append(ClinicalCase(f"case{i + 1:03d}", tuple(drugs), tuple(truth)))
    return cases
