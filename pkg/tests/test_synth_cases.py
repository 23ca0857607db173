import json

import pytest

from ruleform.cases import (
    CaseError,
    ClinicalCase,
    dump_cases,
    evaluate_cases,
    load_cases,
    summarize_cases,
)
from ruleform.catalog import load_catalog
from ruleform.display import expected_rule_count, compile_display_rules
from ruleform.dsl import parse_rulebase
from ruleform.ordering import condition_frequency_order
from ruleform.rules import RuleBase
from ruleform.synth import SynthSpec, SynthError, build_model, generate_synthetic, random_cases


def test_generated_files_compile_and_obey_count_law():
    spec = SynthSpec(rule_count=124, clinical_count=73, drug_count=40, stopp_fraction=0.69, seed=1)
    catalog_text, rules_text = generate_synthetic(spec)
    catalog = load_catalog(catalog_text)
    rb = parse_rulebase(rules_text, catalog)
    assert len(rb.rules) == 124
    assert len(catalog.clinical_ids()) == 73
    assert len(catalog.nonclinical_ids()) == 40
    order = condition_frequency_order(rb)
    drs = compile_display_rules(rb, order)
    assert len(drs) == expected_rule_count(rb)


def test_generation_is_deterministic():
    spec = SynthSpec(rule_count=20, clinical_count=15, drug_count=8, stopp_fraction=0.5, seed=42)
    assert generate_synthetic(spec) == generate_synthetic(spec)


def test_different_seeds_differ():
    base = dict(rule_count=20, clinical_count=15, drug_count=8, stopp_fraction=0.5)
    first = generate_synthetic(SynthSpec(seed=1, **base))
    second = generate_synthetic(SynthSpec(seed=2, **base))
    assert first != second


def test_stopp_fraction_share_has_present_drugs():
    spec = SynthSpec(rule_count=40, clinical_count=20, drug_count=10, stopp_fraction=0.69, seed=3)
    _, rb = build_model(spec)
    with_drugs = sum(1 for r in rb.rules.values() if r.premise.d_present)
    assert with_drugs == round(0.69 * 40)


def test_zero_rule_count_rejected():
    with pytest.raises(SynthError):
        SynthSpec(rule_count=0, clinical_count=5, drug_count=2).validate()


def test_stopp_rules_need_drugs():
    with pytest.raises(SynthError):
        SynthSpec(rule_count=5, clinical_count=5, drug_count=0, stopp_fraction=1.0).validate()


def test_random_cases_shape():
    _, rb = build_model(
        SynthSpec(rule_count=10, clinical_count=12, drug_count=20, stopp_fraction=1.0, seed=5)
    )
    cases = random_cases(rb, 30, mean_drugs=11.5, seed=5)
    assert len(cases) == 30
    assert cases == random_cases(rb, 30, mean_drugs=11.5, seed=5)
    mean_drugs = sum(len(c.drugs) for c in cases) / len(cases)
    assert 8.0 <= mean_drugs <= 15.0
    for case in cases:
        assert len(set(case.drugs)) == len(case.drugs)


# -- case files -----------------------------------------------------------------


def test_case_file_roundtrip():
    cases = [
        ClinicalCase("case001", ("fibre",), ("constipation",)),
        ClinicalCase("case002", (), ()),
    ]
    parsed = load_cases(dump_cases(cases))
    assert parsed == cases


def test_load_cases_accepts_yaml():
    text = """
- id: one
  drugs: [fibre]
  groundTruth: [constipation, diverticulosis]
"""
    cases = load_cases(text)
    assert cases[0].drugs == ("fibre",)
    assert cases[0].ground_truth == ("constipation", "diverticulosis")


def test_load_cases_rejects_non_list():
    with pytest.raises(CaseError):
        load_cases("id: one\n")


def test_empty_case_file():
    assert load_cases("") == []
    assert summarize_cases([]) is None


# -- evaluation -------------------------------------------------------------------


def test_fibre_case_displays_nothing(demo_catalog, d2d6):
    rb = RuleBase(demo_catalog, {"D2": d2d6.rule("D2")})
    order = condition_frequency_order(rb)
    metrics = evaluate_cases(rb, [ClinicalCase("c1", ("fibre",), ())], order)
    assert metrics[0].conditions_displayed == 0
    assert metrics[0].rules_triggered == 0


def test_d6_case_metrics(demo_catalog, d2d6):
    rb = RuleBase(demo_catalog, {"D6": d2d6.rule("D6")})
    order = condition_frequency_order(rb)
    case = ClinicalCase("c1", ("antipsychotic",), ("parkinsonism",))
    metrics = evaluate_cases(rb, [case], order)
    assert metrics[0].conditions_displayed == 2
    assert metrics[0].rules_triggered == 1
    assert metrics[0].drug_count == 1
    assert metrics[0].displayed_fraction == 1.0  # both referenced conditions shown


def test_case_with_unknown_condition_rejected(demo_catalog, d2d6):
    order = condition_frequency_order(d2d6)
    from ruleform.catalog import CatalogError

    with pytest.raises((CaseError, CatalogError)):
        evaluate_cases(d2d6, [ClinicalCase("c1", ("ghost",), ())], order)
    with pytest.raises(CaseError):
        evaluate_cases(d2d6, [ClinicalCase("c1", (), ("fibre",))], order)


def test_summary_means(demo_catalog, d2d6):
    rb = RuleBase(demo_catalog, {"D2": d2d6.rule("D2"), "D6": d2d6.rule("D6")})
    order = condition_frequency_order(rb)
    cases = [
        ClinicalCase("c1", ("fibre",), ()),
        ClinicalCase("c2", ("antipsychotic",), ("parkinsonism",)),
    ]
    metrics = evaluate_cases(rb, cases, order)
    summary = summarize_cases(metrics)
    assert summary.case_count == 2
    assert summary.mean_drugs == 1.0
    assert summary.mean_triggered == pytest.approx(0.5)
    assert 0.0 <= summary.mean_fraction <= 1.0
