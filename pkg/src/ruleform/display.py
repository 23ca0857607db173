"""Display-rule compilation: decide which questions an adaptive form must show.

Every clinical rule is translated, under a strict total priority order over
clinical conditions, into display rules whose action is to show one clinical
condition. Five variants exist:

* ``P``  - one per required-present clinical condition: show it once all
  higher-priority required conditions are satisfied.
* ``A1`` - one per required-absent condition: show it once everything else
  about the rule holds (absences are asked last).
* ``A2`` - one per required-absent condition: keep it visible while it is
  checked, so a pre-filled answer can be removed.
* ``U1`` - one per clinical member of an any-of group: show it while no member
  of its group holds and higher-priority conditions are satisfied.
* ``U2`` - one per clinical member of an any-of group: keep it visible while it
  is checked.

A condition is displayed when at least one display rule targeting it is
satisfied; on every patient change all display rules are re-evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import RuleformError
from .rules import AnyOf, PatientState, Premise, RuleBase


class DisplayError(RuleformError):
    """Order does not cover the rulebase, or an id does not resolve."""


class Variant(str, Enum):
    P = "P"
    A1 = "A1"
    A2 = "A2"
    U1 = "U1"
    U2 = "U2"


@dataclass(frozen=True)
class Order:
    """Strict total priority order: earlier in ``sequence`` means asked first."""

    sequence: tuple[str, ...]
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rank = {cond_id: i for i, cond_id in enumerate(self.sequence)}
        if len(rank) != len(self.sequence):
            raise DisplayError("order contains a duplicate condition")
        object.__setattr__(self, "_rank", rank)

    def rank(self, condition_id: str) -> int:
        try:
            return self._rank[condition_id]
        except KeyError:
            raise DisplayError(
                f"order is missing clinical condition {condition_id!r}"
            ) from None

    def precedes(self, first: str, second: str) -> bool:
        return self.rank(first) < self.rank(second)

    def __contains__(self, condition_id: str) -> bool:
        return condition_id in self._rank


@dataclass(frozen=True)
class DisplayRule:
    source_rule_id: str
    variant: Variant
    target: str
    premise: Premise


@dataclass(frozen=True)
class DisplayRuleSet:
    rules: tuple[DisplayRule, ...]
    order: Order
    _by_target: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_target: dict[str, list[DisplayRule]] = {}
        for rule in self.rules:
            by_target.setdefault(rule.target, []).append(rule)
        object.__setattr__(self, "_by_target", by_target)

    def targeting(self, condition_id: str) -> tuple[DisplayRule, ...]:
        return tuple(self._by_target.get(condition_id, ()))

    def __len__(self) -> int:
        return len(self.rules)


def expected_rule_count(rb: RuleBase) -> int:
    """The count law: |Cp| + 2|Ca| + 2*sum(|Cu|) summed over all rules."""
    total = 0
    for rule in rb.rules.values():
        p = rule.premise
        total += len(p.c_present) + 2 * len(p.c_absent)
        total += 2 * sum(len(group.clinical) for group in p.any_of)
    return total


def compile_display_rules(rb: RuleBase, order: Order) -> DisplayRuleSet:
    """Translate every clinical rule into its display rules under ``order``."""
    for cond_id in sorted(rb.referenced_clinical_ids()):
        if cond_id not in order:
            raise DisplayError(f"order is missing clinical condition {cond_id!r}")

    out: list[DisplayRule] = []
    for rule in rb.rules.values():
        p = rule.premise

        def before(ids: frozenset[str], x: str) -> frozenset[str]:
            return frozenset(c for c in ids if order.precedes(c, x))

        def kept_groups(x: str, exclude: int | None = None) -> tuple[AnyOf, ...]:
            return tuple(
                group
                for k, group in enumerate(p.any_of)
                if k != exclude and all(order.precedes(c, x) for c in group.clinical)
            )

        for x in sorted(p.c_present, key=order.rank):
            out.append(
                DisplayRule(
                    rule.id,
                    Variant.P,
                    x,
                    Premise(
                        before(p.c_present, x), p.d_present,
                        p.c_absent, p.d_absent, kept_groups(x),
                    ),
                )
            )
        for x in sorted(p.c_absent, key=order.rank):
            out.append(
                DisplayRule(
                    rule.id,
                    Variant.A1,
                    x,
                    Premise(
                        p.c_present, p.d_present,
                        p.c_absent - {x}, p.d_absent, p.any_of,
                    ),
                )
            )
            out.append(
                DisplayRule(
                    rule.id,
                    Variant.A2,
                    x,
                    Premise(
                        frozenset({x}), p.d_present,
                        before(p.c_absent, x), p.d_absent, (),
                    ),
                )
            )
        for k, group in enumerate(p.any_of):
            for x in sorted(group.clinical, key=order.rank):
                kept = kept_groups(x, exclude=k)
                out.append(
                    DisplayRule(
                        rule.id,
                        Variant.U1,
                        x,
                        Premise(
                            before(p.c_present, x), p.d_present,
                            p.c_absent | group.clinical,
                            p.d_absent | group.nonclinical,
                            kept,
                        ),
                    )
                )
                out.append(
                    DisplayRule(
                        rule.id,
                        Variant.U2,
                        x,
                        Premise(
                            before(p.c_present, x) | {x}, p.d_present,
                            p.c_absent, p.d_absent, kept,
                        ),
                    )
                )
    return DisplayRuleSet(tuple(out), order)


def displayed_conditions(drs: DisplayRuleSet, patient: PatientState) -> frozenset[str]:
    """Conditions with at least one satisfied display rule under this patient."""
    shown = set()
    for target, rules in drs._by_target.items():
        if any(rule.premise.satisfied_by(patient) for rule in rules):
            shown.add(target)
    return frozenset(shown)


def explain_display(
    drs: DisplayRuleSet, patient: PatientState, condition_id: str
) -> list[tuple[DisplayRule, bool]]:
    """Every display rule targeting a condition, with its evaluation under ``patient``."""
    if condition_id not in drs.order:
        raise DisplayError(f"unknown clinical condition {condition_id!r}")
    return [
        (rule, rule.premise.satisfied_by(patient))
        for rule in drs.targeting(condition_id)
    ]


def export_display_rules(drs: DisplayRuleSet) -> list[dict]:
    """JSON-ready representation of a compiled display-rule set."""
    return [
        {
            "source": rule.source_rule_id,
            "variant": rule.variant.value,
            "target": rule.target,
            "cPresent": sorted(rule.premise.c_present),
            "dPresent": sorted(rule.premise.d_present),
            "cAbsent": sorted(rule.premise.c_absent),
            "dAbsent": sorted(rule.premise.d_absent),
            "anyOf": [
                {
                    "clinical": sorted(group.clinical),
                    "nonclinical": sorted(group.nonclinical),
                }
                for group in rule.premise.any_of
            ],
        }
        for rule in drs.rules
    ]
