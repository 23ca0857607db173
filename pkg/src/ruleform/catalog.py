"""Condition catalog: terminology codes, display categories and the is-a hierarchy.

The catalog defines the universe a rulebase may reference. It is loaded from a
YAML file once and treated as immutable afterwards, so it can be shared freely
between rulebases, sessions and threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import yaml

from .errors import RuleformError, SourceError


class Kind(str, Enum):
    """What a condition is: a question to ask, or a structured fact."""

    CLINICAL = "clinical"
    DRUG = "drug"
    LAB = "lab"

    @property
    def is_clinical(self) -> bool:
        return self is Kind.CLINICAL


class CatalogError(SourceError):
    """Malformed catalog file or violated catalog invariant."""


@dataclass(frozen=True)
class Code:
    """One terminology entry (e.g. an ICD10 or ATC code) attached to a condition."""

    system: str
    value: str
    label: str = ""
    is_general: bool = False


@dataclass(frozen=True)
class Category:
    name: str
    color: str


@dataclass(frozen=True)
class Condition:
    id: str
    kind: Kind
    label: str
    codes: tuple[Code, ...] = ()
    category: str | None = None
    parent: str | None = None

    @property
    def is_clinical(self) -> bool:
        return self.kind is Kind.CLINICAL


#: The 13 display categories shipped by default; colors are opaque hex strings.
DEFAULT_CATEGORIES: tuple[Category, ...] = (
    Category("Cardiovascular", "#c0392b"),
    Category("Respiratory", "#2980b9"),
    Category("Digestive", "#d35400"),
    Category("Endocrine and metabolic", "#8e44ad"),
    Category("Neurology", "#16a085"),
    Category("Psychiatry", "#27ae60"),
    Category("Musculoskeletal", "#f39c12"),
    Category("Renal and urogenital", "#2c3e50"),
    Category("Hematology", "#e74c3c"),
    Category("Infectious diseases", "#7f8c8d"),
    Category("Dermatology", "#e67e22"),
    Category("Eye and ENT", "#3498db"),
    Category("General and other", "#95a5a6"),
)


@dataclass
class Catalog:
    """All known conditions plus the ordered list of display categories."""

    categories: tuple[Category, ...]
    conditions: dict[str, Condition]

    def __contains__(self, condition_id: str) -> bool:
        return condition_id in self.conditions

    def condition(self, condition_id: str) -> Condition:
        try:
            return self.conditions[condition_id]
        except KeyError:
            raise CatalogError(f"unknown condition id {condition_id!r}") from None

    def clinical_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.conditions.values() if c.is_clinical)

    def nonclinical_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.conditions.values() if not c.is_clinical)

    def category_color(self, name: str) -> str:
        for cat in self.categories:
            if cat.name == name:
                return cat.color
        raise CatalogError(f"unknown category {name!r}")

    def ancestors(self, condition_id: str) -> tuple[str, ...]:
        """Parent chain of a condition, nearest first."""
        chain = []
        current = self.condition(condition_id).parent
        while current is not None:
            chain.append(current)
            current = self.condition(current).parent
        return tuple(chain)


def most_general_code(condition: Condition) -> Code:
    """The code flagged as most general; unique by catalog invariant."""
    for code in condition.codes:
        if code.is_general:
            return code
    raise CatalogError(f"condition {condition.id!r} has no general code")


def collapse_by_hierarchy(ids: set[str] | frozenset[str], catalog: Catalog) -> set[str]:
    """Drop every id whose (transitive) ancestor is also in the input set."""
    for condition_id in ids:
        catalog.condition(condition_id)  # raises on unknown id
    return {
        condition_id
        for condition_id in ids
        if not any(ancestor in ids for ancestor in catalog.ancestors(condition_id))
    }


def _check_hierarchy(conditions: dict[str, Condition]) -> None:
    for cond in conditions.values():
        if cond.parent is None:
            continue
        if cond.parent not in conditions:
            raise CatalogError(
                f"condition {cond.id!r} refers to unknown parent {cond.parent!r}"
            )
        parent = conditions[cond.parent]
        if parent.kind is not cond.kind:
            raise CatalogError(
                f"condition {cond.id!r} ({cond.kind.value}) has parent "
                f"{parent.id!r} of different kind ({parent.kind.value})"
            )
    # cycle detection over the parent relation
    for start in conditions:
        seen = {start}
        current = conditions[start].parent
        while current is not None:
            if current in seen:
                raise CatalogError(f"parent cycle involving condition {start!r}")
            seen.add(current)
            current = conditions[current].parent


def _normalize_codes(
    cond_id: str, codes: tuple[Code, ...], diagnostics: list[str] | None
) -> tuple[Code, ...]:
    seen: set[tuple[str, str]] = set()
    for code in codes:
        key = (code.system, code.value)
        if key in seen:
            raise CatalogError(
                f"condition {cond_id!r} lists code {code.system}:{code.value} twice"
            )
        seen.add(key)
    general = [c for c in codes if c.is_general]
    if len(general) > 1:
        raise CatalogError(f"condition {cond_id!r} marks more than one code as general")
    if not general and codes:
        if diagnostics is not None:
            diagnostics.append(
                f"condition {cond_id!r}: no code marked general, "
                f"promoting {codes[0].system}:{codes[0].value}"
            )
        codes = (Code(codes[0].system, codes[0].value, codes[0].label, True),) + codes[1:]
    return codes


def build_catalog(
    categories: tuple[Category, ...],
    conditions: list[Condition],
    diagnostics: list[str] | None = None,
) -> Catalog:
    """Validate conditions against every catalog invariant and assemble the catalog."""
    category_names = {c.name for c in categories}
    by_id: dict[str, Condition] = {}
    for cond in conditions:
        if cond.id in by_id:
            raise CatalogError(f"duplicate condition id {cond.id!r}")
        codes = _normalize_codes(cond.id, cond.codes, diagnostics)
        if cond.is_clinical:
            if not codes:
                raise CatalogError(f"clinical condition {cond.id!r} has no codes")
            if cond.category is None:
                raise CatalogError(f"clinical condition {cond.id!r} has no category")
        if cond.category is not None and cond.category not in category_names:
            raise CatalogError(
                f"condition {cond.id!r} uses unknown category {cond.category!r}"
            )
        by_id[cond.id] = Condition(
            cond.id, cond.kind, cond.label, codes, cond.category, cond.parent
        )
    _check_hierarchy(by_id)
    return Catalog(categories=tuple(categories), conditions=by_id)


def _as_mapping(node, what: str) -> dict:
    if not isinstance(node, dict):
        raise CatalogError(f"{what} must be a mapping, got {type(node).__name__}")
    return node


def load_catalog(text: str, diagnostics: list[str] | None = None) -> Catalog:
    """Parse catalog YAML and return a validated, immutable Catalog.

    Warnings (e.g. a code promoted to general) are appended to ``diagnostics``
    when a list is supplied; they never change the returned value.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise CatalogError(
                getattr(exc, "problem", None) or "invalid YAML",
                line=mark.line + 1,
                column=mark.column + 1,
            ) from exc
        raise CatalogError(f"invalid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    doc = _as_mapping(doc, "catalog document")

    categories: list[Category] = []
    for raw in doc.get("categories", []) or []:
        raw = _as_mapping(raw, "category entry")
        try:
            categories.append(Category(str(raw["name"]), str(raw["color"])))
        except KeyError as exc:
            raise CatalogError(f"category entry missing key {exc.args[0]!r}") from None

    conditions: list[Condition] = []
    for raw in doc.get("conditions", []) or []:
        raw = _as_mapping(raw, "condition entry")
        try:
            cond_id = str(raw["id"])
            kind_text = str(raw["kind"])
            label = str(raw["label"])
        except KeyError as exc:
            raise CatalogError(f"condition entry missing key {exc.args[0]!r}") from None
        try:
            kind = Kind(kind_text)
        except ValueError:
            raise CatalogError(
                f"condition {cond_id!r} has invalid kind {kind_text!r}"
            ) from None
        codes = []
        for raw_code in raw.get("codes", []) or []:
            raw_code = _as_mapping(raw_code, f"code entry of condition {cond_id!r}")
            try:
                codes.append(
                    Code(
                        system=str(raw_code["system"]),
                        value=str(raw_code["value"]),
                        label=str(raw_code.get("label", "")),
                        is_general=bool(raw_code.get("general", False)),
                    )
                )
            except KeyError as exc:
                raise CatalogError(
                    f"code entry of condition {cond_id!r} missing key {exc.args[0]!r}"
                ) from None
        conditions.append(
            Condition(
                id=cond_id,
                kind=kind,
                label=label,
                codes=tuple(codes),
                category=str(raw["category"]) if raw.get("category") is not None else None,
                parent=str(raw["parent"]) if raw.get("parent") is not None else None,
            )
        )
    return build_catalog(tuple(categories), conditions, diagnostics)


def serialize_catalog(catalog: Catalog) -> str:
    """Render a catalog back to its file format; load(serialize(c)) == c."""
    doc: dict = {
        "categories": [{"name": c.name, "color": c.color} for c in catalog.categories],
        "conditions": [],
    }
    for cond in catalog.conditions.values():
        entry: dict = {"id": cond.id, "kind": cond.kind.value, "label": cond.label}
        if cond.category is not None:
            entry["category"] = cond.category
        if cond.parent is not None:
            entry["parent"] = cond.parent
        if cond.codes:
            entry["codes"] = [
                {
                    "system": code.system,
                    "value": code.value,
                    "label": code.label,
                    "general": code.is_general,
                }
                for code in cond.codes
            ]
        doc["conditions"].append(entry)
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)
