"""Parser and pretty-printer for the rule DSL.

Grammar (EBNF):

    rulebase := rule* ;
    rule     := "rule" ID "{" clause* "action" action "}" ;
    clause   := ("present"|"absent") kindlist | "any_of" kindlist ;
    kindlist := (("clinical"|"drug"|"lab") idlist)+ ;
    idlist   := ID ("," ID)* ;
    action   := ("start"|"stop") ID | "custom" STRING ;

Comments start with ``#`` and run to end of line. Each ``any_of`` clause
contributes one disjunction group, in source order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .catalog import Catalog, Kind
from .errors import SourceError
from .rules import Action, AnyOf, ClinicalRule, Premise, RuleBase, Verb

KEYWORDS = {
    "rule", "present", "absent", "any_of", "action",
    "clinical", "drug", "lab", "start", "stop", "custom",
}

KIND_KEYWORDS = {"clinical": Kind.CLINICAL, "drug": Kind.DRUG, "lab": Kind.LAB}


class ParseError(SourceError):
    """Syntax or resolution error in rule DSL source."""


@dataclass(frozen=True)
class Token:
    kind: str  # word | punct | string | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            if ch in " \t":
                i += 1
                continue
            if ch == "#":
                break
            col = i + 1
            if ch in "{},":
                tokens.append(Token("punct", ch, line_no, col))
                i += 1
                continue
            if ch == '"':
                i += 1
                parts: list[str] = []
                while i < n and line[i] != '"':
                    if line[i] == "\\" and i + 1 < n:
                        parts.append(line[i + 1])
                        i += 2
                    else:
                        parts.append(line[i])
                        i += 1
                if i >= n:
                    raise ParseError("unterminated string", line_no, col)
                i += 1
                tokens.append(Token("string", "".join(parts), line_no, col))
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (line[j].isalnum() or line[j] == "_"):
                    j += 1
                tokens.append(Token("word", line[i:j], line_no, col))
                i = j
                continue
            raise ParseError(f"unexpected character {ch!r}", line_no, col)
    last_line = text.count("\n") + 1
    tokens.append(Token("eof", "", last_line, 1))
    return tokens


class _Parser:
    def __init__(self, text: str, catalog: Catalog):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.catalog = catalog

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect_punct(self, text: str) -> Token:
        tok = self.advance()
        if tok.kind != "punct" or tok.text != text:
            raise self.fail(f"expected {text!r}, got {tok.text!r}", tok)
        return tok

    def expect_keyword(self, text: str) -> Token:
        tok = self.advance()
        if tok.kind != "word" or tok.text != text:
            raise self.fail(f"expected {text!r}, got {tok.text!r}", tok)
        return tok

    def expect_identifier(self, what: str) -> Token:
        tok = self.advance()
        if tok.kind != "word":
            raise self.fail(f"expected {what}, got {tok.text!r}", tok)
        if tok.text in KEYWORDS:
            raise self.fail(f"expected {what}, got keyword {tok.text!r}", tok)
        return tok

    def parse_rulebase(self) -> RuleBase:
        rules: dict[str, ClinicalRule] = {}
        while self.peek().kind != "eof":
            rule = self.parse_rule()
            if rule.id in rules:
                raise ParseError(f"duplicate rule id {rule.id!r}")
            rules[rule.id] = rule
        return RuleBase(self.catalog, rules)

    def parse_rule(self) -> ClinicalRule:
        self.expect_keyword("rule")
        rule_id = self.expect_identifier("rule id").text
        self.expect_punct("{")

        slots: dict[str, set[str]] = {
            "c_present": set(), "d_present": set(), "c_absent": set(), "d_absent": set(),
        }
        any_of: list[AnyOf] = []
        seen: set[str] = set()
        action: Action | None = None

        while True:
            tok = self.peek()
            if tok.kind == "word" and tok.text in ("present", "absent"):
                self.advance()
                for cond_id, kind in self.parse_kindlist(rule_id, seen):
                    slot = ("c_" if kind.is_clinical else "d_") + tok.text
                    slots[slot].add(cond_id)
            elif tok.kind == "word" and tok.text == "any_of":
                self.advance()
                clin: set[str] = set()
                nonclin: set[str] = set()
                for cond_id, kind in self.parse_kindlist(rule_id, seen):
                    (clin if kind.is_clinical else nonclin).add(cond_id)
                any_of.append(AnyOf(frozenset(clin), frozenset(nonclin)))
            elif tok.kind == "word" and tok.text == "action":
                self.advance()
                action = self.parse_action()
                break
            else:
                raise self.fail(
                    f"expected 'present', 'absent', 'any_of' or 'action', got {tok.text!r}",
                    tok,
                )
        self.expect_punct("}")
        assert action is not None
        premise = Premise(
            frozenset(slots["c_present"]),
            frozenset(slots["d_present"]),
            frozenset(slots["c_absent"]),
            frozenset(slots["d_absent"]),
            tuple(any_of),
        )
        return ClinicalRule(rule_id, premise, action)

    def parse_kindlist(self, rule_id: str, seen: set[str]):
        """Yield (condition id, kind) pairs for one or more kind groups."""
        pairs: list[tuple[str, Kind]] = []
        tok = self.peek()
        if not (tok.kind == "word" and tok.text in KIND_KEYWORDS):
            raise self.fail(
                f"expected 'clinical', 'drug' or 'lab', got {tok.text!r}", tok
            )
        while True:
            tok = self.peek()
            if not (tok.kind == "word" and tok.text in KIND_KEYWORDS):
                break
            declared = KIND_KEYWORDS[self.advance().text]
            while True:
                id_tok = self.expect_identifier("condition id")
                cond_id = id_tok.text
                if cond_id not in self.catalog:
                    raise self.fail(f"unknown condition id {cond_id!r}", id_tok)
                actual = self.catalog.condition(cond_id).kind
                if actual is not declared:
                    raise self.fail(
                        f"condition {cond_id!r} is {actual.value}, "
                        f"declared {declared.value}",
                        id_tok,
                    )
                if cond_id in seen:
                    raise self.fail(
                        f"condition {cond_id!r} appears twice in rule {rule_id!r}",
                        id_tok,
                    )
                seen.add(cond_id)
                pairs.append((cond_id, declared))
                if self.peek().kind == "punct" and self.peek().text == ",":
                    self.advance()
                else:
                    break
        return pairs

    def parse_action(self) -> Action:
        tok = self.advance()
        if tok.kind == "word" and tok.text in ("start", "stop"):
            target_tok = self.expect_identifier("drug id")
            target = target_tok.text
            if target not in self.catalog:
                raise self.fail(f"unknown condition id {target!r}", target_tok)
            cond = self.catalog.condition(target)
            if cond.kind is not Kind.DRUG:
                raise self.fail(
                    f"action target {target!r} must be a drug, is {cond.kind.value}",
                    target_tok,
                )
            verb = Verb(tok.text)
            text = f"{tok.text.capitalize()} {cond.label or target}"
            return Action(verb, target, text)
        if tok.kind == "word" and tok.text == "custom":
            text_tok = self.advance()
            if text_tok.kind != "string":
                raise self.fail("expected quoted text after 'custom'", text_tok)
            return Action(Verb.CUSTOM, None, text_tok.text)
        raise self.fail(f"expected 'start', 'stop' or 'custom', got {tok.text!r}", tok)


def parse_rulebase(text: str, catalog: Catalog) -> RuleBase:
    """Parse rule DSL source into a RuleBase bound to the given catalog."""
    return _Parser(text, catalog).parse_rulebase()


def _format_kindlist(ids: frozenset[str], catalog: Catalog) -> str:
    groups = []
    for keyword, kind in KIND_KEYWORDS.items():
        members = sorted(i for i in ids if catalog.condition(i).kind is kind)
        if members:
            groups.append(f"{keyword} {', '.join(members)}")
    return " ".join(groups)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_rule(rule: ClinicalRule, catalog: Catalog) -> str:
    lines = [f"rule {rule.id} {{"]
    p = rule.premise
    if p.c_present or p.d_present:
        lines.append(f"  present {_format_kindlist(p.c_present | p.d_present, catalog)}")
    if p.c_absent or p.d_absent:
        lines.append(f"  absent {_format_kindlist(p.c_absent | p.d_absent, catalog)}")
    for group in p.any_of:
        lines.append(f"  any_of {_format_kindlist(group.members(), catalog)}")
    if rule.action.verb is Verb.CUSTOM:
        lines.append(f"  action custom {_quote(rule.action.text)}")
    else:
        lines.append(f"  action {rule.action.verb.value} {rule.action.target}")
    lines.append("}")
    return "\n".join(lines)


def print_rulebase(rb: RuleBase) -> str:
    """Canonical DSL rendering; parse(print(parse(text))) == parse(text)."""
    return "\n\n".join(print_rule(rule, rb.catalog) for rule in rb.rules.values()) + "\n"
