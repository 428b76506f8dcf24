"""Existential rules, rulesets and knowledge bases with derived metadata."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import ChaseError, EmptyBodyError, EmptyHeadError
from .terms import (
    Atom,
    InitialNull,
    Null,
    Variable,
    constants_of,
    nulls_of,
    sorted_atoms,
    variables_of,
)


@dataclass(frozen=True)
class Rule:
    """A rule (B, H); frontier and existential variables are derived fields."""

    rule_id: str
    body: frozenset
    head: frozenset
    frontier: frozenset
    existentials: frozenset
    # Fixed ordering of the frontier (sorted by name); frontier keys rely on it.
    frontier_order: tuple[Variable, ...]
    body_vars: frozenset = frozenset()

    @property
    def is_datalog(self) -> bool:
        return not self.existentials

    def __str__(self) -> str:
        b = ", ".join(str(a) for a in sorted_atoms(self.body))
        h = ", ".join(str(a) for a in sorted_atoms(self.head))
        return f"[{self.rule_id}] {b} -> {h}."


def derive_rule_metadata(rule_id: str, body: Iterable[Atom], head: Iterable[Atom]) -> Rule:
    """Build a Rule, computing frontier = vars(B) ∩ vars(H) and
    existentials = vars(H) \\ vars(B)."""
    body = frozenset(body)
    head = frozenset(head)
    if not body:
        raise EmptyBodyError(f"rule {rule_id}: empty body")
    if not head:
        raise EmptyHeadError(f"rule {rule_id}: empty head")
    if nulls_of(body) or nulls_of(head):
        raise ChaseError(f"rule {rule_id}: rules must not contain nulls")
    body_vars = variables_of(body)
    head_vars = variables_of(head)
    frontier = body_vars & head_vars
    existentials = head_vars - body_vars
    order = tuple(sorted(frontier, key=lambda v: v.name))
    return Rule(rule_id, body, head, frontier, existentials, order, body_vars)


class RuleSet:
    """Ordered collection of rules plus derived vocabulary statistics."""

    def __init__(self, rules: Iterable[Rule]):
        self.rules: tuple[Rule, ...] = tuple(rules)
        ids = [r.rule_id for r in self.rules]
        if len(ids) != len(set(ids)):
            raise ChaseError("duplicate rule ids in ruleset")
        self._by_id = {r.rule_id: r for r in self.rules}
        self._index = {r.rule_id: i for i, r in enumerate(self.rules)}
        # b >= 1 even for an empty ruleset so size bounds stay well defined.
        self.b: int = max((len(r.body) for r in self.rules), default=1)
        self.body_predicates: frozenset = frozenset(
            a.predicate for r in self.rules for a in r.body)
        self.rule_constants: frozenset = frozenset(
            c for r in self.rules for c in constants_of(r.body) | constants_of(r.head))
        self.is_datalog: bool = all(r.is_datalog for r in self.rules)
        self.max_arity: int = max(
            (a.arity for r in self.rules for a in r.body | r.head), default=1)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def index_of(self, rule_id: str) -> int:
        return self._index[rule_id]

    def arities(self) -> dict[str, int]:
        """First-seen arity per predicate over all rule atoms."""
        seen: dict[str, int] = {}
        for r in self.rules:
            for a in sorted_atoms(r.body) + sorted_atoms(r.head):
                seen.setdefault(a.predicate, a.arity)
        return seen


def ruleset_stats(rs: RuleSet) -> tuple[int, frozenset, frozenset]:
    """Recompute (b, body_predicates, rule_constants) from scratch."""
    b = max((len(r.body) for r in rs.rules), default=1)
    preds = frozenset(a.predicate for r in rs.rules for a in r.body)
    consts = frozenset(c for r in rs.rules
                       for c in constants_of(r.body) | constants_of(r.head))
    return b, preds, consts


@dataclass(frozen=True)
class KnowledgeBase:
    factbase: frozenset
    ruleset: RuleSet


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "info"
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self) -> str:
        loc = f"{self.line}:{self.column}: " if self.line is not None else ""
        return f"{loc}{self.severity}: {self.message}"


def validate_kb(kb: KnowledgeBase) -> list[Diagnostic]:
    """Structural diagnostics; an empty list means the KB is well formed."""
    out: list[Diagnostic] = []
    arity: dict[str, int] = {}

    def check_atom(a: Atom, where: str) -> None:
        known = arity.setdefault(a.predicate, a.arity)
        if known != a.arity:
            out.append(Diagnostic(
                "error",
                f"predicate {a.predicate} used with arity {a.arity} in {where} "
                f"but with arity {known} elsewhere"))

    for r in kb.ruleset:
        for a in sorted_atoms(r.body) + sorted_atoms(r.head):
            check_atom(a, f"rule {r.rule_id}")
    for a in sorted_atoms(kb.factbase):
        check_atom(a, "factbase")
        for t in a.args:
            if isinstance(t, Variable):
                out.append(Diagnostic(
                    "error", f"factbase atom {a} contains a variable; "
                             f"use an initial null (_:name) instead"))
            elif isinstance(t, Null) and not isinstance(t.provenance, InitialNull):
                out.append(Diagnostic(
                    "error", f"factbase atom {a} contains a non-initial null"))

    seen_names: dict[str, str] = {}
    for r in kb.ruleset:
        for v in sorted(variables_of(r.body | r.head), key=lambda v: v.name):
            if v.name in seen_names and seen_names[v.name] != r.rule_id:
                out.append(Diagnostic(
                    "info",
                    f"variable {v.name} reused by rules {seen_names[v.name]} "
                    f"and {r.rule_id}; namespaces are kept disjoint internally"))
            else:
                seen_names.setdefault(v.name, r.rule_id)
    return out
