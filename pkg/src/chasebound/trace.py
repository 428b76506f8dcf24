"""Versioned trace documents: serialize a derivation, replay it bit-exactly.

Traces are human-readable JSON with sorted keys.  Replay rebuilds the
derivation from the recorded triggers alone and cross-checks every recorded
step (produced atoms, rank, factbase size); any mismatch is a corruption
signal and raises ReplayFailureError.  Witness files produced by the decider
are trace documents with a few extra keys, so they replay the same way.
"""

from __future__ import annotations

import json
from typing import Optional

from .engine import (
    ChaseResult,
    ChaseVariant,
    Derivation,
    HaltReason,
    NamingMode,
    Trigger,
)
from .errors import ReplayFailureError, VersionMismatchError
from .parser import parse_atom, parse_kb, parse_term, serialize_rule
from .rules import KnowledgeBase
from .terms import Substitution, Variable, sorted_atoms

TRACE_FORMAT_VERSION = 1


def trace_document(derivation: Derivation,
                   halt_reason: Optional[HaltReason] = None) -> dict:
    doc = {
        "format_version": TRACE_FORMAT_VERSION,
        "variant": derivation.variant.value,
        "naming_mode": derivation.naming_mode.value,
        "halt_reason": halt_reason.value if halt_reason else None,
        "rules": [serialize_rule(r) for r in derivation.ruleset],
        "initial": [str(a) for a in sorted_atoms(derivation.initial)],
        "steps": [
            {
                "rule": s.trigger.rule_id,
                "substitution": {str(v): str(t) for v, t in s.trigger.pi.items()},
                "produced": [str(a) for a in sorted_atoms(s.produced)],
                "trigger_rank": s.trigger_rank,
                "factbase_size": s.resulting_factbase_size,
            }
            for s in derivation.steps
        ],
    }
    return doc


def serialize_trace(derivation: Derivation,
                    halt_reason: Optional[HaltReason] = None) -> str:
    return json.dumps(trace_document(derivation, halt_reason),
                      indent=2, sort_keys=True) + "\n"


def _parse_ruleset_and_initial(doc: dict) -> KnowledgeBase:
    source = "\n".join(f"{a}." for a in doc["initial"])
    source += "\n" + "\n".join(doc["rules"])
    result = parse_kb(source)
    if not result.ok:
        problems = "; ".join(str(d) for d in result.diagnostics)
        raise ReplayFailureError(f"trace ruleset/initial do not parse: {problems}")
    return result.kb


def deserialize_trace(text: str) -> tuple[Derivation, Optional[HaltReason]]:
    """Replay a trace document into a Derivation; bit-exact or it raises."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReplayFailureError(f"trace is not valid JSON: {exc}")
    version = doc.get("format_version")
    if version != TRACE_FORMAT_VERSION:
        raise VersionMismatchError(
            f"trace format version {version!r}, expected {TRACE_FORMAT_VERSION}")
    kb = _parse_ruleset_and_initial(doc)
    variant = ChaseVariant(doc["variant"])
    naming = NamingMode(doc["naming_mode"])
    d = Derivation.start(variant, kb, naming)
    for i, step in enumerate(doc["steps"], start=1):
        rule_id = step["rule"]
        try:
            rule = kb.ruleset[rule_id]
        except KeyError:
            raise ReplayFailureError(f"step {i}: unknown rule {rule_id}")
        mapping = {}
        for name, term_text in step["substitution"].items():
            mapping[Variable(name, rule_id)] = parse_term(term_text)
        trigger = Trigger(rule_id, Substitution(mapping))
        if trigger.pi.domain() != rule.body_vars:
            raise ReplayFailureError(
                f"step {i}: substitution does not cover vars(body) of {rule_id}")
        if not trigger.pi.apply(rule.body) <= d.factbase:
            raise ReplayFailureError(
                f"step {i}: trigger body does not embed into the factbase")
        if trigger in d.applied:
            raise ReplayFailureError(f"step {i}: duplicate trigger")
        d = d.extend(trigger, check=False)
        new = d.steps[-1]
        produced = {str(a) for a in new.produced}
        if produced != set(step["produced"]):
            raise ReplayFailureError(
                f"step {i}: produced atoms diverge from the recorded ones")
        if new.trigger_rank != step["trigger_rank"]:
            raise ReplayFailureError(
                f"step {i}: trigger rank {new.trigger_rank} != recorded "
                f"{step['trigger_rank']}")
        if new.resulting_factbase_size != step["factbase_size"]:
            raise ReplayFailureError(f"step {i}: factbase size diverges")
    halt = HaltReason(doc["halt_reason"]) if doc.get("halt_reason") else None
    return d, halt


def serialize_result(result: ChaseResult) -> str:
    return serialize_trace(result.derivation, result.halt_reason)


def witness_document(variant: ChaseVariant, k: int, bound_mode: str,
                     witness) -> dict:
    doc = trace_document(witness.derivation)
    doc.update({
        "kind": "witness",
        "k": k,
        "bound_mode": bound_mode,
        "offending_atom": str(witness.offending_atom),
        "minimized_factbase": [str(a) for a in sorted_atoms(witness.minimized_factbase)],
    })
    return doc


def serialize_witness(variant: ChaseVariant, k: int, bound_mode: str, witness) -> str:
    return json.dumps(witness_document(variant, k, bound_mode, witness),
                      indent=2, sort_keys=True) + "\n"


def load_keep_atoms(text: str) -> frozenset:
    """Parse a comma-separated atom list in source syntax (for --keep)."""
    parts = [p.strip() for p in text.split(",")]
    # Atom arguments contain commas too: re-join fragments until parens balance.
    atoms = []
    buffer = ""
    for part in parts:
        buffer = f"{buffer},{part}" if buffer else part
        if buffer.count("(") == buffer.count(")"):
            atoms.append(parse_atom(buffer))
            buffer = ""
    if buffer:
        atoms.append(parse_atom(buffer))
    return frozenset(atoms)
