"""Independent oracles and random generators shared by the property suites.

Everything here is deliberately naive: brute-force assignment enumeration,
exhaustive replay checks.  The point is to validate the engine against code
that shares none of its search logic.
"""

from __future__ import annotations

import itertools
import random

from chasebound import (
    Atom,
    ChaseVariant,
    Constant,
    Derivation,
    KnowledgeBase,
    RuleSet,
    Substitution,
    Variable,
    derive_rule_metadata,
    deserialize_trace,
    restrict,
    run_breadth_first,
    serialize_trace,
    verify_derivation,
)
from chasebound.engine import HaltReason, breadth_first_completion

V = ChaseVariant


def brute_force_homomorphisms(source, target, frozen=frozenset()):
    """Enumerate every assignment of non-frozen source variables/nulls to
    target terms and keep those that map source into target."""
    source = frozenset(source)
    target = frozenset(target)
    movable = sorted({t for at in source for t in at.args
                      if not isinstance(t, Constant) and t not in frozen},
                     key=str)
    targets = sorted({t for at in target for t in at.args}, key=str)
    found = []
    for combo in itertools.product(targets, repeat=len(movable)):
        sub = Substitution(dict(zip(movable, combo)))
        if sub.apply(source) <= target:
            found.append(sub)
    return found


# -- random knowledge bases -----------------------------------------------------

_CONSTS = [Constant(n) for n in ("a", "b", "c")]
_VARS = ["X", "Y", "Z", "W"]


def random_kb(rng: random.Random, max_rules: int = 3, max_body: int = 2,
              max_initial: int = 3) -> KnowledgeBase:
    """A small KB: arity <= 2, shared vocabulary between facts and rules."""
    arity = {"p": rng.choice((1, 2)), "q": rng.choice((1, 2)),
             "r": rng.choice((1, 2))}
    preds = sorted(arity)

    def rand_atom(pool):
        pred = rng.choice(preds)
        return Atom(pred, tuple(rng.choice(pool) for _ in range(arity[pred])))

    rules = []
    for i in range(rng.randint(1, max_rules)):
        rule_id = f"G{i + 1}"
        variables = [Variable(v, rule_id) for v in _VARS]
        body_pool = variables[:3] + [_CONSTS[0]]
        body = {rand_atom(body_pool) for _ in range(rng.randint(1, max_body))}
        head_pool = variables + _CONSTS[:2]
        head = {rand_atom(head_pool) for _ in range(rng.randint(1, 2))}
        rules.append(derive_rule_metadata(rule_id, body, head))

    # Ground an instantiation of the first rule's body so the KB is never
    # inert; pad with random facts up to the initial-size limit.
    grounding = Substitution({v: rng.choice(_CONSTS)
                              for v in rules[0].body_vars})
    facts = set(grounding.apply(rules[0].body))
    while len(facts) < max_initial and rng.random() < 0.5:
        facts.add(rand_atom(_CONSTS))
    return KnowledgeBase(frozenset(facts), RuleSet(rules))


def random_datalog_kb(rng: random.Random) -> KnowledgeBase:
    """Like random_kb but heads reuse body variables only (no existentials)."""
    kb = random_kb(rng)
    rules = []
    for rule in kb.ruleset:
        pool = sorted(rule.body_vars, key=lambda v: v.name) or [_CONSTS[0]]
        fixes = {v: rng.choice(pool) for v in rule.existentials}
        head = Substitution(fixes).apply(rule.head)
        rules.append(derive_rule_metadata(rule.rule_id, rule.body, head))
    return KnowledgeBase(kb.factbase, RuleSet(rules))


def random_single_rule_set(rng: random.Random) -> RuleSet:
    """One rule over unary/binary predicates, used for decider cross-checks."""
    arity = {"p": rng.choice((1, 2)), "q": rng.choice((1, 2))}
    variables = [Variable(v, "G1") for v in _VARS]

    def rand_atom(pool):
        pred = rng.choice(sorted(arity))
        return Atom(pred, tuple(rng.choice(pool) for _ in range(arity[pred])))

    body = {rand_atom(variables[:3]) for _ in range(rng.randint(1, 2))}
    head = {rand_atom(variables)}
    return RuleSet([derive_rule_metadata("G1", body, head)])


# -- property checks -------------------------------------------------------------


def breadth_first_prefix(derivation: Derivation, max_rank: int) -> Derivation:
    """Replay only the steps of trigger rank <= max_rank; on a breadth-first
    run this prefix is breadth-first even when the run was cut by a cap."""
    out = Derivation.start(derivation.variant,
                           KnowledgeBase(derivation.initial, derivation.ruleset),
                           derivation.naming_mode)
    for step in derivation.steps:
        if step.trigger_rank <= max_rank:
            out = out.extend(step.trigger, check=False)
    return out


def check_ancestor_clue(derivation: Derivation) -> list[str]:
    """Lemma-style bound: a rank-k atom (or trigger) has at most b^k initial
    ancestors."""
    b = derivation.ruleset.b
    bad = []
    for at in derivation.factbase:
        rank = derivation.atom_rank(at)
        count = len(derivation.ancestors(at) & derivation.initial)
        if count > b ** rank:
            bad.append(f"atom {at}: {count} > {b}^{rank}")
    for step in derivation.steps:
        count = len(derivation.ancestors(step.trigger) & derivation.initial)
        if count > b ** step.trigger_rank:
            bad.append(f"trigger {step.trigger}: {count} > {b}^{step.trigger_rank}")
    return bad


def random_keep_subsets(rng: random.Random, initial, count: int = 2):
    atoms = sorted(initial, key=str)
    for _ in range(count):
        yield frozenset(at for at in atoms if rng.random() < 0.6)


def check_heredity(variant: ChaseVariant, derivation: Derivation,
                   keep) -> list[str]:
    restricted = restrict(derivation, keep)
    report = verify_derivation(variant, restricted)
    if not report.is_valid_variant_derivation:
        return [f"restriction not a {variant.value}-derivation: "
                f"{report.first_violation}"]
    return []


def check_consistent_heredity(variant: ChaseVariant, derivation: Derivation,
                              keep) -> list[str]:
    """Completion must be breadth-first and contain every retained trigger
    with its restriction rank preserved and within-rank order intact.

    The full subsequence property is required only when the restriction is
    itself rank-compatible: dropping an initial atom that a retained head
    re-produces can shift ranks non-uniformly, making the restriction of a
    breadth-first derivation non-rank-compatible, and then no breadth-first
    derivation can contain it in its original order (the completion contains
    its rank-sorted reordering instead).
    """
    restricted = restrict(derivation, keep)
    completed = breadth_first_completion(variant, restricted)
    bad = []
    report = verify_derivation(variant, completed)
    if not (report.is_valid_variant_derivation and report.is_breadth_first):
        bad.append(f"completion not breadth-first: {report.first_violation}")
    seq = completed.triggers()
    ranks = {s.trigger: s.trigger_rank for s in completed.steps}
    positions_by_rank: dict[int, list[int]] = {}
    positions = []
    for step in restricted.steps:
        if step.trigger not in seq:
            bad.append(f"retained trigger {step.trigger} dropped by completion")
            continue
        pos = seq.index(step.trigger)
        positions.append(pos)
        positions_by_rank.setdefault(step.trigger_rank, []).append(pos)
        if ranks[step.trigger] != step.trigger_rank:
            bad.append(f"trigger {step.trigger} changed rank "
                       f"{step.trigger_rank} -> {ranks[step.trigger]}")
    for rank, group in positions_by_rank.items():
        if group != sorted(group):
            bad.append(f"rank-{rank} retained triggers were reordered")
    restricted_ranks = [s.trigger_rank for s in restricted.steps]
    rank_compatible = all(restricted_ranks[i] <= restricted_ranks[i + 1]
                          for i in range(len(restricted_ranks) - 1))
    if rank_compatible and positions != sorted(positions):
        bad.append("restriction is not a subsequence of its completion")
    return bad


def check_trace_roundtrip(derivation: Derivation, halt) -> list[str]:
    text = serialize_trace(derivation, halt)
    replayed, halt2 = deserialize_trace(text)
    bad = []
    if serialize_trace(replayed, halt2) != text:
        bad.append("trace bytes differ after replay")
    if replayed.factbase != derivation.factbase:
        bad.append("factbase differs after replay")
    if any(replayed.atom_rank(at) != derivation.atom_rank(at)
           for at in derivation.factbase):
        bad.append("ranks differ after replay")
    return bad


def bounded_run(variant: ChaseVariant, kb: KnowledgeBase, depth_cap: int = 3,
                step_cap: int = 40):
    """A breadth-first derivation cut at a completed-rank boundary.

    Terminated runs come back whole.  A depth-capped run has completed ranks
    1..depth_cap (the cut drops the overflowing rank's no-op steps); a
    step-capped run stopped mid-rank, so the last started rank goes too.
    """
    res = run_breadth_first(variant, kb, depth_cap=depth_cap, step_cap=step_cap)
    if res.halt_reason is HaltReason.TERMINATED:
        return res.derivation, True
    last_rank = max((s.trigger_rank for s in res.derivation.steps), default=0)
    cut = depth_cap if res.halt_reason is HaltReason.DEPTH_CAP else last_rank - 1
    return breadth_first_prefix(res.derivation, cut), False
