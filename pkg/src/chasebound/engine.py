"""Triggers, derivations and the four chase variants.

A Derivation is an immutable value: ``extend`` returns a new one, so search
procedures can branch freely without copying state by hand.  Atom ranks are
fixed at first production; depth is the maximal atom rank, so a datalog step
whose products already exist never increases depth.

Null naming follows the derivation's naming mode: trigger-keyed nulls for the
oblivious/restricted/equivalent chases, frontier-keyed nulls for the
semi-oblivious chase (frontier-equal triggers then produce identical atoms).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Union

from .budget import Budget
from .errors import (
    ChaseError,
    InternalVerificationError,
    KeepNotSubsetError,
    NotApplicableError,
    UnknownTargetError,
    UnknownTriggerError,
    VariantUnsupportedError,
)
from .homomorphism import all_homomorphisms, find_homomorphism
from .rules import KnowledgeBase, Rule, RuleSet
from .terms import (
    Atom,
    FrontierKey,
    GeneratedNull,
    Null,
    Substitution,
    TriggerKey,
    term_sort_key,
)


class ChaseVariant(str, Enum):
    OBLIVIOUS = "o"
    SEMI_OBLIVIOUS = "so"
    RESTRICTED = "r"
    EQUIVALENT = "e"


class NamingMode(str, Enum):
    TRIGGER = "trigger"
    FRONTIER = "frontier"


def default_naming(variant: ChaseVariant) -> NamingMode:
    return NamingMode.FRONTIER if variant is ChaseVariant.SEMI_OBLIVIOUS else NamingMode.TRIGGER


class HaltReason(str, Enum):
    TERMINATED = "terminated"
    DEPTH_CAP = "depth_cap"
    STEP_CAP = "step_cap"


@dataclass(frozen=True)
class Trigger:
    rule_id: str
    pi: Substitution

    def __str__(self) -> str:
        return f"({self.rule_id},{self.pi})"


def trigger_sort_key(rs: RuleSet, t: Trigger) -> tuple:
    return (rs.index_of(t.rule_id),
            tuple((term_sort_key(k), term_sort_key(v)) for k, v in t.pi.items()))


def frontier_image(rule: Rule, pi: Substitution) -> tuple:
    return tuple(pi.apply_term(v) for v in rule.frontier_order)


def safe_extension(trigger: Trigger, rule: Rule, naming_mode: NamingMode) -> Substitution:
    """Extend the trigger's substitution, mapping each existential variable to
    a deterministic fresh null keyed by the trigger (or its frontier image)."""
    if naming_mode is NamingMode.TRIGGER:
        key: Union[TriggerKey, FrontierKey] = TriggerKey(
            tuple(sorted(((v.name, t) for v, t in trigger.pi.items()))))
    else:
        key = FrontierKey(frontier_image(rule, trigger.pi))
    fresh = {z: Null(GeneratedNull(rule.rule_id, key, z.name))
             for z in sorted(rule.existentials, key=lambda v: v.name)}
    return trigger.pi.extended(fresh)


@dataclass(frozen=True)
class DerivationStep:
    trigger: Trigger
    produced: frozenset  # genuinely new atoms only (may be empty)
    resulting_factbase_size: int
    trigger_rank: int


class Derivation:
    """One chase derivation with full rank and ancestor bookkeeping."""

    __slots__ = ("variant", "ruleset", "naming_mode", "initial", "steps",
                 "factbase", "_rank", "_parents", "_producer", "applied",
                 "_frontier_seen")

    def __init__(self, variant: ChaseVariant, ruleset: RuleSet, naming_mode: NamingMode,
                 initial: frozenset, steps: tuple, factbase: frozenset,
                 rank: dict, parents: dict, producer: dict,
                 applied: frozenset, frontier_seen: frozenset):
        self.variant = variant
        self.ruleset = ruleset
        self.naming_mode = naming_mode
        self.initial = initial
        self.steps = steps
        self.factbase = factbase
        self._rank = rank
        self._parents = parents
        self._producer = producer
        self.applied = applied
        self._frontier_seen = frontier_seen

    @classmethod
    def start(cls, variant: ChaseVariant, kb: KnowledgeBase,
              naming_mode: Optional[NamingMode] = None) -> "Derivation":
        naming = naming_mode or default_naming(variant)
        initial = frozenset(kb.factbase)
        return cls(variant, kb.ruleset, naming, initial, (), initial,
                   {a: 0 for a in initial}, {}, {}, frozenset(), frozenset())

    # -- queries ----------------------------------------------------------

    def atom_rank(self, a: Atom) -> int:
        try:
            return self._rank[a]
        except KeyError:
            raise UnknownTargetError(f"atom {a} does not occur in the derivation")

    def trigger_rank_of(self, trigger: Trigger) -> int:
        rule = self._rule(trigger)
        image = trigger.pi.apply(rule.body)
        if not image <= self.factbase:
            raise UnknownTriggerError(
                f"trigger {trigger} body does not embed into the factbase")
        return 1 + max(self._rank[a] for a in image)

    def depth(self) -> int:
        return max(self._rank.values(), default=0)

    def triggers(self) -> tuple:
        return tuple(s.trigger for s in self.steps)

    def producer_of(self, a: Atom) -> Optional[Trigger]:
        return self._producer.get(a)

    def ancestors(self, target: Union[Atom, Trigger]) -> frozenset:
        """Transitive closure of the direct-ancestor relation.

        For an atom the result excludes the atom itself (initial atoms have no
        ancestors); for a trigger it is the trigger's body image together with
        that image's ancestors, which is the atom set a restriction needs to
        replay the trigger.
        """
        if isinstance(target, Trigger):
            if target not in self.applied:
                raise UnknownTargetError(f"trigger {target} is not part of the derivation")
            rule = self._rule(target)
            base = target.pi.apply(rule.body)
            collected = set(base)
        else:
            if target not in self.factbase:
                raise UnknownTargetError(f"atom {target} does not occur in the derivation")
            base = self._parents.get(target, frozenset())
            collected = set(base)
        frontier = list(base)
        while frontier:
            a = frontier.pop()
            for p in self._parents.get(a, ()):
                if p not in collected:
                    collected.add(p)
                    frontier.append(p)
        return frozenset(collected)

    def trigger_ancestors(self, target: Trigger) -> frozenset:
        """Direct-ancestor closure at the trigger level."""
        if target not in self.applied:
            raise UnknownTargetError(f"trigger {target} is not part of the derivation")
        produced_by = self._producer
        rule_of = self._rule

        def parents(t: Trigger) -> set:
            image = t.pi.apply(rule_of(t).body)
            return {produced_by[a] for a in image if a in produced_by}

        collected: set = set()
        frontier = list(parents(target))
        while frontier:
            t = frontier.pop()
            if t in collected:
                continue
            collected.add(t)
            frontier.extend(parents(t))
        return frozenset(collected)

    def _rule(self, trigger: Trigger) -> Rule:
        try:
            return self.ruleset[trigger.rule_id]
        except KeyError:
            raise UnknownTriggerError(f"unknown rule id {trigger.rule_id}")

    # -- construction ------------------------------------------------------

    def head_image(self, trigger: Trigger) -> frozenset:
        rule = self._rule(trigger)
        return safe_extension(trigger, rule, self.naming_mode).apply(rule.head)

    def produced_preview(self, trigger: Trigger) -> frozenset:
        return self.head_image(trigger) - self.factbase

    def extend(self, trigger: Trigger, check: bool = True) -> "Derivation":
        """Append one immediate derivation step.

        With ``check`` the variant's applicability condition is enforced
        (NotApplicableError otherwise); restriction replay disables it because
        a restriction is a plain derivation that may violate the condition.
        """
        if check and not is_applicable(self.variant, self, trigger):
            raise NotApplicableError(f"trigger {trigger} is not "
                                     f"{self.variant.value}-applicable")
        rule = self._rule(trigger)
        body_image = trigger.pi.apply(rule.body)
        if not body_image <= self.factbase:
            raise UnknownTriggerError(
                f"trigger {trigger} body does not embed into the factbase")
        if trigger in self.applied:
            raise NotApplicableError(f"trigger {trigger} already applied")
        head = safe_extension(trigger, rule, self.naming_mode).apply(rule.head)
        produced = frozenset(head - self.factbase)
        trank = 1 + max(self._rank[a] for a in body_image)

        factbase = self.factbase | produced
        rank = dict(self._rank)
        parents = dict(self._parents)
        producer = dict(self._producer)
        for a in produced:
            rank[a] = trank
            parents[a] = body_image
            producer[a] = trigger
        step = DerivationStep(trigger, produced, len(factbase), trank)
        frontier_seen = self._frontier_seen | {
            (rule.rule_id, frontier_image(rule, trigger.pi))}
        return Derivation(self.variant, self.ruleset, self.naming_mode,
                          self.initial, self.steps + (step,), factbase,
                          rank, parents, producer,
                          self.applied | {trigger}, frontier_seen)

    def has_frontier_equal(self, rule: Rule, pi: Substitution) -> bool:
        return (rule.rule_id, frontier_image(rule, pi)) in self._frontier_seen


# -- trigger enumeration and applicability ---------------------------------


def enumerate_triggers(factbase: frozenset, rs: RuleSet) -> list[Trigger]:
    """All triggers of all rules on the factbase, in a deterministic order."""
    return list(_enumerate_triggers_cached(factbase, rs))


@lru_cache(maxsize=256)
def _enumerate_triggers_cached(factbase: frozenset, rs: RuleSet) -> tuple:
    # RuleSet instances hash by identity, which is exactly the reuse pattern
    # of search loops re-scanning the same factbase.
    out: list[Trigger] = []
    for rule in rs:
        for pi in all_homomorphisms(rule.body, factbase):
            out.append(Trigger(rule.rule_id, pi))
    return tuple(out)


def is_applicable(variant: ChaseVariant, derivation: Derivation,
                  trigger: Trigger) -> bool:
    """Definition of O/SO/R/E-applicability of a trigger on a derivation.

    Raises UnknownTriggerError when the substitution is not a homomorphism of
    the rule body into the current factbase; returns False for a trigger the
    derivation already contains (it cannot extend the derivation).
    """
    rule = derivation._rule(trigger)
    if trigger.pi.domain() != rule.body_vars:
        raise UnknownTriggerError(
            f"substitution domain differs from vars(body) for rule {rule.rule_id}")
    body_image = trigger.pi.apply(rule.body)
    if not body_image <= derivation.factbase:
        raise UnknownTriggerError(
            f"trigger {trigger} body does not embed into the factbase")
    if trigger in derivation.applied:
        return False

    if variant is ChaseVariant.OBLIVIOUS:
        return True

    if variant is ChaseVariant.SEMI_OBLIVIOUS:
        return not derivation.has_frontier_equal(rule, trigger.pi)

    extension = safe_extension(trigger, rule, derivation.naming_mode)
    head = extension.apply(rule.head)

    if variant is ChaseVariant.RESTRICTED:
        if rule.is_datalog:
            # The only candidate extension is the substitution itself.
            return not head <= derivation.factbase
        # Only the fresh nulls of the head image may move; everything else
        # (frontier images, head constants) stays put.
        fresh = frozenset(extension.apply_term(z) for z in rule.existentials)
        frozen = frozenset(t for a in head for t in a.args) - fresh
        return find_homomorphism(head, derivation.factbase, frozen) is None

    # Equivalent chase: the extension must not fold back onto the factbase.
    # All nulls (including the factbase's own) may move; constants may not.
    if head <= derivation.factbase:
        return False
    extended = derivation.factbase | head
    return find_homomorphism(extended, derivation.factbase) is None


def extend(derivation: Derivation, trigger: Trigger) -> Derivation:
    return derivation.extend(trigger, check=True)


def depth(derivation: Derivation) -> int:
    return derivation.depth()


def ancestors(derivation: Derivation, target: Union[Atom, Trigger]) -> frozenset:
    return derivation.ancestors(target)


# -- restriction, verification, completion ----------------------------------


def restrict(derivation: Derivation, keep: frozenset) -> Derivation:
    """Restriction of the derivation induced by ``keep`` ⊆ initial.

    Greedy left-to-right replay: a trigger is retained iff its body embeds in
    the factbase grown from ``keep`` so far; retained triggers keep their
    relative order.  The result is a plain derivation; for the oblivious,
    semi-oblivious and restricted chases it is again a derivation of the same
    variant (heredity), for the equivalent chase it may not be.
    """
    keep = frozenset(keep)
    if not keep <= derivation.initial:
        raise KeepNotSubsetError("keep must be a subset of the initial factbase")
    out = Derivation.start(derivation.variant,
                           KnowledgeBase(keep, derivation.ruleset),
                           derivation.naming_mode)
    for step in derivation.steps:
        rule = out._rule(step.trigger)
        if step.trigger.pi.apply(rule.body) <= out.factbase:
            out = out.extend(step.trigger, check=False)
    return out


@dataclass(frozen=True)
class VerifyReport:
    is_valid_variant_derivation: bool
    is_rank_compatible: bool
    is_rank_exhaustive: bool
    is_terminating: bool
    first_violation: Optional[str] = None

    @property
    def is_breadth_first(self) -> bool:
        return self.is_rank_compatible and self.is_rank_exhaustive

    def all_ok(self) -> bool:
        return (self.is_valid_variant_derivation and self.is_rank_compatible
                and self.is_rank_exhaustive and self.is_terminating)


def _applicable_new_triggers(variant: ChaseVariant, d: Derivation) -> list[tuple[int, Trigger]]:
    out = []
    for t in enumerate_triggers(d.factbase, d.ruleset):
        if t in d.applied:
            continue
        if is_applicable(variant, d, t):
            out.append((d.trigger_rank_of(t), t))
    return out


def _rank_candidates(variant: ChaseVariant, d: Derivation) -> tuple[Optional[int], list[Trigger]]:
    """Smallest trigger rank with an applicable trigger left, together with
    ALL unapplied triggers of that rank (applicable or not right now), sorted
    canonically.  (None, []) when nothing is applicable at any rank."""
    by_rank: dict[int, list[Trigger]] = {}
    for t in enumerate_triggers(d.factbase, d.ruleset):
        if t in d.applied:
            continue
        by_rank.setdefault(d.trigger_rank_of(t), []).append(t)
    for rank in sorted(by_rank):
        group = sorted(by_rank[rank], key=lambda t: trigger_sort_key(d.ruleset, t))
        if any(is_applicable(variant, d, t) for t in group):
            return rank, group
    return None, []


def verify_derivation(variant: ChaseVariant, derivation: Derivation) -> VerifyReport:
    """Full replay re-checking applicability, rank compatibility, rank
    exhaustiveness at every last-step-of-rank boundary, and termination."""
    violations: list[str] = []
    valid = True
    replay = Derivation.start(variant,
                              KnowledgeBase(derivation.initial, derivation.ruleset),
                              derivation.naming_mode)
    prefixes: list[Derivation] = []
    for i, step in enumerate(derivation.steps):
        try:
            ok = is_applicable(variant, replay, step.trigger)
        except UnknownTriggerError as exc:
            return VerifyReport(False, False, False, False,
                                f"step {i + 1}: {exc}")
        if not ok:
            valid = False
            violations.append(
                f"step {i + 1}: trigger {step.trigger} is not "
                f"{variant.value}-applicable")
        replay = replay.extend(step.trigger, check=False)
        prefixes.append(replay)

    ranks = [s.trigger_rank for s in replay.steps]
    rank_compatible = all(ranks[i] <= ranks[i + 1] for i in range(len(ranks) - 1))
    if not rank_compatible:
        bad = next(i for i in range(len(ranks) - 1) if ranks[i] > ranks[i + 1])
        violations.append(
            f"step {bad + 2}: trigger rank {ranks[bad + 1]} after rank {ranks[bad]}")

    rank_exhaustive = True
    for i, prefix in enumerate(prefixes):
        is_boundary = i == len(prefixes) - 1 or ranks[i + 1] != ranks[i]
        if not is_boundary:
            continue
        k = ranks[i]
        for rank, t in _applicable_new_triggers(variant, prefix):
            if rank != k + 1:
                rank_exhaustive = False
                violations.append(
                    f"after step {i + 1} (last of rank {k}): trigger {t} of "
                    f"rank {rank} is still {variant.value}-applicable")
                break
        if not rank_exhaustive:
            break

    terminating = not _applicable_new_triggers(variant, replay)
    return VerifyReport(valid, rank_compatible, rank_exhaustive, terminating,
                        violations[0] if violations else None)


def breadth_first_completion(variant: ChaseVariant, restricted: Derivation) -> Derivation:
    """Breadth-first completion of a restriction of a breadth-first derivation.

    Rank by rank: replay the retained triggers of that rank that are still
    applicable, then append every other applicable trigger of that rank in
    deterministic order.  For the oblivious, semi-oblivious and restricted
    chases the result is a breadth-first derivation containing every retained
    trigger with its rank unchanged; the retained triggers appear rank-sorted,
    which is the restriction's own order whenever that order is
    rank-compatible.  (It need not be: a restriction that re-derives a dropped
    initial atom can shift ranks non-uniformly.)
    """
    if variant is ChaseVariant.EQUIVALENT:
        raise VariantUnsupportedError(
            "the equivalent chase is not consistently hereditary; "
            "no completion is defined")
    rs = restricted.ruleset
    out = Derivation.start(variant, KnowledgeBase(restricted.initial, rs),
                           restricted.naming_mode)
    max_rank = max((s.trigger_rank for s in restricted.steps), default=0)
    for kappa in range(1, max_rank + 1):
        for step in restricted.steps:
            if step.trigger_rank != kappa or step.trigger in out.applied:
                continue
            if is_applicable(variant, out, step.trigger):
                out = out.extend(step.trigger, check=False)
        # Candidates of this rank are fixed once the previous rank is done;
        # re-check before each application since order matters for R.
        candidates = [t for t in enumerate_triggers(out.factbase, rs)
                      if t not in out.applied and out.trigger_rank_of(t) == kappa]
        candidates.sort(key=lambda t: trigger_sort_key(rs, t))
        progress = True
        while progress:
            progress = False
            for t in candidates:
                if t in out.applied:
                    continue
                if is_applicable(variant, out, t):
                    out = out.extend(t, check=False)
                    progress = True
    return out


# -- breadth-first runner and enumeration -----------------------------------


@dataclass(frozen=True)
class ChaseResult:
    derivation: Derivation
    halt_reason: HaltReason


def run_breadth_first(variant: ChaseVariant, kb: KnowledgeBase,
                      policy: str = "det", seed: Optional[int] = None,
                      depth_cap: int = 1_000_000, step_cap: int = 1_000_000,
                      naming_mode: Optional[NamingMode] = None) -> ChaseResult:
    """Build one breadth-first derivation.

    Triggers of the current rank are applied in policy order (deterministic or
    seeded-random), re-checking applicability before each application; the
    rank advances once exhausted.  Halts with DEPTH_CAP the moment a new atom
    of rank depth_cap+1 would be created, with STEP_CAP when one more step
    would exceed the step budget.
    """
    if depth_cap < 1 or step_cap < 1:
        raise ChaseError("caps must be >= 1")
    rng = random.Random(seed) if policy == "random" else None
    d = Derivation.start(variant, kb, naming_mode)
    while True:
        kappa, candidates = _rank_candidates(variant, d)
        if kappa is None:
            return ChaseResult(d, HaltReason.TERMINATED)
        if rng is not None:
            rng.shuffle(candidates)
        # Applicability is re-evaluated per pick: order matters for R/E, and
        # an equivalent-chase trigger may even wake back up within a rank.
        while True:
            pick = None
            for t in candidates:
                if t not in d.applied and is_applicable(variant, d, t):
                    pick = t
                    break
            if pick is None:
                break
            if len(d.steps) >= step_cap:
                return ChaseResult(d, HaltReason.STEP_CAP)
            if kappa > depth_cap and d.produced_preview(pick):
                return ChaseResult(d, HaltReason.DEPTH_CAP)
            d = d.extend(pick, check=False)


def enumerate_breadth_first_derivations(
        variant: ChaseVariant, kb: KnowledgeBase, depth_target: int,
        budget: Optional[Budget] = None, dedup_states: bool = False,
        naming_mode: Optional[NamingMode] = None) -> Iterator[Derivation]:
    """Depth-first search over per-rank trigger orderings.

    Yields each branch when it either terminates or creates a new atom of rank
    ``depth_target`` (the branch stops right there).  For the oblivious and
    semi-oblivious chases the within-rank order does not affect the resulting
    factbase, so a single canonical order is explored; the same holds for the
    restricted chase on a datalog ruleset (every product of a rank's candidate
    ends up in the factbase whatever the order).  Otherwise all within-rank
    orders are explored, optionally pruned by already-visited trigger sets.
    """
    if depth_target < 1:
        raise ChaseError("depth_target must be >= 1")
    rs = kb.ruleset
    branch_orders = variant in (ChaseVariant.RESTRICTED, ChaseVariant.EQUIVALENT) \
        and not (variant is ChaseVariant.RESTRICTED and rs.is_datalog)
    budget = budget or Budget()
    seen: set = set()

    def explore(d: Derivation, kappa: Optional[int],
                candidates: list[Trigger]) -> Iterator[Derivation]:
        budget.spend_step()
        apps = [t for t in candidates
                if t not in d.applied and is_applicable(variant, d, t)]
        if not apps:
            # Rank exhausted: move to the next rank with applicable triggers.
            kappa2, candidates2 = _rank_candidates(variant, d)
            if kappa2 is None:
                yield d
                return
            yield from explore(d, kappa2, candidates2)
            return
        choices = apps if branch_orders else apps[:1]
        for t in choices:
            d2 = d.extend(t, check=False)
            if dedup_states:
                key = d2.applied
                if key in seen:
                    continue
                seen.add(key)
            if kappa is not None and kappa >= depth_target and d2.steps[-1].produced:
                yield d2
            else:
                yield from explore(d2, kappa, candidates)

    yield from explore(Derivation.start(variant, kb, naming_mode), None, [])


def run_random_exhaustive(variant: ChaseVariant, kb: KnowledgeBase,
                          seed: int, step_cap: int = 200,
                          naming_mode: Optional[NamingMode] = None) -> ChaseResult:
    """Fair random-order run: picks any applicable trigger, not rank-first.

    A run that stops because nothing is applicable is exhaustive, hence
    terminating; useful for exercising the reordering propositions.
    """
    rng = random.Random(seed)
    d = Derivation.start(variant, kb, naming_mode)
    while len(d.steps) < step_cap:
        apps = [t for _, t in _applicable_new_triggers(variant, d)]
        if not apps:
            return ChaseResult(d, HaltReason.TERMINATED)
        d = d.extend(rng.choice(apps), check=False)
    return ChaseResult(d, HaltReason.STEP_CAP)


# -- reordering constructions ------------------------------------------------


def _replay(derivation: Derivation, order: Iterable[Trigger],
            check_variant: Optional[ChaseVariant]) -> Derivation:
    out = Derivation.start(derivation.variant,
                           KnowledgeBase(derivation.initial, derivation.ruleset),
                           derivation.naming_mode)
    for t in order:
        if check_variant is not None and not is_applicable(check_variant, out, t):
            continue
        out = out.extend(t, check=False)
    return out


def rank_sort(derivation: Derivation) -> Derivation:
    """Stable-sort the triggers by rank and replay, iterating until the order
    is a fixpoint.  For a terminating oblivious derivation the result is a
    breadth-first terminating derivation of smaller or equal depth."""
    order = list(derivation.triggers())
    ranks = {s.trigger: s.trigger_rank for s in derivation.steps}
    for _ in range(5 * len(order) + 5):
        order2 = sorted(order, key=lambda t: ranks[t])
        replayed = _replay(derivation, order2, check_variant=None)
        ranks = {s.trigger: s.trigger_rank for s in replayed.steps}
        if order2 == order:
            return replayed
        order = order2
    raise InternalVerificationError("rank_sort did not reach a fixpoint")


def rank_sort_restricted(derivation: Derivation) -> Derivation:
    """Rank-sort a terminating restricted-chase derivation and replay with
    applicability re-checks, dropping triggers that became redundant; yields a
    terminating rank-compatible restricted derivation."""
    ranks = {s.trigger: s.trigger_rank for s in derivation.steps}
    order = list(derivation.triggers())
    for _ in range(10 + len(order)):
        order2 = sorted(order, key=lambda t: ranks[t])
        replayed = _replay(derivation, order2, check_variant=ChaseVariant.RESTRICTED)
        new_ranks = [s.trigger_rank for s in replayed.steps]
        if all(new_ranks[i] <= new_ranks[i + 1] for i in range(len(new_ranks) - 1)):
            return replayed
        ranks.update({s.trigger: s.trigger_rank for s in replayed.steps})
        order = order2
    raise InternalVerificationError("rank_sort_restricted did not stabilize")


def so_breadth_first_from(derivation: Derivation) -> Derivation:
    """Breadth-first reordering of a terminating semi-oblivious derivation by
    frontier-equal replacement.

    Layer by layer, each remaining trigger is swapped for a frontier-equal
    trigger applicable on the part already rebuilt; frontier-keyed nulls make
    the replacement produce exactly the same atoms.
    """
    if derivation.naming_mode is not NamingMode.FRONTIER:
        raise ChaseError("frontier-equal replacement requires frontier naming")
    rs = derivation.ruleset
    bf = Derivation.start(ChaseVariant.SEMI_OBLIVIOUS,
                          KnowledgeBase(derivation.initial, rs),
                          NamingMode.FRONTIER)
    remaining = list(derivation.triggers())
    while remaining:
        layer: list[tuple[Trigger, Trigger]] = []
        for t in remaining:
            rule = rs[t.rule_id]
            want = frontier_image(rule, t.pi)
            for pi2 in all_homomorphisms(rule.body, bf.factbase):
                cand = Trigger(t.rule_id, pi2)
                if frontier_image(rule, pi2) == want and \
                        is_applicable(ChaseVariant.SEMI_OBLIVIOUS, bf, cand):
                    layer.append((t, cand))
                    break
        if not layer:
            break
        for orig, cand in layer:
            if is_applicable(ChaseVariant.SEMI_OBLIVIOUS, bf, cand):
                bf = bf.extend(cand, check=False)
        done = {orig for orig, _ in layer}
        remaining = [t for t in remaining if t not in done]
    return bf
