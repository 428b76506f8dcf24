"""Homomorphism search, isomorphism, cores and canonical forms for atom sets.

The searcher is a plain backtracking matcher.  Source atoms are ordered by
selectivity (fewest candidate target atoms first, ties broken by a serialized
form) so results are deterministic and pruning happens early.  Constants are
always frozen; nulls and variables are remappable unless explicitly frozen.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Optional

from .errors import CanonicalBudgetError
from .terms import (
    Atom,
    Constant,
    Substitution,
    Term,
    Variable,
    atom_sort_key,
    sorted_atoms,
    term_sort_key,
)


def _is_frozen(term: Term, frozen: frozenset) -> bool:
    return isinstance(term, Constant) or term in frozen


@lru_cache(maxsize=256)
def _candidates_by_predicate(target: frozenset) -> dict[tuple[str, int], list[Atom]]:
    # Cached per factbase: applicability checks against one factbase come in
    # bursts.  Callers must not mutate the returned index.
    index: dict[tuple[str, int], list[Atom]] = {}
    for a in sorted_atoms(target):
        index.setdefault((a.predicate, len(a.args)), []).append(a)
    return index


def _match_atom(src: Atom, tgt: Atom, binding: dict, frozen: frozenset) -> Optional[list[Term]]:
    """Try to extend ``binding`` so that binding(src) == tgt; returns newly
    bound source terms (for undo) or None when the atoms do not match."""
    new: list[Term] = []
    for s, t in zip(src.args, tgt.args):
        if _is_frozen(s, frozen):
            if s != t:
                break
        elif s in binding:
            if binding[s] != t:
                break
        else:
            binding[s] = t
            new.append(s)
    else:
        return new
    for s in new:
        del binding[s]
    return None


def _search(source: list[Atom], index: dict, binding: dict, frozen: frozenset,
            pos: int, results: list[dict], first_only: bool) -> bool:
    if pos == len(source):
        results.append(dict(binding))
        return first_only
    src = source[pos]
    for tgt in index.get((src.predicate, len(src.args)), ()):
        new = _match_atom(src, tgt, binding, frozen)
        if new is None:
            continue
        if _search(source, index, binding, frozen, pos + 1, results, first_only):
            return True
        for s in new:
            del binding[s]
    return False


def _ordered_source(source: Iterable[Atom], index: dict) -> list[Atom]:
    return sorted(source,
                  key=lambda a: (len(index.get((a.predicate, len(a.args)), ())),
                                 atom_sort_key(a)))


def _assert_sound(sub: Substitution, source: frozenset, target: frozenset,
                  frozen: frozenset) -> None:
    assert sub.apply(source) <= target, "homomorphism image escapes the target"
    assert all(not _is_frozen(k, frozen) for k, _ in sub.items()), \
        "homomorphism moved a frozen term"


def find_homomorphism(source: frozenset, target: frozenset,
                      frozen: frozenset = frozenset()) -> Optional[Substitution]:
    """First homomorphism from ``source`` to ``target``, or None.

    The returned substitution is the identity on ``frozen`` and on constants
    (identity entries are simply absent from its domain).
    """
    index = _candidates_by_predicate(frozenset(target))
    ordered = _ordered_source(source, index)
    results: list[dict] = []
    _search(ordered, index, {}, frozen, 0, results, first_only=True)
    if not results:
        return None
    sub = Substitution(results[0])
    _assert_sound(sub, frozenset(source), frozenset(target), frozen)
    return sub


def all_homomorphisms(source: frozenset, target: frozenset,
                      frozen: frozenset = frozenset()) -> list[Substitution]:
    """Every distinct homomorphism, in a deterministic (sorted) order."""
    index = _candidates_by_predicate(frozenset(target))
    ordered = _ordered_source(source, index)
    results: list[dict] = []
    _search(ordered, index, {}, frozen, 0, results, first_only=False)
    subs = [Substitution(r) for r in results]
    for sub in subs:
        _assert_sound(sub, frozenset(source), frozenset(target), frozen)
    return sorted(subs, key=lambda s: tuple((term_sort_key(k), term_sort_key(v))
                                            for k, v in s.items()))


def homomorphic_equivalent(a: frozenset, b: frozenset) -> bool:
    """Logical equivalence of two atom sets (homomorphisms both ways)."""
    return (find_homomorphism(a, b) is not None
            and find_homomorphism(b, a) is not None)


def _term_kind(t: Term) -> int:
    if isinstance(t, Constant):
        return 0
    if isinstance(t, Variable):
        return 1
    return 2


def is_isomorphic(a: frozenset, b: frozenset,
                  renameable: frozenset | None = None) -> bool:
    """True iff a bijective term renaming maps ``a`` onto ``b``.

    By default only variables and nulls are renameable (constants are fixed,
    matching the textbook notion).  Passing ``renameable`` explicitly allows
    treating chosen constants as generic labels; renaming is always within the
    same term kind.  This search is independent of canonical_form so the two
    can cross-check each other.
    """
    if len(a) != len(b):
        return False
    if renameable is None:
        renameable = frozenset(t for s in (a, b) for at in s for t in at.args
                               if not isinstance(t, Constant))

    by_pred_a: dict[tuple[str, int], list[Atom]] = {}
    for at in sorted_atoms(a):
        by_pred_a.setdefault((at.predicate, len(at.args)), []).append(at)
    by_pred_b: dict[tuple[str, int], list[Atom]] = {}
    for at in sorted_atoms(b):
        by_pred_b.setdefault((at.predicate, len(at.args)), []).append(at)
    if set(by_pred_a) != set(by_pred_b):
        return False
    if any(len(by_pred_a[k]) != len(by_pred_b[k]) for k in by_pred_a):
        return False

    source = sorted_atoms(a)
    used: set[Atom] = set()
    fwd: dict[Term, Term] = {}
    rev: dict[Term, Term] = {}

    def try_map(s: Term, t: Term) -> Optional[tuple]:
        if s in renameable:
            if _term_kind(s) != _term_kind(t) or t not in renameable:
                return None
            if s in fwd:
                return () if fwd[s] == t else None
            if t in rev:
                return None
            fwd[s] = t
            rev[t] = s
            return (s, t)
        return () if s == t else None

    def match(pos: int) -> bool:
        if pos == len(source):
            return True
        src = source[pos]
        for tgt in by_pred_b[(src.predicate, len(src.args))]:
            if tgt in used:
                continue
            added: list[tuple] = []
            ok = True
            for s, t in zip(src.args, tgt.args):
                r = try_map(s, t)
                if r is None:
                    ok = False
                    break
                if r:
                    added.append(r)
            if ok:
                used.add(tgt)
                if match(pos + 1):
                    return True
                used.discard(tgt)
            for s, t in added:
                del fwd[s]
                del rev[t]
        return False

    return match(0)


def core(atoms: frozenset) -> frozenset:
    """A minimal subset of ``atoms`` equivalent to it.

    Greedy single-atom removals: look for a homomorphism into the set minus
    one atom and replace the set by the image.  A fixpoint of this loop admits
    no homomorphism into any strict subset, i.e. it is a core.
    """
    current = frozenset(atoms)
    changed = True
    while changed:
        changed = False
        for a in sorted_atoms(current):
            sub = find_homomorphism(current, current - {a})
            if sub is not None:
                current = sub.apply(current)
                changed = True
                break
    return current


def _label_line(a: Atom, labels: dict[Term, str], fixed: frozenset,
                counters: list[int]) -> str:
    parts = []
    for t in a.args:
        if isinstance(t, Constant) and t in fixed:
            parts.append(f"!{t.name}")
            continue
        if t not in labels:
            kind = _term_kind(t)
            labels[t] = f"{'knv'[kind]}{counters[kind]}"
            counters[kind] += 1
        parts.append(labels[t])
    return f"{a.predicate}({','.join(parts)})"


def canonical_form(atoms: frozenset, fixed: frozenset = frozenset(),
                   max_nodes: int = 500_000) -> bytes:
    """Canonical byte encoding, equal for two sets iff they are isomorphic by
    a renaming that is the identity on ``fixed``.

    Minimizes the serialized form over all atom orderings; the induced
    first-appearance labeling of non-fixed terms makes the result independent
    of the original names.  Constants not listed in ``fixed`` are treated as
    generic labels (renameable within their kind), which is what the
    representative-factbase enumeration needs.  Raises CanonicalBudgetError
    when the ordering search exceeds ``max_nodes`` visited nodes.
    """
    fixed = frozenset(fixed)
    atoms_list = sorted_atoms(atoms)
    if not atoms_list:
        return b"<empty>"

    best: list[Optional[tuple[str, ...]]] = [None]
    nodes = [0]

    def extend(prefix: tuple[str, ...], remaining: list[Atom],
               labels: dict[Term, str], counters: list[int]) -> None:
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise CanonicalBudgetError(
                f"canonical_form exceeded {max_nodes} search nodes")
        if best[0] is not None and prefix > best[0][:len(prefix)]:
            return
        if not remaining:
            if best[0] is None or prefix < best[0]:
                best[0] = prefix
            return
        for i, a in enumerate(remaining):
            labels2 = dict(labels)
            counters2 = list(counters)
            line = _label_line(a, labels2, fixed, counters2)
            extend(prefix + (line,), remaining[:i] + remaining[i + 1:],
                   labels2, counters2)

    extend((), atoms_list, {}, [0, 0, 0])
    assert best[0] is not None
    return "\n".join(best[0]).encode("ascii")
