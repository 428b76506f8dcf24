"""Terms, atoms and substitutions: the ground vocabulary everything reduces to.

All types here are immutable values; equality is structural.  Nulls carry a
structured provenance so that the same trigger (or frontier image) always
re-creates the identical null, which is what makes replay bit-exact.

Nulls are interned and atoms cache their hash: provenances nest (a null's key
can contain earlier nulls), so recomputing hashes or serialized forms on every
set operation would blow up on deep derivations.  Ordering is likewise done by
a structural comparator instead of comparing serialized strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Variable:
    name: str
    # Rule id; keeps variable namespaces of distinct rules disjoint even when
    # the source text reuses names.  Not part of the printed form.
    scope: Optional[str] = None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class InitialNull:
    """Provenance of a null already present in the input factbase (``_:w``)."""

    label: str


@dataclass(frozen=True)
class TriggerKey:
    """Canonical encoding of a full body substitution, sorted by variable name."""

    items: tuple

    def __str__(self) -> str:
        return "{" + ",".join(f"{name}:{term}" for name, term in self.items) + "}"


@dataclass(frozen=True)
class FrontierKey:
    """Ordered tuple of frontier images (frontier variables sorted by name)."""

    images: tuple

    def __str__(self) -> str:
        return "(" + ",".join(str(t) for t in self.images) + ")"


@dataclass(frozen=True)
class GeneratedNull:
    """Provenance of a null created by a chase step."""

    rule_id: str
    key: Union[TriggerKey, FrontierKey]
    exvar: str


NullProvenance = Union[InitialNull, GeneratedNull]


class Null:
    """Interned labelled unknown; two nulls are equal iff their provenances are."""

    __slots__ = ("provenance", "_hash", "_str", "depth")
    _interned: dict = {}

    def __new__(cls, provenance: NullProvenance) -> "Null":
        cached = cls._interned.get(provenance)
        if cached is not None:
            return cached
        self = super().__new__(cls)
        self.provenance = provenance
        self._hash = hash(("null", provenance))
        self._str = None
        if isinstance(provenance, InitialNull):
            self.depth = 0
        else:
            key = provenance.key
            inner = key.images if isinstance(key, FrontierKey) else \
                tuple(t for _, t in key.items)
            self.depth = 1 + max((t.depth for t in inner if isinstance(t, Null)),
                                 default=0)
        cls._interned[provenance] = self
        return self

    def __reduce__(self):
        return (Null, (self.provenance,))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        # Interning makes identity almost complete; the hash prefilter keeps
        # the unequal case O(1) instead of descending nested provenances.
        if not isinstance(other, Null) or self._hash != other._hash:
            return False
        return self.provenance == other.provenance

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        if self._str is None:
            p = self.provenance
            if isinstance(p, InitialNull):
                self._str = f"_:{p.label}"
            else:
                self._str = f"_:{p.rule_id}#{p.key}#{p.exvar}"
        return self._str

    def __repr__(self) -> str:
        return f"Null({self})"


Term = Union[Constant, Variable, Null]


_KIND_ORDER = {Constant: 0, Variable: 1, Null: 2}


def _cmp_str(a: str, b: str) -> int:
    return -1 if a < b else (1 if a > b else 0)


def term_cmp(a: Term, b: Term) -> int:
    """Deterministic total order over terms: constants < variables < nulls.

    Nulls are compared structurally, never through their serialized form;
    nesting depth is compared before descending into provenance keys so that
    chains of nested nulls order in constant time.
    """
    if a is b:
        return 0
    ta, tb = type(a), type(b)
    if ta is not tb:
        ka, kb = _KIND_ORDER[ta], _KIND_ORDER[tb]
        return -1 if ka < kb else 1
    if ta is Constant:
        return _cmp_str(a.name, b.name)
    if ta is Variable:
        c = _cmp_str(a.name, b.name)
        return c if c else _cmp_str(a.scope or "", b.scope or "")
    if a.depth != b.depth:
        return -1 if a.depth < b.depth else 1
    return _null_cmp(a.provenance, b.provenance)


def _null_cmp(p: NullProvenance, q: NullProvenance) -> int:
    pi, qi = isinstance(p, InitialNull), isinstance(q, InitialNull)
    if pi != qi:
        return -1 if pi else 1
    if pi:
        return _cmp_str(p.label, q.label)
    c = _cmp_str(p.rule_id, q.rule_id)
    if c:
        return c
    c = _cmp_str(p.exvar, q.exvar)
    if c:
        return c
    pk, qk = p.key, q.key
    pt, qt = isinstance(pk, FrontierKey), isinstance(qk, FrontierKey)
    if pt != qt:
        return -1 if not pt else 1
    if pt:
        if len(pk.images) != len(qk.images):
            return -1 if len(pk.images) < len(qk.images) else 1
        for x, y in zip(pk.images, qk.images):
            c = term_cmp(x, y)
            if c:
                return c
        return 0
    if len(pk.items) != len(qk.items):
        return -1 if len(pk.items) < len(qk.items) else 1
    for (n1, t1), (n2, t2) in zip(pk.items, qk.items):
        c = _cmp_str(n1, n2)
        if c:
            return c
        c = term_cmp(t1, t2)
        if c:
            return c
    return 0


class TermKey:
    """Sort key wrapper: orders terms via term_cmp."""

    __slots__ = ("term",)

    def __init__(self, term: Term):
        self.term = term

    def __lt__(self, other: "TermKey") -> bool:
        return term_cmp(self.term, other.term) < 0

    def __le__(self, other: "TermKey") -> bool:
        return term_cmp(self.term, other.term) <= 0

    def __gt__(self, other: "TermKey") -> bool:
        return term_cmp(self.term, other.term) > 0

    def __ge__(self, other: "TermKey") -> bool:
        return term_cmp(self.term, other.term) >= 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermKey):
            return NotImplemented
        return self.term is other.term or term_cmp(self.term, other.term) == 0

    def __hash__(self) -> int:
        return hash(self.term)


def term_sort_key(term: Term) -> TermKey:
    return TermKey(term)


class Atom:
    """Predicate applied to terms; hash computed once at construction."""

    __slots__ = ("predicate", "args", "_hash", "_key")

    def __init__(self, predicate: str, args: Iterable[Term]):
        self.predicate = predicate
        self.args = tuple(args)
        self._hash = hash((predicate, self.args))
        self._key = None

    def __reduce__(self):
        return (Atom, (self.predicate, self.args))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (isinstance(other, Atom) and self._hash == other._hash
                and self.predicate == other.predicate and self.args == other.args)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"

    def __repr__(self) -> str:
        return f"Atom({self})"

    @property
    def arity(self) -> int:
        return len(self.args)

    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = (self.predicate, len(self.args),
                         tuple(TermKey(t) for t in self.args))
        return self._key


def atom(predicate: str, *args: Term) -> Atom:
    return Atom(predicate, tuple(args))


def atom_sort_key(a: Atom) -> tuple:
    return a.sort_key()


# A factbase / rule part is a plain frozenset of atoms: set semantics make
# re-insertion a no-op, which keeps atom ranks well defined by first production.
AtomSet = frozenset


def sorted_atoms(atoms: Iterable[Atom]) -> list[Atom]:
    return sorted(atoms, key=atom_sort_key)


def terms_of(atoms: Iterable[Atom]) -> frozenset:
    return frozenset(t for a in atoms for t in a.args)


def variables_of(atoms: Iterable[Atom]) -> frozenset:
    return frozenset(t for a in atoms for t in a.args if isinstance(t, Variable))


def nulls_of(atoms: Iterable[Atom]) -> frozenset:
    return frozenset(t for a in atoms for t in a.args if isinstance(t, Null))


def constants_of(atoms: Iterable[Atom]) -> frozenset:
    return frozenset(t for a in atoms for t in a.args if isinstance(t, Constant))


class Substitution:
    """Finite mapping from variables/nulls to terms; identity everywhere else.

    Constants are never in the domain.  Application is homomorphic over atom
    structure.  Instances are immutable and hashable so they can identify
    triggers.
    """

    __slots__ = ("_map", "_key", "_hash")

    def __init__(self, mapping: Mapping[Term, Term] | Iterable[tuple[Term, Term]] = ()):
        items = dict(mapping)
        for k in items:
            if isinstance(k, Constant):
                raise ValueError(f"constant {k} cannot be in a substitution domain")
        self._map = items
        self._key = tuple(sorted(items.items(), key=lambda kv: TermKey(kv[0])))
        self._hash = hash(self._key)

    def __reduce__(self):
        return (Substitution, (self._key,))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Substitution) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, term: Term) -> bool:
        return term in self._map

    def __str__(self) -> str:
        return "{" + ",".join(f"{k}:{v}" for k, v in self._key) + "}"

    def __repr__(self) -> str:
        return f"Substitution({self})"

    def items(self) -> Iterator[tuple[Term, Term]]:
        return iter(self._key)

    def domain(self) -> frozenset:
        return frozenset(self._map)

    def get(self, term: Term, default: Term | None = None) -> Term | None:
        return self._map.get(term, default)

    def apply_term(self, term: Term) -> Term:
        return self._map.get(term, term)

    def apply_atom(self, a: Atom) -> Atom:
        return Atom(a.predicate, tuple(self._map.get(t, t) for t in a.args))

    def apply(self, atoms: Iterable[Atom]) -> frozenset:
        """Rewrite every atom argument-wise; duplicates merge (set semantics)."""
        return frozenset(self.apply_atom(a) for a in atoms)

    def restrict(self, keys: Iterable[Term]) -> "Substitution":
        keep = set(keys)
        return Substitution({k: v for k, v in self._map.items() if k in keep})

    def extended(self, extra: Mapping[Term, Term]) -> "Substitution":
        merged = dict(self._map)
        merged.update(extra)
        return Substitution(merged)


EMPTY_SUBSTITUTION = Substitution()
