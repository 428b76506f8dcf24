import pytest

from chasebound import (
    Constant,
    GeneratedNull,
    InitialNull,
    Null,
    Substitution,
    TriggerKey,
    Variable,
    atom,
)

a, b = Constant("a"), Constant("b")
x, y = Variable("x"), Variable("y")


def test_apply_rewrites_argument_wise():
    sub = Substitution({x: a, y: a})
    assert sub.apply({atom("p", x, y)}) == {atom("p", a, a)}


def test_empty_substitution_is_identity():
    atoms = frozenset({atom("p", a, b), atom("q", x)})
    assert Substitution().apply(atoms) == atoms


def test_apply_merges_collapsing_atoms():
    # Both atoms rewrite to the same ground atom; set semantics merge them.
    sub = Substitution({x: a, y: a})
    result = sub.apply({atom("p", x, y), atom("p", y, x)})
    assert result == {atom("p", a, a)}
    assert len(result) == 1


def test_constants_never_in_domain():
    with pytest.raises(ValueError):
        Substitution({a: b})


def test_null_equality_is_structural_and_interned():
    key = TriggerKey((("x", a), ("y", a)))
    n1 = Null(GeneratedNull("R1", key, "z"))
    n2 = Null(GeneratedNull("R1", TriggerKey((("x", a), ("y", a))), "z"))
    assert n1 is n2
    n3 = Null(GeneratedNull("R1", key, "w"))
    assert n1 != n3
    assert Null(InitialNull("w")) != n1


def test_null_serialization():
    key = TriggerKey((("x", a), ("y", a)))
    n = Null(GeneratedNull("R1", key, "z"))
    assert str(n) == "_:R1#{x:a,y:a}#z"
    assert str(Null(InitialNull("w"))) == "_:w"


def test_atom_arity_and_str():
    at = atom("p", a, Null(InitialNull("w")))
    assert at.arity == 2
    assert str(at) == "p(a,_:w)"


def test_substitution_equality_and_hash():
    s1 = Substitution({x: a, y: b})
    s2 = Substitution({y: b, x: a})
    assert s1 == s2 and hash(s1) == hash(s2)
    assert s1 != Substitution({x: a})


def test_variable_scopes_are_distinct():
    assert Variable("X", "R1") != Variable("X", "R2")
    assert Variable("X", "R1") == Variable("X", "R1")


def test_substitution_restrict_and_extend():
    s = Substitution({x: a, y: b})
    assert s.restrict([x]) == Substitution({x: a})
    assert s.extended({y: a}) == Substitution({x: a, y: a})
    assert s.apply_term(Variable("z")) == Variable("z")
