from logging import getLogger

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbc_topos.category.copresheaf import (
    And,
    Atom,
    Bot,
    Implies,
    InvalidSubobjectError,
    MalformedFormulaError,
    NatTrans,
    Not,
    NotNaturalError,
    Or,
    Subobject,
    Top,
    classify,
    comprehension,
    elementary_forcing,
    elementary_safety_forcing,
    eval_formula,
    forces,
    formula_subobject,
    hom_from,
    omega,
    sub_heyting_ops,
    terminal_copresheaf,
    unfolded_safety_forcing,
)
from cbc_topos.category.fincat import Cosieve, total_cosieve
from cbc_topos.logic.heyting import is_boolean, verify_heyting_laws
from cbc_topos.protocol.generators import random_protocol
from cbc_topos.protocol.protocol import is_safe

LOGGER = getLogger(__name__)


@pytest.fixture
def settled(cat2) -> Subobject:
    """The point of 1 that exists only at b"""
    return Subobject(terminal_copresheaf(cat2), {"a": frozenset(), "b": frozenset({"*"})})


def test_functor_laws(cat2):
    assert terminal_copresheaf(cat2).validate().passed
    assert omega(cat2).validate().passed
    assert hom_from(cat2, "a").validate().passed
    assert hom_from(cat2, "a").elements("b") == ("h",)


def test_classify_then_comprehend(cat2, settled):
    chi = classify(settled)
    assert chi("a", "*") == Cosieve("a", frozenset({"h"}))
    assert chi("b", "*") == total_cosieve(cat2, "b")
    assert chi.naturality_failure() is None
    assert comprehension(chi).key() == settled.key()
    assert forces("b", chi, "*")
    assert not forces("a", chi, "*")


def test_open_subobject_is_rejected(cat2):
    escaping = Subobject(terminal_copresheaf(cat2), {"a": frozenset({"*"}), "b": frozenset()})
    with pytest.raises(InvalidSubobjectError) as excinfo:
        classify(escaping)
    assert excinfo.value.witness == ("a", "*", "h")


def test_unnatural_map_is_rejected(cat2):
    one = terminal_copresheaf(cat2)
    jumps = NatTrans(
        one,
        omega(cat2),
        {"a": {"*": Cosieve("a", frozenset())}, "b": {"*": total_cosieve(cat2, "b")}},
        name="jump",
    )
    with pytest.raises(NotNaturalError) as excinfo:
        comprehension(jumps)
    assert excinfo.value.witness == ("h", "*")


def test_subobjects_of_terminal(cat2):
    algebra = sub_heyting_ops(terminal_copresheaf(cat2))
    assert len(algebra) == 3
    assert verify_heyting_laws(algebra).passed
    decision = is_boolean(algebra)
    assert not decision.is_boolean
    assert decision.witnesses["excluded_middle"] == frozenset({("b", "*")})
    for key in algebra.elements:
        assert comprehension(classify(algebra.as_subobject(key))).key() == key


def test_formulas_match_subobject_algebra(cat2, settled):
    one = terminal_copresheaf(cat2)
    algebra = sub_heyting_ops(one)
    atom = Atom(classify(settled))
    formulas = [
        Top(),
        Bot(),
        atom,
        Not(atom),
        Or(atom, Not(atom)),
        Not(Not(atom)),
        And(atom, Implies(atom, Bot())),
    ]
    for formula in formulas:
        selected = formula_subobject(algebra, formula)
        for obj in cat2.objects:
            assert eval_formula(obj, formula, "*", one) == ((obj, "*") in selected)
    assert not eval_formula("a", Or(atom, Not(atom)), "*", one)
    assert eval_formula("a", Not(Not(atom)), "*", one)


def test_formula_atoms_must_share_domain(cat2, settled):
    other = Atom(classify(Subobject(hom_from(cat2, "b"), {"a": frozenset(), "b": frozenset({"id_b"})})))
    with pytest.raises(MalformedFormulaError):
        eval_formula("a", And(Atom(classify(settled)), other), "*", terminal_copresheaf(cat2))


def test_safety_forcing_on_p0(p0):
    for p in p0.propositions():
        for w in p0.states:
            direct = is_safe(p0, p, w)
            assert elementary_safety_forcing(p0, p, w) == direct
            assert unfolded_safety_forcing(p0, p, w) == direct
    assert is_safe(p0, {"a"}, "w1")
    assert not is_safe(p0, {"b"}, "w1")


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    states=st.integers(min_value=1, max_value=4),
    consensus=st.integers(min_value=1, max_value=3),
)
def test_safety_oracles_agree(seed, states, consensus):
    protocol = random_protocol(states, consensus, 0.5, seed, waive_estimator_condition=True)
    for p in protocol.propositions():
        for w in protocol.states:
            direct = is_safe(protocol, p, w)
            assert elementary_safety_forcing(protocol, p, w) == direct
            assert unfolded_safety_forcing(protocol, p, w) == direct


def test_elementary_forcing_visits_every_execution(chain_sigma):
    visited = set()

    def record(later, execution):
        visited.add((later, execution))
        return True

    assert elementary_forcing(chain_sigma, "w1", record)
    assert visited == {("w1", "w1>w1"), ("w2", "w1>w2"), ("w3", "w1>w3")}
    assert not elementary_forcing(chain_sigma, "w1", lambda later, _: later != "w3")
    assert elementary_forcing(chain_sigma, "w1", lambda later, _: later != "w0")
