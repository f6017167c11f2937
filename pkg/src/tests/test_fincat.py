from logging import getLogger

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbc_topos.category.fincat import (
    Cosieve,
    CyclicQuiverError,
    DomainMismatchError,
    FinCategory,
    FinFunctor,
    UnknownObjectError,
    accessible_from,
    category_from_dag,
    comma_category,
    concrete_category,
    cosieve_transition,
    cosieves_at,
    full_subcategory,
    functor_to_terminal,
    identity_functor,
    is_cosieve,
    poset_category,
    principal_cosieve,
    total_cosieve,
    validate_category,
    validate_functor,
)
from cbc_topos.helpers.errors import ToposError
from cbc_topos.helpers.system import SizeLimitError, SizeLimits
from cbc_topos.logic.heyting import chain_poset, discrete_poset
from cbc_topos.protocol.generators import random_concrete_functor, random_protocol

LOGGER = getLogger(__name__)


def test_cosieves_on_an_arrow(cat2):
    at_a = cosieves_at(cat2, "a")
    at_b = cosieves_at(cat2, "b")
    assert [c.arrows for c in at_a] == [frozenset(), frozenset({"h"}), frozenset({"id_a", "h"})]
    assert len(at_b) == 2
    for cosieve in at_a:
        assert is_cosieve(cat2, "a", cosieve.arrows)
    assert not is_cosieve(cat2, "a", frozenset({"id_a"}))


def test_cosieve_transition(cat2):
    moved = cosieve_transition(cat2, Cosieve("a", frozenset({"h"})), "h")
    assert moved == Cosieve("b", frozenset({"id_b"}))
    assert cosieve_transition(cat2, Cosieve("a", frozenset({"h"})), "id_a").arrows == frozenset({"h"})
    assert principal_cosieve(cat2, "h").arrows == frozenset({"h"})
    with pytest.raises(DomainMismatchError):
        cosieve_transition(cat2, Cosieve("b", frozenset()), "h")


def test_built_category_is_valid(cat2):
    assert validate_category(cat2).passed
    assert cat2.compose("h", "id_a") == "h"
    assert cat2.hom("a", "b") == ("h",)
    assert cat2.reachable("a") == ("a", "b")
    assert cat2.is_thin
    with pytest.raises(DomainMismatchError):
        cat2.compose("h", "h")
    with pytest.raises(UnknownObjectError):
        cat2.check_object("c")


def test_missing_composite_is_reported():
    """g after f is never recorded, the first composable pair in arrow order is the witness"""
    broken = FinCategory.build(["a", "b", "c"], [("f", "a", "b"), ("g", "b", "c")])
    report = validate_category(broken)
    assert not report.passed
    assert report.result("composition_total").witness == ("g", "f")


def test_dag_reachability():
    sigma = category_from_dag(["x", "y", "z"], [("x", "y"), ("y", "z")])
    assert sigma.hom("x", "z") == ("x>z",)
    assert sigma.compose("y>z", "x>y") == "x>z"
    assert accessible_from(sigma, "y") == ("y", "z")
    assert accessible_from(sigma, "z") == ("z",)
    assert validate_category(sigma).passed


@pytest.mark.parametrize(
    "edges, cycle",
    [
        ([("x", "y"), ("y", "x")], ("x", "y", "x")),
        ([("x", "x")], ("x", "x")),
    ],
)
def test_cycles_are_rejected(edges, cycle):
    with pytest.raises(CyclicQuiverError) as excinfo:
        category_from_dag(["x", "y"], edges)
    assert excinfo.value.witness == cycle


def test_unknown_node_in_edge():
    with pytest.raises(UnknownObjectError) as excinfo:
        category_from_dag(["x"], [("x", "q")])
    assert excinfo.value.witness == "q"


def test_functors(cat2):
    assert validate_functor(identity_functor(cat2)).passed
    bang = functor_to_terminal(cat2)
    assert validate_functor(bang).passed
    partial = FinFunctor(cat2, cat2, {"a": "a", "b": "b"}, {"id_a": "id_a", "id_b": "id_b"})
    report = validate_functor(partial)
    assert report.result("total").witness == "h"


def test_comma_category_over_terminal(cat2):
    comma = comma_category("*", functor_to_terminal(cat2))
    assert comma.category.objects == ("id_*|a", "id_*|b")
    assert validate_category(comma.category).passed
    assert validate_functor(comma.projection).passed


def test_full_subcategory(cat2):
    sub, inclusion = full_subcategory(cat2, ["b"])
    assert sub.objects == ("b",)
    assert set(sub.arrows) == {"id_b"}
    assert validate_functor(inclusion).passed


def test_poset_category_matches_chain():
    category = poset_category(chain_poset(3))
    assert category.hom("c0", "c2") == ("c0>c2",)
    assert category.hom("c2", "c0") == ()
    assert validate_category(category).passed


def test_cosieve_limit(cat2):
    with pytest.raises(SizeLimitError):
        cosieves_at(cat2, "a", SizeLimits(max_out_arrows=1))


def test_cosieve_limit_applies_after_caching(cat2):
    assert len(cosieves_at(cat2, "a")) == 3
    with pytest.raises(SizeLimitError):
        cosieves_at(cat2, "a", SizeLimits(max_out_arrows=1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1), states=st.integers(min_value=1, max_value=5))
def test_random_state_categories_are_categories(seed, states):
    sigma = random_protocol(states, 1, 0.5, seed).sigma
    assert validate_category(sigma).passed
    for w in sigma.objects:
        family = cosieves_at(sigma, w)
        assert family[0].arrows == frozenset()
        assert family[-1].arrows == frozenset(sigma.out_arrows(w))


def test_poset_category_arrow_counts(p0):
    assert len(poset_category(chain_poset(3)).arrows) == 6
    subsets = p0.pc_category()
    assert len(subsets.objects) == 4
    assert len(subsets.arrows) == 9
    discrete = poset_category(discrete_poset(2))
    assert len(discrete.arrows) == 2
    assert validate_category(discrete).passed


def test_non_associative_cycle_is_reported():
    """r and s cycle through the identity like Z/3, except that s after s is s instead of r"""
    cycle = FinCategory.build(
        ["x"],
        [("r", "x", "x"), ("s", "x", "x")],
        compose=[("r", "r", "s"), ("r", "s", "id_x"), ("s", "r", "id_x"), ("s", "s", "s")],
    )
    report = validate_category(cycle)
    assert not report.passed
    assert not report.result("composition_total").failed
    assert not report.result("identity_laws").failed
    assert report.result("associativity").witness == ("s", "r", "r")


def test_concrete_category():
    category = concrete_category(
        {"one": 1, "two": 2}, [("two", "one", (0, 0)), ("one", "two", (0,)), ("one", "two", (1,))], name="sets"
    )
    assert set(category.arrows) == {
        "id_one",
        "id_two",
        "two>one:0.0",
        "one>two:0",
        "one>two:1",
        "two>two:0.0",
        "two>two:1.1",
    }
    assert category.hom("one", "two") == ("one>two:0", "one>two:1")
    assert category.compose("two>one:0.0", "one>two:1") == "id_one"
    assert category.compose("one>two:1", "two>one:0.0") == "two>two:1.1"
    assert not category.is_thin
    assert validate_category(category).passed


def test_concrete_category_rejects_bad_generators():
    with pytest.raises(ToposError) as excinfo:
        concrete_category({"one": 1}, [("one", "one", (1,))])
    assert excinfo.value.witness == ("one", "one", (1,))
    with pytest.raises(UnknownObjectError):
        concrete_category({"one": 1}, [("one", "three", (0,))])


def check_cosieve_laws(category: FinCategory) -> None:
    assert validate_category(category).passed
    for c in category.objects:
        family = set(cosieves_at(category, c))
        assert Cosieve(c, frozenset()) in family
        assert total_cosieve(category, c) in family
        for r in family:
            assert is_cosieve(category, c, r.arrows)
            assert cosieve_transition(category, r, category.identity[c]) == r
            for s in family:
                assert Cosieve(c, r.arrows & s.arrows) in family
                assert Cosieve(c, r.arrows | s.arrows) in family
        for f in category.out_arrows(c):
            d = category.cod(f)
            assert cosieve_transition(category, total_cosieve(category, c), f) == total_cosieve(category, d)
            for g in category.out_arrows(d):
                for r in family:
                    assert cosieve_transition(category, r, category.compose(g, f)) == cosieve_transition(
                        category, cosieve_transition(category, r, f), g
                    )


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1), states=st.integers(min_value=1, max_value=5))
def test_cosieve_laws_on_state_categories(seed, states):
    check_cosieve_laws(random_protocol(states, 1, 0.5, seed).sigma)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_cosieve_laws_on_categories_of_sets(seed):
    functor = random_concrete_functor(seed)
    assert not functor.target.is_thin
    assert validate_functor(functor).passed
    check_cosieve_laws(functor.target)
    check_cosieve_laws(functor.source)
