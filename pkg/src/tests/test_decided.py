from logging import getLogger

import pytest

from cbc_topos.helpers.errors import ToposError
from cbc_topos.protocol.decided import (
    NotMonotoneError,
    StateProperty,
    all_properties,
    check_decided_suite,
    decided_forcing,
    decided_modal,
    global_sections,
    is_decided,
)
from cbc_topos.protocol.protocol import UnknownStateError

LOGGER = getLogger(__name__)


def test_monotone_property_on_a_chain(chain_sigma):
    q = StateProperty(chain_sigma, {"w1": 0, "w2": 1, "w3": 1}, name="late")
    assert q.monotone
    assert q.support() == frozenset({"w2", "w3"})
    expected = {"w1": False, "w2": True, "w3": True}
    for w, decided in expected.items():
        assert is_decided(q, w) == decided
        assert decided_forcing(q, w) == decided
        assert decided_modal(q, w) == decided


def test_property_that_holds_now_but_not_later(chain_sigma):
    q = StateProperty(chain_sigma, {"w1": 1, "w2": 0, "w3": 0}, name="early")
    assert not is_decided(q, "w1")
    assert not decided_forcing(q, "w1")
    with pytest.raises(NotMonotoneError) as excinfo:
        decided_modal(q, "w1")
    assert excinfo.value.witness == "w1>w2"


def test_decided_on_branching_states(p0):
    q = StateProperty(p0.sigma, {"w1": 0, "w2": 1, "w3": 1}, name="right")
    assert [is_decided(q, w) for w in p0.states] == [False, True, True]
    assert [decided_modal(q, w) for w in p0.states] == [False, True, True]


def test_property_validation(chain_sigma):
    with pytest.raises(UnknownStateError):
        StateProperty(chain_sigma, {"w1": 0, "w2": 1})
    with pytest.raises(UnknownStateError):
        StateProperty(chain_sigma, {"w1": 0, "w2": 1, "w3": 1, "w4": 0})
    with pytest.raises(ToposError):
        StateProperty(chain_sigma, {"w1": 0, "w2": 2, "w3": 1})
    q = StateProperty(chain_sigma, {"w1": 0, "w2": 1, "w3": 1})
    with pytest.raises(UnknownStateError):
        is_decided(q, "w9")


def test_global_sections_are_cached(chain_sigma):
    assert global_sections(chain_sigma) is global_sections(chain_sigma)


def test_all_properties(chain_sigma):
    properties = list(all_properties(chain_sigma))
    assert len(properties) == 8
    assert sum(q.monotone for q in properties) == 4


@pytest.mark.parametrize("fixture_name", ["chain_sigma", "cat2"])
def test_decided_suite_passes(request, fixture_name):
    report = check_decided_suite(request.getfixturevalue(fixture_name))
    assert report.passed
    assert report.result("decided_iff_modal_forcing").checked > 0


def test_decided_suite_on_p0(p0):
    report = check_decided_suite(p0.sigma)
    assert report.passed
    assert report.result("inconsistent_properties_not_both_decided").checked > 0


def test_decided_suite_keeps_properties_with_the_same_name(chain_sigma):
    always = StateProperty(chain_sigma, {"w1": 1, "w2": 1, "w3": 1}, name="q")
    never = StateProperty(chain_sigma, {"w1": 0, "w2": 0, "w3": 0}, name="q")
    report = check_decided_suite(chain_sigma, [always, never])
    assert report.passed
    assert report.result("decided_iff_forcing").checked == 6
    early = StateProperty(chain_sigma, {"w1": 1, "w2": 0, "w3": 0}, name="q3")
    assert check_decided_suite(chain_sigma, [early, *all_properties(chain_sigma)]).passed
