import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posauction.core import Advertiser, Allocation, AuctionInstance, ExternalityParams, PositionProfile
from posauction.ctr_models import (
    PRACTICAL,
    SEPARABLE,
    ClickModel,
    check_axioms,
    get_model,
    practical_ctr,
    separable_ctr,
)
from posauction.errors import GridTooSmall, SlotIndexError

GRID5 = (0.0, 0.25, 0.5, 0.75, 1.0)
N3 = (1.0, 0.6, 0.3)


def test_separable_example():
    assert separable_ctr(1, (0.8, 0.5), (1.0, 0.2)) == pytest.approx(0.1)


def test_practical_examples():
    p = ExternalityParams(1.0, 1.0)
    # 1 * 0.5 / (1 + 1*0.5 + 0.5*0.5) -> hand value 0.5 / 1.75
    assert practical_ctr(0, (0.5, 0.5), (1.0, 0.5), p) == pytest.approx(0.5 / 1.75)
    assert practical_ctr(0, (0.8, 0.0), (0.5, 0.5), ExternalityParams(0.0, 1.0)) == pytest.approx(0.4)
    assert practical_ctr(1, (0.4, 0.8), (1.0, 0.5), p) == pytest.approx(0.4 / 1.8)


def test_slot_out_of_range():
    with pytest.raises(SlotIndexError):
        separable_ctr(2, (1.0, 1.0), (1.0, 0.5))
    with pytest.raises(SlotIndexError):
        practical_ctr(-1, (1.0,), (1.0,), ExternalityParams())


def test_get_model_aliases():
    assert get_model("practical") is PRACTICAL
    assert get_model("externality") is PRACTICAL
    with pytest.raises(ValueError):
        get_model("cascade")


def test_rates_use_zero_quality_for_empty_slots():
    inst = AuctionInstance(
        (Advertiser("a", 1.0, 0.5),), PositionProfile((1.0, 0.5)), ExternalityParams(2.0, 1.0)
    )
    assert PRACTICAL.rates(Allocation(("a", None)), inst) == pytest.approx([0.5 / 2.0, 0.0])


@st.composite
def qn(draw):
    s = draw(st.integers(1, 5))
    q = draw(st.lists(st.floats(0.0, 1.0), min_size=s, max_size=s))
    n = sorted(draw(st.lists(st.floats(0.0, 1.0), min_size=s, max_size=s)), reverse=True)
    return q, n


@settings(max_examples=200, deadline=None)
@given(qn())
def test_zero_lambda_is_separable(case):
    q, n = case
    for j in range(len(n)):
        assert practical_ctr(j, q, n, ExternalityParams(0.0, 1.0)) == pytest.approx(separable_ctr(j, q, n))


@settings(max_examples=200, deadline=None)
@given(qn(), st.floats(0.01, 20.0))
def test_lambda_strictly_lowers_rate(case, lam):
    q, n = case
    for j in range(len(n)):
        base = separable_ctr(j, q, n)
        crowd = sum(a * b for a, b in zip(n, q))
        if base > 0 and crowd * lam > 1e-9:
            assert practical_ctr(j, q, n, ExternalityParams(lam, 1.0)) < base


@settings(max_examples=200, deadline=None)
@given(qn(), st.floats(0.0, 10.0), st.floats(0.1, 5.0))
def test_nu_scales_every_rate(case, lam, nu):
    q, n = case
    for j in range(len(n)):
        scaled = practical_ctr(j, q, n, ExternalityParams(lam, nu))
        assert scaled == pytest.approx(nu * practical_ctr(j, q, n, ExternalityParams(lam, 1.0)))


@pytest.mark.parametrize("lam", [0.0, 0.1, 1.0, 10.0])
def test_practical_satisfies_axioms(lam):
    rep = check_axioms(PRACTICAL, 3, GRID5, N3, params=ExternalityParams(lam, 1.0))
    assert rep.all_passed
    if lam > 0:
        assert set(rep.verdicts.values()) == {"pass"}
    else:
        assert rep.verdicts["A4"] == rep.verdicts["A5"] == "vacuous"


def test_separable_other_axioms_hold_with_equality():
    rep = check_axioms(SEPARABLE, 3, GRID5, N3)
    assert rep.verdicts == {"A1": "pass", "A2": "pass", "A3": "pass", "A4": "vacuous", "A5": "vacuous"}
    assert "equality only" in rep.lines()[3]


def _positive_externality(j, q, n, params=None):
    return n[j] * q[j] * (1.0 + sum(n[k] * q[k] for k in range(len(n)) if k != j))


def test_positive_externality_fails_a4_with_witness():
    rep = check_axioms(ClickModel("mock", _positive_externality), 3, GRID5, N3)
    assert rep.verdicts["A4"] == "fail"
    w = rep.witnesses["A4"][0]
    j, k = w.slots
    assert w.values[1] > w.values[0]
    assert j != k


def test_model_ignoring_quality_fails_a2():
    rep = check_axioms(ClickModel("flat", lambda j, q, n, p=None: n[j]), 2, GRID5, (1.0, 0.5))
    assert rep.verdicts["A2"] == "fail"
    assert rep.verdicts["A1"] == "fail"


def test_a5_fails_when_lower_slot_crowds_more():
    # crowding weighted by the reversed scores: the lower slot perturbs others more
    def reversed_crowding(j, q, n, p=None):
        return n[j] * q[j] / (1.0 + sum(n[len(n) - 1 - k] * q[k] for k in range(len(n))))

    rep = check_axioms(ClickModel("reversed", reversed_crowding), 3, GRID5, N3)
    assert rep.verdicts["A5"] == "fail"


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        check_axioms(PRACTICAL, 2, (0.0, 1.0, 1.0), (1.0, 0.5))


def test_witness_count_is_capped():
    rep = check_axioms(ClickModel("mock", _positive_externality), 3, GRID5, N3, max_witnesses=2)
    assert len(rep.witnesses["A4"]) == 2
    assert rep.violations["A4"] > 2


def test_rates_are_not_clamped():
    assert math.isclose(practical_ctr(0, (1.0,), (1.0,), ExternalityParams(0.0, 3.0)), 3.0)
