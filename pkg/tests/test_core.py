import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posauction.core import (
    Advertiser,
    Allocation,
    AuctionInstance,
    BrandPositionProfile,
    ExternalityParams,
    PositionProfile,
    ecpm,
    validate_instance,
    welfare,
)
from posauction.ctr_models import BRAND, PRACTICAL, SEPARABLE
from posauction.errors import InstanceError, ModelProfileMismatch


def ads(*pairs):
    return tuple(Advertiser(f"a{i}", b, q) for i, (b, q) in enumerate(pairs))


def test_valid_instance_is_returned_unchanged():
    inst = AuctionInstance(ads((2, 1), (1, 1)), PositionProfile((1.0, 0.5)))
    assert validate_instance(inst) is inst


def test_increasing_positions_rejected():
    inst = AuctionInstance(ads((2, 1)), PositionProfile((0.5, 1.0)))
    with pytest.raises(InstanceError) as exc:
        validate_instance(inst)
    assert exc.value.codes == ["NonMonotonePositions"]


def test_unnormalized_brand_profile_rejected():
    inst = AuctionInstance(ads((2, 1)), BrandPositionProfile((0.9, 0.5), (1.0, 0.5)))
    with pytest.raises(InstanceError) as exc:
        validate_instance(inst)
    assert exc.value.codes == ["UnnormalizedBrandProfile"]


def test_all_violations_are_reported_together():
    bad = (Advertiser("x", -1.0, 1.0), Advertiser("x", 1.0, float("nan")))
    inst = AuctionInstance(bad, PositionProfile((0.2, 0.9)), ExternalityParams(-1.0, 0.0))
    with pytest.raises(InstanceError) as exc:
        validate_instance(inst)
    codes = exc.value.codes
    assert codes.count("NegativeBidOrQuality") == 2
    assert "DuplicateId" in codes
    assert "NonMonotonePositions" in codes
    assert codes.count("InvalidParams") == 2


def test_missing_profile():
    with pytest.raises(InstanceError) as exc:
        validate_instance(AuctionInstance(ads((1, 1)), None))
    assert exc.value.codes == ["MissingProfile"]


@pytest.mark.parametrize(
    "beta, eta, code",
    [
        ((1.0, 0.5, 0.7), (1.0, 0.5, 0.2), "NonMonotonePositions"),
        ((1.0, 0.5), (1.0, 0.5, 0.2), "ProfileLengthMismatch"),
        ((1.0, 1.5), (1.0, 0.5), "BrandProfileOutOfRange"),
    ],
)
def test_brand_profile_violations(beta, eta, code):
    with pytest.raises(InstanceError) as exc:
        validate_instance(AuctionInstance(ads((1, 1)), BrandPositionProfile(beta, eta)))
    assert code in exc.value.codes


@pytest.mark.parametrize("b, q, expected", [(2, 0.5, 1.0), (0, 1, 0.0), (10, 0.09, 0.9)])
def test_ecpm(b, q, expected):
    assert math.isclose(ecpm(Advertiser("a", b, q)), expected, rel_tol=1e-12)


def test_separable_welfare_example():
    inst = AuctionInstance(ads((2, 1), (1, 1)), PositionProfile((1.0, 0.5)))
    rep = welfare(Allocation(("a0", "a1")), inst, SEPARABLE)
    assert rep.total == 2.5
    assert rep.per_slot == (2.0, 0.5)


def test_externality_welfare_example():
    inst = AuctionInstance(ads((1, 0.4), (1, 0.2)), PositionProfile((1.0, 0.5)), ExternalityParams(1.0, 1.0))
    rep = welfare(Allocation(("a0", "a1")), inst, PRACTICAL)
    assert math.isclose(rep.total, (0.4 + 0.1) / 1.5, rel_tol=1e-12)


def test_externality_with_zero_lambda_matches_separable():
    inst = AuctionInstance(ads((2, 0.7), (3, 0.2), (1, 1)), PositionProfile((1.0, 0.6, 0.1)), ExternalityParams(0.0, 1.0))
    alloc = Allocation(("a2", "a0", "a1"))
    assert math.isclose(welfare(alloc, inst, PRACTICAL).total, welfare(alloc, inst, SEPARABLE).total, rel_tol=1e-12)


def test_empty_slots_contribute_nothing():
    inst = AuctionInstance(ads((2, 1)), PositionProfile((1.0, 0.5, 0.2)))
    rep = welfare(Allocation(("a0", None, None)), inst, SEPARABLE)
    assert rep.per_slot == (2.0, 0.0, 0.0)


def test_model_profile_mismatch():
    inst = AuctionInstance(ads((2, 1)), PositionProfile((1.0,)))
    with pytest.raises(ModelProfileMismatch):
        welfare(Allocation(("a0",)), inst, BRAND)
    brand_inst = AuctionInstance(ads((2, 1)), BrandPositionProfile((1.0,), (1.0,)))
    with pytest.raises(ModelProfileMismatch):
        welfare(Allocation(("a0",)), brand_inst, SEPARABLE)


def test_allocation_invariants():
    with pytest.raises(ValueError):
        Allocation(("a", "a"))
    with pytest.raises(ValueError):
        Allocation((None, "a"))
    assert Allocation.from_ids(["a"], 3).slots == ("a", None, None)


def test_with_bid_copies():
    inst = AuctionInstance(ads((2, 1), (1, 1)), PositionProfile((1.0, 0.5)))
    changed = inst.with_bid("a1", 7.0)
    assert changed.ad("a1").bid == 7.0 and inst.ad("a1").bid == 1
    with pytest.raises(KeyError):
        inst.with_bid("zz", 1.0)


# -- properties ----------------------------------------------------------------

values = st.floats(0.0, 10.0, allow_nan=False)


@st.composite
def instances(draw):
    m = draw(st.integers(1, 5))
    s = draw(st.integers(1, 5))
    pairs = draw(st.lists(st.tuples(values, st.floats(0.0, 1.0)), min_size=m, max_size=m))
    n = sorted(draw(st.lists(st.floats(0.0, 1.0), min_size=s, max_size=s)), reverse=True)
    lam = draw(st.floats(0.0, 20.0))
    nu = draw(st.floats(0.1, 3.0))
    order = draw(st.permutations(range(m)))
    shown = draw(st.integers(0, min(m, s)))
    inst = AuctionInstance(ads(*pairs), PositionProfile(n), ExternalityParams(lam, nu))
    alloc = Allocation.from_ids([f"a{i}" for i in order[:shown]], s)
    return inst, alloc


@settings(max_examples=200, deadline=None)
@given(instances())
def test_total_is_sum_of_per_slot(case):
    inst, alloc = case
    for model in (SEPARABLE, PRACTICAL):
        rep = welfare(alloc, inst, model)
        assert math.isclose(rep.total, sum(rep.per_slot), rel_tol=1e-9, abs_tol=1e-300)


@settings(max_examples=200, deadline=None)
@given(instances())
def test_separable_welfare_is_position_weighted_ecpm(case):
    inst, alloc = case
    expected = sum(inst.n[j] * inst.ad(x).bid * inst.ad(x).quality for j, x in enumerate(alloc.slots) if x)
    assert math.isclose(welfare(alloc, inst, SEPARABLE).total, expected, rel_tol=1e-9, abs_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(instances())
def test_validation_is_idempotent(case):
    inst, _ = case
    once = validate_instance(inst)
    assert validate_instance(once) == once
