import csv
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posauction.brand_alloc import make_greedy_vs_standard_instance, make_tight_greedy_instance
from posauction.core import Advertiser, AuctionInstance, BrandPositionProfile, ExternalityParams, PositionProfile
from posauction.documents import (
    CSV_COLUMNS,
    emit_instance,
    emit_report,
    instance_to_dict,
    parse_instance,
    round_sig,
    write_slot_csv,
)
from posauction.errors import InstanceError, ParseError


def doc(**overrides):
    base = {"positions": {"n": [1.0]}, "advertisers": [{"id": "a", "bid": 1.0, "quality": 0.5}]}
    base.update(overrides)
    return json.dumps(base)


def test_minimal_document():
    inst = parse_instance(doc())
    assert (inst.m, inst.s) == (1, 1)
    assert inst.params is None
    assert inst.ad("a").brand is False


def test_ambiguous_profile():
    with pytest.raises(ParseError) as exc:
        parse_instance(doc(positions={"n": [1.0], "beta": [1.0], "eta": [1.0]}))
    assert exc.value.field == "positions"
    assert "ambiguous" in str(exc.value)


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"extra": 1}, "<document>"),
        ({"params": {"lambda": 1.0, "mu": 2.0}}, "params"),
        ({"advertisers": [{"id": "a", "bid": 1.0, "quality": 0.5, "colour": "red"}]}, "advertisers[0]"),
        ({"positions": {"n": [1.0], "k": 2}}, "positions"),
    ],
)
def test_unknown_keys_are_named(overrides, field):
    with pytest.raises(ParseError) as exc:
        parse_instance(doc(**overrides))
    assert exc.value.field == field
    assert "unknown key" in str(exc.value)


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"advertisers": [{"id": "a", "bid": "1", "quality": 0.5}]}, "advertisers[0].bid"),
        ({"advertisers": [{"id": "a", "quality": 0.5}]}, "advertisers[0].bid"),
        ({"advertisers": [{"id": True, "bid": 1, "quality": 0.5}]}, "advertisers[0].id"),
        ({"advertisers": [{"id": "a", "bid": 1, "quality": 0.5, "brand": 1}]}, "advertisers[0].brand"),
        ({"positions": {"beta": [1.0]}}, "positions.eta"),
        ({"positions": {"n": [1.0, "x"]}}, "positions.n[1]"),
    ],
)
def test_field_context(overrides, field):
    with pytest.raises(ParseError) as exc:
        parse_instance(doc(**overrides))
    assert exc.value.field == field


def test_syntax_errors_carry_line():
    with pytest.raises(ParseError) as exc:
        parse_instance('{\n  "positions": {"n": [1.0]},\n  "advertisers": [,]\n}')
    assert exc.value.line == 3


def test_validation_errors_pass_through():
    with pytest.raises(InstanceError) as exc:
        parse_instance(doc(positions={"n": [0.5, 1.0]}, advertisers=[{"id": "a", "bid": -1, "quality": 0.5}]))
    assert set(exc.value.codes) == {"NonMonotonePositions", "NegativeBidOrQuality"}


def test_integer_ids_become_strings():
    inst = parse_instance(doc(advertisers=[{"id": 7, "bid": 1, "quality": 1}]))
    assert inst.advertisers[0].id == "7"


@pytest.mark.parametrize("eps", [0.1, 0.37, 2.0])
def test_tight_instance_round_trip(eps):
    inst = make_tight_greedy_instance(eps)
    assert parse_instance(emit_instance(inst)) == inst


def test_bundled_fixture_matches_generator():
    from importlib.resources import files

    text = files("posauction").joinpath("fixtures/greedy_tight_eps0.1.json").read_text()
    assert parse_instance(text) == make_tight_greedy_instance(0.1)
    text = files("posauction").joinpath("fixtures/greedy_vs_standard_eps0.1.json").read_text()
    assert parse_instance(text) == make_greedy_vs_standard_instance(0.1)


finite = st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def instances(draw):
    m = draw(st.integers(1, 5))
    s = draw(st.integers(1, 5))
    ids = draw(st.lists(st.text(min_size=1, max_size=4), min_size=m, max_size=m, unique=True))
    ads = tuple(Advertiser(i, draw(finite), draw(finite), draw(st.booleans())) for i in ids)
    if draw(st.booleans()):
        profile = PositionProfile(sorted(draw(st.lists(st.floats(0.0, 1.0), min_size=s, max_size=s)), reverse=True))
    else:
        tail = lambda: sorted(draw(st.lists(st.floats(0.0, 1.0), min_size=s - 1, max_size=s - 1)), reverse=True)  # noqa: E731
        profile = BrandPositionProfile((1.0, *tail()), (1.0, *tail()))
    params = draw(st.none() | st.builds(ExternalityParams, finite, st.floats(0.01, 10.0)))
    return AuctionInstance(ads, profile, params)


@settings(max_examples=200, deadline=None)
@given(instances())
def test_round_trip(inst):
    assert parse_instance(emit_instance(inst)) == inst
    assert instance_to_dict(parse_instance(emit_instance(inst))) == instance_to_dict(inst)


def test_report_rounding():
    assert round_sig(1.4 / 6.9) == 0.202898550725
    assert round_sig(0.0) == 0.0
    text = emit_report({"x": [1 / 3, None, "s"], "y": {"z": 2.0}})
    assert json.loads(text) == {"x": [0.333333333333, None, "s"], "y": {"z": 2.0}}


def test_slot_csv(tmp_path):
    path = tmp_path / "slots.csv"
    write_slot_csv(str(path), [{"position": 1, "id": "a", "bid": 2.0, "price": None, "contribution": 1 / 3}])
    rows = list(csv.DictReader(path.open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["price"] == ""
    assert rows[0]["contribution"] == "0.333333333333"
