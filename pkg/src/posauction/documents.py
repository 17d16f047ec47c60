"""Instance documents (JSON) and report serialization.

An instance document looks like::

    {
      "positions": {"n": [1.0, 0.5]},            # or {"beta": [...], "eta": [...]}
      "advertisers": [{"id": "A", "bid": 1.0, "quality": 1.0, "brand": false}],
      "params": {"lambda": 10.0, "nu": 1.0}       # optional
    }

Unknown keys are rejected.  Parsing validates the instance and passes every
validation error through.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Any, Iterable

from .core import (
    Advertiser,
    AuctionInstance,
    BrandPositionProfile,
    ExternalityParams,
    PositionProfile,
    validate_instance,
)
from .errors import ParseError

REPORT_DIGITS = 12

_TOP_KEYS = {"positions", "advertisers", "params"}
_AD_KEYS = {"id", "bid", "quality", "brand"}
_PARAM_KEYS = {"lambda", "nu"}


def _number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", field=field)
    return float(value)


def _reject_unknown(obj: dict, allowed: set[str], field: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ParseError(f"unknown key(s) {extra}; allowed: {sorted(allowed)}", field=field)


def _object(value: Any, field: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"expected an object, got {type(value).__name__}", field=field)
    return value


def _number_list(value: Any, field: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ParseError(f"expected a list of numbers, got {type(value).__name__}", field=field)
    return tuple(_number(x, f"{field}[{i}]") for i, x in enumerate(value))


def instance_from_dict(doc: Any) -> AuctionInstance:
    """Build (without validating) an instance from a decoded document."""
    doc = _object(doc, "<document>")
    _reject_unknown(doc, _TOP_KEYS, "<document>")

    if "positions" not in doc:
        raise ParseError("missing required key", field="positions")
    pos = _object(doc["positions"], "positions")
    keys = set(pos)
    if "n" in keys and keys & {"beta", "eta"}:
        raise ParseError("give either 'n' or 'beta'/'eta', not both (ambiguous profile)", field="positions")
    if "n" in keys:
        _reject_unknown(pos, {"n"}, "positions")
        profile = PositionProfile(_number_list(pos["n"], "positions.n"))
    elif keys & {"beta", "eta"}:
        _reject_unknown(pos, {"beta", "eta"}, "positions")
        for k in ("beta", "eta"):
            if k not in pos:
                raise ParseError("brand profiles need both 'beta' and 'eta'", field=f"positions.{k}")
        profile = BrandPositionProfile(
            _number_list(pos["beta"], "positions.beta"), _number_list(pos["eta"], "positions.eta")
        )
    else:
        raise ParseError("expected 'n' or 'beta'/'eta'", field="positions")

    raw_ads = doc.get("advertisers")
    if not isinstance(raw_ads, list):
        raise ParseError("expected a list of advertisers", field="advertisers")
    ads = []
    for i, raw in enumerate(raw_ads):
        where = f"advertisers[{i}]"
        raw = _object(raw, where)
        _reject_unknown(raw, _AD_KEYS, where)
        for k in ("id", "bid", "quality"):
            if k not in raw:
                raise ParseError("missing required key", field=f"{where}.{k}")
        ad_id = raw["id"]
        if isinstance(ad_id, bool) or not isinstance(ad_id, (str, int)):
            raise ParseError(f"id must be a string or integer, got {ad_id!r}", field=f"{where}.id")
        brand = raw.get("brand", False)
        if not isinstance(brand, bool):
            raise ParseError(f"brand must be true or false, got {brand!r}", field=f"{where}.brand")
        ads.append(
            Advertiser(
                id=str(ad_id),
                bid=_number(raw["bid"], f"{where}.bid"),
                quality=_number(raw["quality"], f"{where}.quality"),
                brand=brand,
            )
        )

    params = None
    if "params" in doc:
        p = _object(doc["params"], "params")
        _reject_unknown(p, _PARAM_KEYS, "params")
        params = ExternalityParams(
            lam=_number(p.get("lambda", 0.0), "params.lambda"),
            nu=_number(p.get("nu", 1.0), "params.nu"),
        )
    return AuctionInstance(tuple(ads), profile, params)


def parse_instance(text: str) -> AuctionInstance:
    """Decode, build and validate an instance document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return validate_instance(instance_from_dict(doc))


def instance_to_dict(inst: AuctionInstance) -> dict:
    if isinstance(inst.positions, BrandPositionProfile):
        positions = {"beta": list(inst.positions.beta), "eta": list(inst.positions.eta)}
    else:
        positions = {"n": list(inst.positions.n)}
    doc = {
        "positions": positions,
        "advertisers": [
            {"id": a.id, "bid": a.bid, "quality": a.quality, "brand": a.brand} for a in inst.advertisers
        ],
    }
    if inst.params is not None:
        doc["params"] = {"lambda": inst.params.lam, "nu": inst.params.nu}
    return doc


def emit_instance(inst: AuctionInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


# -- reports -------------------------------------------------------------------


def round_sig(x: float, digits: int = REPORT_DIGITS) -> float:
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{digits}g}")


def _rounded(obj: Any) -> Any:
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def emit_report(report: dict) -> str:
    """Stable JSON text: insertion-ordered keys, floats at 12 significant digits."""
    return json.dumps(_rounded(report), indent=2, allow_nan=False) + "\n"


CSV_COLUMNS = ("position", "id", "bid", "quality", "click_rate", "price", "contribution")


def write_slot_csv(path: str, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in CSV_COLUMNS})


def _csv_cell(v: Any) -> Any:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round_sig(v))
    return v
