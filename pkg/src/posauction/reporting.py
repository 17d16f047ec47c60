"""Glue between the CLI and the library: run a model/method, build a report dict."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import brand_alloc as ba
from . import extern_alloc as ea
from .core import (
    Allocation,
    AuctionInstance,
    BrandPositionProfile,
    ExternalityParams,
    PositionProfile,
    WelfareReport,
    welfare,
)
from .ctr_models import BRAND, PRACTICAL, SEPARABLE, check_axioms
from .errors import InputError, ModelProfileMismatch
from .pricing import MAINTAINING, SWAP, price_schedule, revenue_compare

METHODS = {
    "separable": ("rank", "bisection", "brute"),
    "externality": ("rank", "bisection", "brute"),
    "brand": ("rank", "enumerate", "greedy", "fastpath"),
}
DEFAULT_METHOD = {"separable": "rank", "externality": "bisection", "brand": "enumerate"}
CLICK_MODELS = {"separable": SEPARABLE, "externality": PRACTICAL, "brand": BRAND}
_BRAND_METHODS = {
    "rank": ba.standard_allocate,
    "enumerate": ba.optimal_brand_allocate,
    "greedy": ba.greedy_brand_allocate,
    "fastpath": ba.brand_last_fastpath,
}


class ConflictingFlags(InputError):
    pass


@dataclass
class Run:
    inst: AuctionInstance
    model: str
    method: str
    allocation: Allocation
    welfare: WelfareReport
    diagnostics: dict = field(default_factory=dict)


def resolve(inst: AuctionInstance, model: str, method: Optional[str], lam: Optional[float]) -> tuple[AuctionInstance, str]:
    """Check flag compatibility; return the instance the model should see and the method."""
    if model not in METHODS:
        raise ConflictingFlags(f"unknown model {model!r}")
    method = method or DEFAULT_METHOD[model]
    if method not in METHODS[model]:
        raise ConflictingFlags(
            f"--method {method} does not apply to --model {model}; choose from {list(METHODS[model])}"
        )
    if model == "brand":
        if not isinstance(inst.positions, BrandPositionProfile):
            raise ModelProfileMismatch("--model brand needs a beta/eta position profile")
        if lam is not None:
            raise ConflictingFlags("--lambda does not apply to --model brand")
        return inst, method
    if not isinstance(inst.positions, PositionProfile):
        raise ModelProfileMismatch(f"--model {model} needs an 'n' position profile")
    if model == "separable":
        if lam not in (None, 0.0):
            raise ConflictingFlags("--model separable fixes lambda = 0")
        return inst.with_params(lam=0.0, nu=1.0), method
    return inst.with_params(lam=lam), method


def allocator_for(model: str, method: str, show_all: bool = False) -> Callable[[AuctionInstance], Allocation]:
    if model == "brand":
        fn = _BRAND_METHODS[method]
        return lambda inst: fn(inst).allocation
    if method == "rank":
        return ea.ecpm_allocate
    if method == "bisection":
        return lambda inst: ea.bisection_allocate(inst, show_all=show_all).allocation
    return lambda inst: ea.brute_force_allocate(inst, show_all=show_all).allocation


def _click_warnings(rates, alloc: Allocation) -> list[str]:
    return [
        f"slot {j + 1} ({alloc.slots[j]}) has click rate {p:.12g} > 1"
        for j, p in enumerate(rates)
        if alloc.slots[j] is not None and p > 1.0
    ]


def run_allocation(
    inst: AuctionInstance,
    model: str,
    method: Optional[str] = None,
    lam: Optional[float] = None,
    show_all: bool = False,
) -> Run:
    inst, method = resolve(inst, model, method, lam)
    if show_all and method not in ("bisection", "brute"):
        raise ConflictingFlags("--show-all applies only to --method bisection or brute")
    diag: dict = {}
    if model == "brand":
        res = _BRAND_METHODS[method](inst)
        alloc = res.allocation
        if res.config is not None:
            diag["brand_positions"] = [j + 1 for j in res.config.brand]
            diag["nonbrand_positions"] = [j + 1 for j in res.config.nonbrand]
    elif method == "rank":
        alloc = ea.ecpm_allocate(inst)
        diag["s_star"] = ea.externality_welfare(alloc, inst)
    elif method == "bisection":
        res = ea.bisection_allocate(inst, show_all=show_all)
        alloc = res.allocation
        st = res.state
        diag.update(
            s_star=res.s_star,
            iterations=st.iterations,
            stopped_by=st.stopped_by,
            initial_bracket=list(st.initial),
            final_bracket=[st.s_low, st.s_high],
            history=[list(h) for h in st.history],
            skipped=list(res.skipped),
        )
    else:
        res = ea.brute_force_allocate(inst, show_all=show_all)
        alloc = res.allocation
        diag["s_star"] = res.s_star
        diag["arrangements"] = ea.arrangement_count(inst.m, inst.s)
    if show_all:
        diag["show_all"] = True
    report = welfare(alloc, inst, CLICK_MODELS[model], method)
    diag["warnings"] = _click_warnings(report.click_rates, alloc)
    return Run(inst, model, method, alloc, report, diag)


def _welfare_dict(w: WelfareReport) -> dict:
    return {"total": w.total, "per_slot": list(w.per_slot), "model": w.model, "method": w.method}


def slot_rows(run: Run, prices: Optional[dict] = None) -> list[dict]:
    rows = []
    for j, ad_id in enumerate(run.allocation.slots):
        a = run.inst.ad(ad_id) if ad_id is not None else None
        rows.append(
            {
                "position": j + 1,
                "id": ad_id,
                "bid": a.bid if a else None,
                "quality": a.quality if a else None,
                "click_rate": run.welfare.click_rates[j],
                "price": (prices or {}).get(ad_id),
                "contribution": run.welfare.per_slot[j],
            }
        )
    return rows


def allocation_report(run: Run) -> dict:
    return {
        "command": "allocate",
        "model": run.model,
        "method": run.method,
        "allocation": list(run.allocation.slots),
        "welfare": _welfare_dict(run.welfare),
        "diagnostics": run.diagnostics,
    }


def price_report(run: Run, rule: str, tol: float = 1e-9, show_all: bool = False) -> tuple[dict, dict]:
    schedule = price_schedule(
        run.inst,
        run.allocation,
        rule,
        allocator=allocator_for(run.model, run.method, show_all) if rule == MAINTAINING else None,
        model=CLICK_MODELS[run.model] if rule == SWAP else None,
        tol=tol,
    )
    prices = {e.id: e.price for e in schedule.entries}
    report = {
        "command": "price",
        "model": run.model,
        "method": run.method,
        "rule": rule,
        "allocation": list(run.allocation.slots),
        "welfare": _welfare_dict(run.welfare),
        "prices": [{"position": e.position + 1, "id": e.id, "price": e.price, "rule": e.rule} for e in schedule.entries],
        "diagnostics": run.diagnostics,
    }
    return report, prices


def revenue_report(inst: AuctionInstance, lam: float) -> dict:
    if not isinstance(inst.positions, PositionProfile):
        raise ModelProfileMismatch("compare-revenue needs an 'n' position profile")
    cmp = revenue_compare(inst, lam, strict=True)
    return {
        "command": "compare-revenue",
        "lambda": lam,
        "allocations_identical": cmp.allocations_identical,
        "standard_allocation": list(cmp.standard_allocation.slots),
        "externality_allocation": list(cmp.externality_allocation.slots),
        "rows": [
            {
                "position": r.position + 1,
                "price_standard": r.price_standard,
                "price_externality": r.price_externality,
                "delta": r.delta,
                "quality_gap": r.quality_gap,
                "comparable": r.comparable,
                "sign_agrees": r.sign_agrees,
            }
            for r in cmp.rows
        ],
    }


def ratio_report(inst: AuctionInstance) -> dict:
    if not isinstance(inst.positions, BrandPositionProfile):
        raise ModelProfileMismatch("ratio needs a beta/eta position profile")
    greedy = ba.greedy_brand_allocate(inst)
    best = ba.optimal_brand_allocate(inst)
    standard = ba.standard_allocate(inst)
    return {
        "command": "ratio",
        "greedy": {"allocation": list(greedy.allocation.slots), "welfare": greedy.welfare},
        "optimal": {"allocation": list(best.allocation.slots), "welfare": best.welfare},
        "standard": {"allocation": list(standard.allocation.slots), "welfare": standard.welfare},
        "ratio": ba.greedy_ratio(inst),
    }


def axioms_report(model: str, lam: float, nu: float, grid, n_vec, tolerance: float) -> dict:
    click_model = {"separable": SEPARABLE, "practical": PRACTICAL, "externality": PRACTICAL}.get(model)
    if click_model is None:
        raise ConflictingFlags(f"check-axioms supports separable or practical, not {model!r}")
    rep = check_axioms(
        click_model, len(n_vec), grid, n_vec, tolerance=tolerance, params=ExternalityParams(lam, nu)
    )
    return {
        "command": "check-axioms",
        "model": click_model.name,
        "lambda": lam,
        "nu": nu,
        "grid": sorted(set(float(g) for g in grid)),
        "n": list(n_vec),
        "verdicts": rep.verdicts,
        "summary": rep.lines(),
        "witnesses": {
            a: [{"q": list(w.q), "n": list(w.n), "slots": [s + 1 for s in w.slots], "values": list(w.values), "note": w.note} for w in ws]
            for a, ws in rep.witnesses.items()
            if ws
        },
    }
