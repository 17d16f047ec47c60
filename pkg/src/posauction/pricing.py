"""Cost-per-click rules.

``maintaining_bid_price`` generalizes GSP to any allocator: the smallest
own bid that still keeps the advertiser in its slot, found by bisection
with the allocator re-run at every trial bid.  ``adjacent_swap_price``
makes total welfare indifferent between the current order and swapping
slots ``k`` and ``k+1``.  The two rules differ even in the separable model,
so every price carries the name of its rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .core import Allocation, AuctionInstance
from .ctr_models import PRACTICAL, SEPARABLE, ClickModel
from .errors import NonMonotoneOccupancy, NonPositiveLambda, NotShown, SignViolation, SlotEmpty, ZeroClickRate
from .extern_alloc import bisection_allocate, ecpm_allocate

Allocator = Callable[[AuctionInstance], Allocation]

MAINTAINING = "maintaining"
SWAP = "swap"


@dataclass(frozen=True)
class PriceEntry:
    id: str
    position: int
    price: Optional[float]
    rule: str


@dataclass(frozen=True)
class PriceSchedule:
    entries: tuple[PriceEntry, ...]
    rule: str

    def price_of(self, ad_id: str) -> Optional[float]:
        for e in self.entries:
            if e.id == ad_id:
                return e.price
        raise KeyError(ad_id)


def maintaining_bid_price(
    inst: AuctionInstance,
    allocator: Allocator,
    advertiser_id: str,
    tol: float = 1e-9,
) -> float:
    """Infimum own bid at which ``advertiser_id`` keeps its slot, within ``tol``.

    Raises ``NonMonotoneOccupancy`` if a lower trial bid ever earns a better
    slot than the real bid does.
    """
    slot = allocator(inst).position_of(advertiser_id)
    if slot is None:
        raise NotShown(f"advertiser {advertiser_id!r} is not shown")

    def holds(bid: float) -> bool:
        got = allocator(inst.with_bid(advertiser_id, bid)).position_of(advertiser_id)
        if got is not None and got < slot:
            raise NonMonotoneOccupancy(
                f"advertiser {advertiser_id!r} moves up to slot {got} at bid {bid} "
                f"but holds slot {slot} at its own bid"
            )
        return got == slot

    if holds(0.0):
        return 0.0
    lo, hi = 0.0, inst.ad(advertiser_id).bid
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def adjacent_swap_price(k: int, alloc: Allocation, inst: AuctionInstance, model: ClickModel) -> float:
    """Price in slot ``k`` that makes welfare indifferent to swapping ``k`` and ``k+1``.

    Solves ``c p_k = b_{k+1} p'_k + b_k p'_{k+1} - b_{k+1} p_{k+1} + S' - S``
    where primes mark rates after the swap and ``S`` is the welfare of every
    other slot.
    """
    if k + 1 >= len(alloc) or alloc.slots[k] is None or alloc.slots[k + 1] is None:
        raise SlotEmpty(f"slots {k} and {k + 1} must both be occupied")
    swapped = alloc.swapped(k, k + 1)
    before = model.rates(alloc, inst)
    after = model.rates(swapped, inst)
    if before[k] == 0.0:
        raise ZeroClickRate(f"slot {k} has zero click rate; the price is undefined")
    bids = [0.0 if x is None else inst.ad(x).bid for x in alloc.slots]
    rest_before = sum(bids[j] * before[j] for j in range(len(alloc)) if j not in (k, k + 1))
    rest_after = sum(bids[j] * after[j] for j in range(len(alloc)) if j not in (k, k + 1))
    b_k, b_next = bids[k], bids[k + 1]
    rhs = b_next * after[k] + b_k * after[k + 1] - b_next * before[k + 1] + rest_after - rest_before
    return rhs / before[k]


def price_schedule(
    inst: AuctionInstance,
    alloc: Allocation,
    rule: str,
    allocator: Optional[Allocator] = None,
    model: Optional[ClickModel] = None,
    tol: float = 1e-9,
) -> PriceSchedule:
    """Prices for every shown ad; the swap rule leaves the last shown slot unpriced."""
    entries = []
    shown = alloc.shown
    for j, ad_id in enumerate(shown):
        if rule == MAINTAINING:
            price = maintaining_bid_price(inst, allocator, ad_id, tol)
        elif rule == SWAP:
            price = adjacent_swap_price(j, alloc, inst, model) if j + 1 < len(shown) else None
        else:
            raise ValueError(f"unknown pricing rule {rule!r}")
        entries.append(PriceEntry(ad_id, j, price, rule))
    return PriceSchedule(tuple(entries), rule)


# -- revenue comparison --------------------------------------------------------


def _sign(x: float, zero_tol: float) -> int:
    if abs(x) <= zero_tol:
        return 0
    return 1 if x > 0 else -1


@dataclass(frozen=True)
class RevenueRow:
    position: int
    price_standard: float
    price_externality: float
    delta: float
    quality_gap: float
    comparable: bool
    sign_agrees: bool


@dataclass(frozen=True)
class RevenueComparison:
    allocations_identical: bool
    rows: tuple[RevenueRow, ...]
    standard_allocation: Allocation
    externality_allocation: Allocation
    lam: float

    @property
    def all_signs_agree(self) -> bool:
        return all(r.sign_agrees for r in self.rows)


def revenue_compare(
    inst: AuctionInstance,
    lam: float,
    zero_rtol: float = 1e-9,
    strict: bool = False,
) -> RevenueComparison:
    """Swap prices under the separable model vs. the externality model.

    Rows are filled only when both models pick the same allocation.  A row
    is comparable when its two slots have strictly ordered position scores;
    there the price should rise exactly when the upper ad has the higher
    quality.  Deltas within ``zero_rtol`` of the price scale count as zero.
    With ``strict`` a disagreeing row raises ``SignViolation``.
    """
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    standard = ecpm_allocate(inst)
    external = bisection_allocate(inst, lam).allocation
    if standard != external:
        return RevenueComparison(False, (), standard, external, lam)

    ext_inst = inst.with_params(lam=lam)
    n = inst.n
    shown = standard.shown
    rows = []
    for k in range(len(shown) - 1):
        c1 = adjacent_swap_price(k, standard, inst, SEPARABLE)
        c2 = adjacent_swap_price(k, standard, ext_inst, PRACTICAL)
        delta = c2 - c1
        gap = inst.ad(shown[k]).quality - inst.ad(shown[k + 1]).quality
        comparable = n[k] > n[k + 1]
        zero_tol = zero_rtol * max(1.0, abs(c1), abs(c2))
        agrees = (not comparable) or _sign(delta, zero_tol) == _sign(gap, 0.0)
        rows.append(RevenueRow(k, c1, c2, delta, gap, comparable, agrees))
    result = RevenueComparison(True, tuple(rows), standard, external, lam)
    if strict and not result.all_signs_agree:
        bad = [r.position for r in rows if not r.sign_agrees]
        raise SignViolation(f"price change has the wrong sign at positions {bad}")
    return result
