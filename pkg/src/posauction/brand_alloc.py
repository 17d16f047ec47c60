"""Allocation when brand and non-brand ads decay differently down the page.

A brand ad with eCPM ``v`` in slot ``j`` is worth ``beta[j] * v``; a
non-brand ad is worth ``eta[j] * v``.  Once the set of brand slots is
fixed, the best placement puts each class in eCPM order into its own slots
from the top, so the exact optimum only has to search over which slots
hold brand ads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Sequence

from .core import Advertiser, Allocation, AuctionInstance, BrandPositionProfile, ecpm
from .errors import (
    EpsilonOutOfRange,
    InfeasibleConfig,
    ModelProfileMismatch,
    MonotonicityViolation,
    NonPositiveEpsilon,
    PreconditionNotMet,
    TooManyPositions,
    ZeroOptimal,
)
from .extern_alloc import ecpm_allocate

ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class BrandConfig:
    """Brand slots and non-brand slots; together they are the occupied top slots."""

    brand: tuple[int, ...]
    nonbrand: tuple[int, ...]

    @classmethod
    def from_brand_slots(cls, brand: Sequence[int], occupied: int) -> "BrandConfig":
        b = tuple(sorted(brand))
        return cls(b, tuple(j for j in range(occupied) if j not in b))

    @property
    def occupied(self) -> int:
        return len(self.brand) + len(self.nonbrand)


@dataclass(frozen=True)
class BrandResult:
    allocation: Allocation
    welfare: float
    config: Optional[BrandConfig] = None
    method: str = ""


def _profile(inst: AuctionInstance) -> BrandPositionProfile:
    if not isinstance(inst.positions, BrandPositionProfile):
        raise ModelProfileMismatch("brand allocation needs a beta/eta position profile")
    return inst.positions


def _by_ecpm(ads) -> list[Advertiser]:
    return sorted(ads, key=lambda a: (-ecpm(a), a.id))


def _split(inst: AuctionInstance) -> tuple[list[Advertiser], list[Advertiser]]:
    return (
        _by_ecpm(a for a in inst.advertisers if a.brand),
        _by_ecpm(a for a in inst.advertisers if not a.brand),
    )


def slot_value(a: Advertiser, j: int, prof: BrandPositionProfile) -> float:
    return (prof.beta[j] if a.brand else prof.eta[j]) * ecpm(a)


def brand_allocation_welfare(alloc: Allocation, inst: AuctionInstance) -> float:
    """Welfare of any allocation under the brand model, summed top-down."""
    prof = _profile(inst)
    total = 0.0
    for j, ad_id in enumerate(alloc.slots):
        if ad_id is not None:
            total += slot_value(inst.ad(ad_id), j, prof)
    return total


def _place(config: BrandConfig, brands, nonbrands, s: int) -> Allocation:
    slots: list[Optional[str]] = [None] * s
    for j, a in zip(config.brand, brands):
        slots[j] = a.id
    for j, a in zip(config.nonbrand, nonbrands):
        slots[j] = a.id
    return Allocation(tuple(slots))


def _check_config(config: BrandConfig, n_brand: int, n_nonbrand: int, s: int) -> None:
    b, nb = set(config.brand), set(config.nonbrand)
    if b & nb:
        raise InfeasibleConfig(f"slots {sorted(b & nb)} are both brand and non-brand")
    if b | nb != set(range(config.occupied)):
        raise InfeasibleConfig(f"brand {config.brand} and non-brand {config.nonbrand} must fill slots from the top")
    if config.occupied > s:
        raise InfeasibleConfig(f"config uses {config.occupied} slots, instance has {s}")
    if len(b) > n_brand or len(nb) > n_nonbrand:
        raise InfeasibleConfig(
            f"config needs {len(b)} brand / {len(nb)} non-brand ads, instance has {n_brand} / {n_nonbrand}"
        )


def brand_welfare(config: BrandConfig, inst: AuctionInstance) -> float:
    """Welfare of ``config`` with each class placed in eCPM order."""
    prof = _profile(inst)
    brands, nonbrands = _split(inst)
    _check_config(config, len(brands), len(nonbrands), inst.s)
    return brand_allocation_welfare(_place(config, brands, nonbrands, inst.s), inst)


def config_allocation(config: BrandConfig, inst: AuctionInstance) -> Allocation:
    brands, nonbrands = _split(inst)
    _check_config(config, len(brands), len(nonbrands), inst.s)
    return _place(config, brands, nonbrands, inst.s)


def _configs(n_brand: int, n_nonbrand: int, start: int, stop: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Every (end, brand slots) with slots ``start..end-1`` occupied."""
    for end in range(start, min(stop, start + n_brand + n_nonbrand) + 1):
        width = end - start
        for k in range(max(0, width - n_nonbrand), min(width, n_brand) + 1):
            for brand in itertools.combinations(range(start, end), k):
                yield end, brand


def _segment_value(brand_slots, end, start, brands, nonbrands, prof) -> float:
    bi = ni = 0
    total = 0.0
    for j in range(start, end):
        if bi < len(brand_slots) and brand_slots[bi] == j:
            total += prof.beta[j] * ecpm(brands[bi])
            bi += 1
        else:
            total += prof.eta[j] * ecpm(nonbrands[ni])
            ni += 1
    return total


def _better(value, end, brand, best) -> bool:
    # exact max; ties prefer more occupied slots, then the smallest brand set
    if best is None:
        return True
    bv, bend, bbrand = best
    if value != bv:
        return value > bv
    if end != bend:
        return end > bend
    return brand < bbrand


def optimal_brand_allocate(inst: AuctionInstance, limit: int = ENUMERATION_LIMIT) -> BrandResult:
    """Exact optimum by enumerating which occupied slots hold brand ads."""
    prof = _profile(inst)
    if inst.s > limit:
        raise TooManyPositions(f"{inst.s} positions exceeds the enumeration limit of {limit}")
    brands, nonbrands = _split(inst)
    best = None
    for end, brand in _configs(len(brands), len(nonbrands), 0, inst.s):
        value = _segment_value(brand, end, 0, brands, nonbrands, prof)
        if _better(value, end, brand, best):
            best = (value, end, brand)
    config = BrandConfig.from_brand_slots(best[2], best[1])
    alloc = _place(config, brands, nonbrands, inst.s)
    return BrandResult(alloc, brand_allocation_welfare(alloc, inst), config, "enumerate")


def _constant(xs: Sequence[float]) -> bool:
    return all(x == xs[0] for x in xs)


def _strictly_decreasing(xs: Sequence[float]) -> bool:
    return all(xs[i] > xs[i + 1] for i in range(len(xs) - 1))


def brand_last_fastpath(inst: AuctionInstance) -> BrandResult:
    """Non-brand ads on top, brand ads below, when beta is flat and eta falls.

    Under that profile no non-brand ad ever sits below a brand ad, so only
    the number of non-brand ads shown is free; when there are no more ads
    than slots it is simply all of them.
    """
    prof = _profile(inst)
    if not _constant(prof.beta):
        raise PreconditionNotMet(f"beta must be constant, got {prof.beta}")
    if not _strictly_decreasing(prof.eta):
        raise PreconditionNotMet(f"eta must be strictly decreasing, got {prof.eta}")
    brands, nonbrands = _split(inst)
    s = inst.s
    best = None
    for shown_nb in range(min(len(nonbrands), s), -1, -1):
        end = min(s, shown_nb + len(brands))
        brand = tuple(range(shown_nb, end))
        value = _segment_value(brand, end, 0, brands, nonbrands, prof)
        if _better(value, end, brand, best):
            best = (value, end, brand)
    config = BrandConfig.from_brand_slots(best[2], best[1])
    alloc = _place(config, brands, nonbrands, s)
    return BrandResult(alloc, brand_allocation_welfare(alloc, inst), config, "fastpath")


def greedy_brand_allocate(inst: AuctionInstance) -> BrandResult:
    """Fill slots top-down with the best remaining position-weighted eCPM.

    Ties go to brand ads, then to the smaller id.
    """
    prof = _profile(inst)
    left = list(inst.advertisers)
    ids: list[str] = []
    for j in range(inst.s):
        if not left:
            break
        pick = min(left, key=lambda a: (-slot_value(a, j, prof), not a.brand, a.id))
        left.remove(pick)
        ids.append(pick.id)
    alloc = Allocation.from_ids(ids, inst.s)
    return BrandResult(alloc, brand_allocation_welfare(alloc, inst), None, "greedy")


def standard_allocate(inst: AuctionInstance) -> BrandResult:
    """The brand-blind eCPM ranking, valued under the brand model."""
    _profile(inst)
    alloc = ecpm_allocate(inst)
    return BrandResult(alloc, brand_allocation_welfare(alloc, inst), None, "rank")


def greedy_ratio(inst: AuctionInstance) -> float:
    best = optimal_brand_allocate(inst).welfare
    if not best > 0:
        raise ZeroOptimal("optimal welfare is zero; the ratio is undefined")
    return greedy_brand_allocate(inst).welfare / best


# -- threshold probe ---------------------------------------------------------


@dataclass(frozen=True)
class ThresholdVerdict:
    kind: str  # "never", "always" or "threshold"
    value: Optional[float] = None
    designated: str = ""
    grid: tuple[float, ...] = ()
    indicator: tuple[bool, ...] = ()
    not_highest: tuple[float, ...] = ()

    def __post_init__(self):
        if (self.kind == "threshold") != (self.value is not None):
            raise ValueError("value must be given exactly when kind == 'threshold'")


def _best_continuation(brands, nonbrands, start, s, prof, first_brand: bool) -> float:
    if first_brand and not brands or not first_brand and not nonbrands:
        return -math.inf
    best = -math.inf
    for end, brand in _configs(len(brands), len(nonbrands), start, s):
        if end == start or (start in brand) != first_brand:
            continue
        best = max(best, _segment_value(brand, end, start, brands, nonbrands, prof))
    return best


def brand_threshold_probe(
    inst: AuctionInstance,
    k: int,
    probe_grid: Sequence[float],
    prefix: Optional[Sequence[str]] = None,
) -> ThresholdVerdict:
    """Sweep the top remaining brand eCPM and watch who takes slot ``k``.

    Slots ``0..k-1`` hold ``prefix`` (by default the first ``k`` ads of the
    optimal allocation).  The remaining brand ad with the highest eCPM is
    designated; for each grid value its eCPM is set to that value and the
    rest of the page is solved exactly.  Slot ``k`` goes to a brand ad when
    the best brand-led continuation is at least the best non-brand-led one.
    """
    prof = _profile(inst)
    if not 0 <= k < inst.s:
        raise ValueError(f"k={k} must leave at least one open slot among {inst.s}")
    grid = tuple(float(v) for v in probe_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("probe grid must be strictly ascending")
    if prefix is None:
        prefix = optimal_brand_allocate(inst).allocation.slots[:k]
    prefix = tuple(prefix)
    if len(prefix) != k or any(x is None for x in prefix):
        raise PreconditionNotMet(f"the first {k} slots must all be filled, got {prefix}")

    rest = [a for a in inst.advertisers if a.id not in prefix]
    brands = _by_ecpm(a for a in rest if a.brand)
    nonbrands = _by_ecpm(a for a in rest if not a.brand)
    if not brands:
        raise PreconditionNotMet("no brand advertiser remains after the fixed prefix")
    designated = brands[0]
    others = brands[1:]
    runner_up = ecpm(others[0]) if others else -math.inf

    indicator = []
    for v in grid:
        swept = _by_ecpm([replace(designated, bid=v, quality=1.0)] + others)
        lead_brand = _best_continuation(swept, nonbrands, k, inst.s, prof, True)
        lead_other = _best_continuation(swept, nonbrands, k, inst.s, prof, False)
        indicator.append(lead_brand >= lead_other)

    for a, b, v in zip(indicator, indicator[1:], grid[1:]):
        if a and not b:
            raise MonotonicityViolation(f"brand stops winning slot {k} as its eCPM rises to {v}")

    if not any(indicator):
        kind, value = "never", None
    elif all(indicator):
        kind, value = "always", None
    else:
        kind, value = "threshold", grid[indicator.index(True)]
    return ThresholdVerdict(
        kind=kind,
        value=value,
        designated=designated.id,
        grid=grid,
        indicator=tuple(indicator),
        not_highest=tuple(v for v in grid if v < runner_up),
    )


# -- worst-case instance generators -------------------------------------------


def make_tight_greedy_instance(epsilon: float) -> AuctionInstance:
    """Two slots where greedy earns ``1 + eps`` and the optimum ``2 + eps``."""
    if not epsilon > 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {epsilon}")
    return AuctionInstance(
        advertisers=(
            Advertiser("B1", 1.0 + epsilon, 1.0, True),
            Advertiser("N1", 1.0, 1.0, False),
        ),
        positions=BrandPositionProfile(beta=(1.0, 1.0), eta=(1.0, 0.0)),
    )


def make_greedy_vs_standard_instance(epsilon: float) -> AuctionInstance:
    """Three slots where greedy (11) loses to the brand-blind ranking (11.5 + eps/2)."""
    if not 0 < epsilon < 1:
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1), got {epsilon}")
    return AuctionInstance(
        advertisers=(
            Advertiser("B1", 10.0, 1.0, True),
            Advertiser("B2", 1.0, 1.0, True),
            Advertiser("N1", 1.0 + epsilon, 1.0, False),
        ),
        positions=BrandPositionProfile(beta=(1.0, 1.0, 1.0), eta=(1.0, 0.5, 0.0)),
    )
