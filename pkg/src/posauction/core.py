"""Domain types, instance validation and the welfare objective.

Every value here is an immutable dataclass; allocators and pricers are
pure functions of these records.  Slot indices are 0-based throughout the
library (slot 0 is the top of the page); reports add 1 when they print a
position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional, Sequence, Union

from .errors import InstanceError, ModelProfileMismatch, Violation

if TYPE_CHECKING:  # pragma: no cover
    from .ctr_models import ClickModel


@dataclass(frozen=True)
class Advertiser:
    id: str
    bid: float
    quality: float
    brand: bool = False


@dataclass(frozen=True)
class PositionProfile:
    n: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(float(x) for x in self.n))

    @property
    def s(self) -> int:
        return len(self.n)


@dataclass(frozen=True)
class BrandPositionProfile:
    beta: tuple[float, ...]
    eta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(x) for x in self.beta))
        object.__setattr__(self, "eta", tuple(float(x) for x in self.eta))

    @property
    def s(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class ExternalityParams:
    lam: float = 0.0
    nu: float = 1.0


Profile = Union[PositionProfile, BrandPositionProfile]


@dataclass(frozen=True)
class AuctionInstance:
    advertisers: tuple[Advertiser, ...]
    positions: Optional[Profile]
    params: Optional[ExternalityParams] = None

    def __post_init__(self):
        object.__setattr__(self, "advertisers", tuple(self.advertisers))

    @property
    def m(self) -> int:
        return len(self.advertisers)

    @property
    def s(self) -> int:
        return self.positions.s if self.positions is not None else 0

    @property
    def is_brand(self) -> bool:
        return isinstance(self.positions, BrandPositionProfile)

    @property
    def n(self) -> tuple[float, ...]:
        if not isinstance(self.positions, PositionProfile):
            raise ModelProfileMismatch("instance has no separable position profile (n)")
        return self.positions.n

    @property
    def lam(self) -> float:
        return self.params.lam if self.params is not None else 0.0

    @property
    def nu(self) -> float:
        return self.params.nu if self.params is not None else 1.0

    def ad(self, ad_id: str) -> Advertiser:
        for a in self.advertisers:
            if a.id == ad_id:
                return a
        raise KeyError(ad_id)

    def with_bid(self, ad_id: str, bid: float) -> "AuctionInstance":
        """Copy of the instance with one advertiser's bid replaced."""
        if all(a.id != ad_id for a in self.advertisers):
            raise KeyError(ad_id)
        ads = tuple(replace(a, bid=bid) if a.id == ad_id else a for a in self.advertisers)
        return replace(self, advertisers=ads)

    def with_params(self, lam: float | None = None, nu: float | None = None) -> "AuctionInstance":
        base = self.params or ExternalityParams()
        return replace(
            self,
            params=ExternalityParams(
                lam=base.lam if lam is None else lam,
                nu=base.nu if nu is None else nu,
            ),
        )


@dataclass(frozen=True)
class Allocation:
    """Slot ``j`` holds an advertiser id or ``None``; filled from the top."""

    slots: tuple[Optional[str], ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        ids = [x for x in self.slots if x is not None]
        if len(set(ids)) != len(ids):
            raise ValueError(f"advertiser appears twice in allocation {self.slots}")
        seen_empty = False
        for x in self.slots:
            if x is None:
                seen_empty = True
            elif seen_empty:
                raise ValueError(f"empty slot precedes a filled slot in {self.slots}")

    @classmethod
    def from_ids(cls, ids: Sequence[str], s: int) -> "Allocation":
        ids = list(ids)[:s]
        return cls(tuple(ids) + (None,) * (s - len(ids)))

    @property
    def shown(self) -> tuple[str, ...]:
        return tuple(x for x in self.slots if x is not None)

    def position_of(self, ad_id: str) -> Optional[int]:
        try:
            return self.slots.index(ad_id)
        except ValueError:
            return None

    def swapped(self, j: int, k: int) -> "Allocation":
        slots = list(self.slots)
        slots[j], slots[k] = slots[k], slots[j]
        return Allocation(tuple(slots))

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class WelfareReport:
    total: float
    per_slot: tuple[float, ...]
    click_rates: tuple[float, ...]
    model: str
    method: str = ""


def ecpm(a: Advertiser) -> float:
    """eCPM score ``bid * quality`` (no factor-of-1000 scaling)."""
    return a.bid * a.quality


def _non_increasing(xs: Sequence[float]) -> bool:
    return all(xs[i] >= xs[i + 1] for i in range(len(xs) - 1))


def _finite_nonneg(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x >= 0


def validate_instance(raw: AuctionInstance) -> AuctionInstance:
    """Return ``raw`` unchanged, or raise ``InstanceError`` listing every violation."""
    problems: list[Violation] = []

    if raw.m < 1:
        problems.append(Violation("EmptyInstance", "at least one advertiser is required"))
    seen: set[str] = set()
    for a in raw.advertisers:
        if not _finite_nonneg(a.bid):
            problems.append(Violation("NegativeBidOrQuality", f"advertiser {a.id!r} has bid {a.bid!r}"))
        if not _finite_nonneg(a.quality):
            problems.append(
                Violation("NegativeBidOrQuality", f"advertiser {a.id!r} has quality {a.quality!r}")
            )
        if a.id in seen:
            problems.append(Violation("DuplicateId", f"advertiser id {a.id!r} is repeated"))
        seen.add(a.id)

    pos = raw.positions
    if pos is None:
        problems.append(Violation("MissingProfile", "no position profile given"))
    elif isinstance(pos, PositionProfile):
        if pos.s < 1:
            problems.append(Violation("EmptyInstance", "at least one position is required"))
        if not all(_finite_nonneg(x) for x in pos.n):
            problems.append(Violation("NegativePositionScore", f"n must be finite and >= 0: {pos.n}"))
        if not _non_increasing(pos.n):
            problems.append(Violation("NonMonotonePositions", f"n increases somewhere: {pos.n}"))
    elif isinstance(pos, BrandPositionProfile):
        if len(pos.beta) != len(pos.eta):
            problems.append(
                Violation("ProfileLengthMismatch", f"beta has {len(pos.beta)} entries, eta {len(pos.eta)}")
            )
        if pos.s < 1:
            problems.append(Violation("EmptyInstance", "at least one position is required"))
        for name, xs in (("beta", pos.beta), ("eta", pos.eta)):
            if not all(_finite_nonneg(x) and x <= 1 for x in xs):
                problems.append(Violation("BrandProfileOutOfRange", f"{name} values must lie in [0, 1]: {xs}"))
            if not _non_increasing(xs):
                problems.append(Violation("NonMonotonePositions", f"{name} increases somewhere: {xs}"))
            if xs and xs[0] != 1.0:
                problems.append(Violation("UnnormalizedBrandProfile", f"{name}[0] must equal 1, got {xs[0]}"))
    else:
        problems.append(Violation("MissingProfile", f"unsupported profile type {type(pos).__name__}"))

    if raw.params is not None:
        lam, nu = raw.params.lam, raw.params.nu
        if not _finite_nonneg(lam):
            problems.append(Violation("InvalidParams", f"lambda must be finite and >= 0, got {lam!r}"))
        if not (_finite_nonneg(nu) and nu > 0):
            problems.append(Violation("InvalidParams", f"nu must be finite and > 0, got {nu!r}"))

    if problems:
        raise InstanceError(problems)
    return raw


def check_allocation(alloc: Allocation, inst: AuctionInstance) -> None:
    if len(alloc) != inst.s:
        raise ValueError(f"allocation has {len(alloc)} slots, instance has {inst.s}")
    ids = {a.id for a in inst.advertisers}
    for x in alloc.shown:
        if x not in ids:
            raise KeyError(f"allocation shows unknown advertiser {x!r}")


def welfare(alloc: Allocation, inst: AuctionInstance, model: "ClickModel", method: str = "") -> WelfareReport:
    """Per-slot ``bid * click_rate`` and their sum; empty slots contribute 0."""
    check_allocation(alloc, inst)
    rates = model.rates(alloc, inst)
    per_slot = []
    for j, ad_id in enumerate(alloc.slots):
        per_slot.append(0.0 if ad_id is None else inst.ad(ad_id).bid * rates[j])
    return WelfareReport(
        total=math.fsum(per_slot),
        per_slot=tuple(per_slot),
        click_rates=tuple(rates),
        model=model.name,
        method=method,
    )


__all__ = [
    "Advertiser",
    "PositionProfile",
    "BrandPositionProfile",
    "ExternalityParams",
    "AuctionInstance",
    "Allocation",
    "WelfareReport",
    "ecpm",
    "validate_instance",
    "check_allocation",
    "welfare",
]
