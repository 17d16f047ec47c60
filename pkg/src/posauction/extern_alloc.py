"""Welfare-maximizing allocation under the externality click model.

With ``nu = 1`` the welfare of an arrangement is

    S = sum_j n_j b_j q_j / (1 + lam * sum_j n_j q_j)

and an adjacent or distant swap helps iff the lower ad's score
``b q - lam q S`` beats the upper one's.  ``bisection_allocate`` searches
for the fixed point of ``phi(S)``, the best achievable score sum at ``S``;
``brute_force_allocate`` enumerates every arrangement and is the oracle.
``nu`` never affects which allocation wins, so everything here uses 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Advertiser, Allocation, AuctionInstance, ecpm
from .errors import InstanceTooLarge, NoCandidates, NotOrdered, SlotEmpty

BRUTE_FORCE_LIMIT = 8


def _lam(inst: AuctionInstance, lam: Optional[float]) -> float:
    return inst.lam if lam is None else float(lam)


def externality_welfare(alloc: Allocation, inst: AuctionInstance, lam: Optional[float] = None) -> float:
    """Welfare of ``alloc`` under the externality model with ``nu = 1``."""
    lam = _lam(inst, lam)
    n = inst.n
    value = 0.0
    crowding = 0.0
    for j, ad_id in enumerate(alloc.slots):
        if ad_id is None:
            continue
        a = inst.ad(ad_id)
        value += n[j] * a.bid * a.quality
        crowding += n[j] * a.quality
    return value / (1.0 + lam * crowding)


def score(a: Advertiser, S: float, lam: float) -> float:
    return a.bid * a.quality - lam * a.quality * S


def swap_improves(
    k: int,
    m_idx: int,
    alloc: Allocation,
    inst: AuctionInstance,
    lam: Optional[float] = None,
    rtol: float = 1e-12,
) -> bool:
    """Whether exchanging the ads in slots ``k < m_idx`` raises welfare.

    Compares scores at the current allocation's welfare.  Score gaps within
    ``rtol`` of the eCPM scale count as ties; slots with equal position
    scores never improve (the exchange leaves welfare unchanged).
    """
    if not k < m_idx:
        raise NotOrdered(f"need k < m, got k={k}, m={m_idx}")
    top, bottom = alloc.slots[k], alloc.slots[m_idx]
    if top is None or bottom is None:
        raise SlotEmpty(f"slots {k} and {m_idx} must both be occupied")
    n = inst.n
    if not n[k] > n[m_idx]:
        return False
    lam = _lam(inst, lam)
    S = externality_welfare(alloc, inst, lam)
    a_top, a_bottom = inst.ad(top), inst.ad(bottom)
    gap = score(a_bottom, S, lam) - score(a_top, S, lam)
    scale = max(abs(ecpm(a_top)), abs(ecpm(a_bottom)), abs(lam * a_top.quality * S), abs(lam * a_bottom.quality * S))
    return gap > rtol * scale


def _ranked(inst: AuctionInstance, S: float, lam: float, show_all: bool = False) -> list[Advertiser]:
    # score descending, id ascending; negative scores are dropped unless show_all
    keep = [a for a in inst.advertisers if show_all or score(a, S, lam) >= 0.0]
    keep.sort(key=lambda a: (-score(a, S, lam), a.id))
    return keep[: inst.s]


def rank_by_score(
    inst: AuctionInstance, S: float, lam: Optional[float] = None, show_all: bool = False
) -> Allocation:
    """Top ``s`` ads by score at ``S``; ``show_all`` keeps negative scores too."""
    return Allocation.from_ids([a.id for a in _ranked(inst, S, _lam(inst, lam), show_all)], inst.s)


def ecpm_allocate(inst: AuctionInstance) -> Allocation:
    """The standard ranking: eCPM descending, ids ascending on ties."""
    return rank_by_score(inst, 0.0, 0.0)


def phi(S: float, inst: AuctionInstance, lam: Optional[float] = None, show_all: bool = False) -> float:
    """Best score sum ``sum_j n_j (b q - lam q S)`` over arrangements, at ``S``."""
    lam = _lam(inst, lam)
    n = inst.n
    return sum(n[j] * score(a, S, lam) for j, a in enumerate(_ranked(inst, S, lam, show_all)))


@dataclass
class BisectionState:
    s_low: float
    s_high: float
    iterations: int = 0
    history: list[tuple[float, float]] = field(default_factory=list)
    initial: tuple[float, float] = (0.0, 0.0)
    stopped_by: str = ""


@dataclass
class ExternAllocationResult:
    allocation: Allocation
    s_star: float
    state: Optional[BisectionState] = None
    skipped: tuple[str, ...] = ()
    method: str = ""


def bisection_allocate(
    inst: AuctionInstance,
    lam: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: int = 10_000,
    show_all: bool = False,
) -> ExternAllocationResult:
    """Bracket the optimal welfare and bisect until both ends rank alike.

    ``s_low`` starts at the eCPM ranking's welfare and ``s_high`` at its
    undiscounted value ``sum n b q``.  At each midpoint, ``phi(mid) < mid``
    moves the upper end down and otherwise the lower end up.  The loop
    also stops once the bracket is narrower than ``tol`` (default
    ``1e-12 * s_high``), returning the lower end's ranking.

    By default ads whose score is negative stay off the page.  ``show_all``
    instead ranks a fixed set: the top ``min(m, s)`` ads are always shown.
    """
    if inst.m == 0:
        raise NoCandidates("no advertisers to allocate")
    lam = _lam(inst, lam)
    start = ecpm_allocate(inst)
    s_low = externality_welfare(start, inst, lam)
    s_high = externality_welfare(start, inst, 0.0)
    if tol is None:
        tol = 1e-12 * s_high
    state = BisectionState(s_low, s_high, initial=(s_low, s_high))

    while True:
        low_rank = rank_by_score(inst, state.s_low, lam, show_all)
        if low_rank == rank_by_score(inst, state.s_high, lam, show_all):
            state.stopped_by = "rankings"
            break
        if state.s_high - state.s_low < tol or state.iterations >= max_iter:
            state.stopped_by = "tolerance"
            break
        mid = 0.5 * (state.s_low + state.s_high)
        if not state.s_low < mid < state.s_high:
            state.stopped_by = "tolerance"
            break
        value = phi(mid, inst, lam, show_all)
        state.history.append((mid, value))
        if value < mid:
            state.s_high = mid
        else:
            state.s_low = mid
        state.iterations += 1

    shown = set(low_rank.shown)
    skipped = () if show_all else tuple(
        sorted(a.id for a in inst.advertisers if a.id not in shown and score(a, state.s_low, lam) < 0.0)
    )
    return ExternAllocationResult(
        allocation=low_rank,
        s_star=externality_welfare(low_rank, inst, lam),
        state=state,
        skipped=skipped,
        method="bisection",
    )


def arrangement_count(m: int, s: int) -> int:
    return sum(math.perm(m, t) for t in range(min(m, s) + 1))


def brute_force_allocate(
    inst: AuctionInstance,
    lam: Optional[float] = None,
    limit: int = BRUTE_FORCE_LIMIT,
    rtol: float = 1e-12,
    show_all: bool = False,
) -> ExternAllocationResult:
    """Exhaustive search over ordered subsets of ads placed from the top.

    Welfare values within ``rtol`` of the best count as ties, which go to
    the lexicographically smallest sequence of ids.  ``show_all`` restricts
    the search to arrangements that fill ``min(m, s)`` slots.
    """
    if inst.m > limit:
        raise InstanceTooLarge(f"{inst.m} advertisers exceeds the brute-force limit of {limit}")
    lam = _lam(inst, lam)
    ads = inst.advertisers
    ids = [a.id for a in ads]
    n = np.asarray(inst.n, dtype=float)
    bq = np.array([a.bid * a.quality for a in ads], dtype=float)
    q = np.array([a.quality for a in ads], dtype=float)

    full = min(inst.m, inst.s)
    candidates: list[tuple[float, tuple[int, ...]]] = [] if show_all and full else [(0.0, ())]
    for t in range(full if show_all else 1, full + 1):
        if t == 0:
            continue
        perms = np.array(list(itertools.permutations(range(inst.m), t)), dtype=np.intp)
        values = (bq[perms] * n[:t]).sum(axis=1) / (1.0 + lam * (q[perms] * n[:t]).sum(axis=1))
        best = values.max()
        for row in np.flatnonzero(values >= best - rtol * abs(best)):
            candidates.append((float(values[row]), tuple(int(x) for x in perms[row])))

    top = max(v for v, _ in candidates)
    tied = [tuple(ids[i] for i in p) for v, p in candidates if v >= top - rtol * abs(top)]
    winner = Allocation.from_ids(min(tied), inst.s)
    return ExternAllocationResult(
        allocation=winner,
        s_star=externality_welfare(winner, inst, lam),
        method="brute",
    )
