"""Click-through-rate models and a grid-based axiom checker.

A position model evaluates ``f(j, q, n, params)``: the click rate of the ad
in slot ``j`` given the qualities ``q`` of the ads in every slot (0.0 for an
empty slot) and the position scores ``n``.  Rates are not clamped to
[0, 1]; calibrating ``n``, ``q``, ``lam`` and ``nu`` is the caller's job.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .core import Allocation, AuctionInstance, BrandPositionProfile, ExternalityParams, PositionProfile
from .errors import GridTooSmall, ModelProfileMismatch, SlotIndexError

Evaluator = Callable[[int, Sequence[float], Sequence[float], Optional[ExternalityParams]], float]

AXIOMS = ("A1", "A2", "A3", "A4", "A5")


def _check_slot(j: int, s: int) -> None:
    if not 0 <= j < s:
        raise SlotIndexError(f"slot {j} out of range for {s} positions")


def separable_ctr(j: int, q: Sequence[float], n: Sequence[float]) -> float:
    """Standard model: ``n[j] * q[j]``, independent of the other slots."""
    _check_slot(j, len(n))
    return n[j] * q[j]


def practical_ctr(j: int, q: Sequence[float], n: Sequence[float], params: ExternalityParams) -> float:
    """Externality model ``nu * n[j] * q[j] / (1 + lam * sum_k n[k] * q[k])``.

    Empty slots carry quality 0 and so drop out of the sum.
    """
    _check_slot(j, len(n))
    crowding = sum(nk * qk for nk, qk in zip(n, q))
    return params.nu * n[j] * q[j] / (1.0 + params.lam * crowding)


class ClickModel:
    """A named click-rate evaluator for instances with a ``PositionProfile``."""

    profile = PositionProfile

    def __init__(self, name: str, evaluator: Evaluator):
        self.name = name
        self.evaluator = evaluator

    def __call__(self, j, q, n, params=None) -> float:
        return self.evaluator(j, q, n, params)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"

    def _require_profile(self, inst: AuctionInstance) -> None:
        if not isinstance(inst.positions, self.profile):
            raise ModelProfileMismatch(
                f"model {self.name!r} needs a {self.profile.__name__}, "
                f"instance has {type(inst.positions).__name__}"
            )

    def rates(self, alloc: Allocation, inst: AuctionInstance) -> list[float]:
        """Click rate of every slot under ``alloc`` (0.0 for empty slots)."""
        self._require_profile(inst)
        q = [0.0 if x is None else inst.ad(x).quality for x in alloc.slots]
        n = inst.n
        params = inst.params or ExternalityParams()
        return [
            0.0 if alloc.slots[j] is None else self.evaluator(j, q, n, params) for j in range(len(n))
        ]


class BrandClickModel(ClickModel):
    """``beta[j] * q`` for brand ads, ``eta[j] * q`` for the rest."""

    profile = BrandPositionProfile

    def __init__(self, name: str = "brand"):
        super().__init__(name, self._unsupported)

    @staticmethod
    def _unsupported(*args):
        raise TypeError("the brand model is evaluated per allocation, not from a quality vector")

    def rates(self, alloc: Allocation, inst: AuctionInstance) -> list[float]:
        self._require_profile(inst)
        prof = inst.positions
        out = []
        for j, x in enumerate(alloc.slots):
            if x is None:
                out.append(0.0)
                continue
            a = inst.ad(x)
            out.append((prof.beta[j] if a.brand else prof.eta[j]) * a.quality)
        return out


SEPARABLE = ClickModel("separable", lambda j, q, n, params=None: separable_ctr(j, q, n))
PRACTICAL = ClickModel("externality", lambda j, q, n, params: practical_ctr(j, q, n, params or ExternalityParams()))
BRAND = BrandClickModel()

_MODELS = {"separable": SEPARABLE, "externality": PRACTICAL, "practical": PRACTICAL, "brand": BRAND}


def get_model(name: str) -> ClickModel:
    try:
        return _MODELS[name]
    except KeyError:
        raise ValueError(f"unknown click model {name!r}; choose from {sorted(_MODELS)}") from None


# -- axiom checker -----------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    axiom: str
    q: tuple[float, ...]
    n: tuple[float, ...]
    slots: tuple[int, ...]
    values: tuple[float, ...]
    note: str = ""


@dataclass
class AxiomReport:
    verdicts: dict[str, str]
    witnesses: dict[str, list[Witness]]
    violations: dict[str, int]
    comparisons: dict[str, int]
    model: str = ""

    def passed(self, axiom: str) -> bool:
        """True for ``pass`` and for ``vacuous`` (held with equality everywhere)."""
        return self.verdicts[axiom] in ("pass", "vacuous")

    @property
    def all_passed(self) -> bool:
        return all(self.passed(a) for a in AXIOMS)

    def lines(self) -> list[str]:
        out = []
        for a in AXIOMS:
            v = self.verdicts[a]
            label = {"pass": "pass on grid", "vacuous": "pass on grid (equality only)", "fail": "FAIL"}[v]
            out.append(f"{a}: {label} ({self.comparisons[a]} comparisons, {self.violations[a]} violations)")
        return out


class _Tally:
    def __init__(self, max_witnesses: int):
        self.max_witnesses = max_witnesses
        self.witnesses: list[Witness] = []
        self.violations = 0
        self.comparisons = 0
        self.strict = 0

    def fail(self, w: Witness) -> None:
        self.violations += 1
        if len(self.witnesses) < self.max_witnesses:
            self.witnesses.append(w)

    def verdict(self, needs_strict: bool) -> str:
        if self.violations:
            return "fail"
        if self.comparisons == 0 or (needs_strict and self.strict == 0):
            return "vacuous"
        return "pass"


def check_axioms(
    model: ClickModel,
    s: int,
    quality_grid: Sequence[float],
    n_vec: Sequence[float],
    tolerance: float = 1e-12,
    params: ExternalityParams | None = None,
    position_grid: Sequence[float] | None = None,
    max_witnesses: int = 5,
) -> AxiomReport:
    """Evaluate A1-A5 exhaustively on a finite grid of quality vectors.

    A2/A3 need a strict increase larger than ``tolerance`` between
    consecutive grid values; A4 allows increases up to ``tolerance``; A5
    compares perturbation magnitudes at every pair of positions with
    strictly ordered scores.  A4/A5 that only ever hold with equality are
    reported as ``vacuous``.
    """
    grid = sorted(set(float(x) for x in quality_grid))
    if len(grid) < 3:
        raise GridTooSmall(f"need at least 3 distinct quality values, got {grid}")
    n = tuple(float(x) for x in n_vec)
    if len(n) != s:
        raise ValueError(f"n_vec has {len(n)} entries but s={s}")
    pgrid = sorted(set(float(x) for x in (position_grid if position_grid is not None else grid)))
    params = params or ExternalityParams()
    f = lambda j, q, nn=n: model(j, q, nn, params)  # noqa: E731
    tally = {a: _Tally(max_witnesses) for a in AXIOMS}
    vectors = list(itertools.product(grid, repeat=s))

    # A1
    t = tally["A1"]
    for q in vectors:
        for j in range(s):
            if q[j] == 0.0:
                t.comparisons += 1
                v = f(j, q)
                if abs(v) > tolerance:
                    t.fail(Witness("A1", q, n, (j,), (v,), "zero quality, nonzero click rate"))
    for j in range(s):
        nz = tuple(0.0 if k >= j else n[k] for k in range(s))
        for q in vectors:
            t.comparisons += 1
            v = f(j, q, nz)
            if abs(v) > tolerance:
                t.fail(Witness("A1", q, nz, (j,), (v,), "zero position score, nonzero click rate"))

    def with_value(q, j, x):
        return q[:j] + (x,) + q[j + 1 :]

    others = {j: list(itertools.product(grid, repeat=s - 1)) for j in range(s)}

    # A2: increasing in own quality where n_j > 0
    t = tally["A2"]
    for j in range(s):
        if n[j] <= 0:
            continue
        for rest in others[j]:
            base = rest[:j] + (grid[0],) + rest[j:]
            for lo, hi in zip(grid, grid[1:]):
                a, b = f(j, with_value(base, j, lo)), f(j, with_value(base, j, hi))
                t.comparisons += 1
                if not b - a > tolerance:
                    t.fail(Witness("A2", with_value(base, j, lo), n, (j,), (a, b), f"q[{j}]: {lo} -> {hi}"))

    # A3: increasing in own position score where q_j > 0
    t = tally["A3"]
    for j in range(s):
        for q in vectors:
            if q[j] <= 0:
                continue
            for lo, hi in zip(pgrid, pgrid[1:]):
                a, b = f(j, q, with_value(n, j, lo)), f(j, q, with_value(n, j, hi))
                t.comparisons += 1
                if not b - a > tolerance:
                    t.fail(Witness("A3", q, with_value(n, j, lo), (j,), (a, b), f"n[{j}]: {lo} -> {hi}"))

    # A4: non-increasing in other slots' qualities
    t = tally["A4"]
    for j in range(s):
        for k in range(s):
            if k == j:
                continue
            for rest in others[k]:
                base = rest[:k] + (grid[0],) + rest[k:]
                for lo, hi in zip(grid, grid[1:]):
                    a, b = f(j, with_value(base, k, lo)), f(j, with_value(base, k, hi))
                    t.comparisons += 1
                    if b > a + tolerance:
                        t.fail(
                            Witness("A4", with_value(base, k, lo), n, (j, k), (a, b), f"q[{k}]: {lo} -> {hi}")
                        )
                    elif b < a - tolerance:
                        t.strict += 1

    # A5: perturbing the better of two equal-quality positions moves others more
    t = tally["A5"]
    for i, k in itertools.permutations(range(s), 2):
        if not n[i] > n[k]:
            continue
        free = [j for j in range(s) if j not in (i, k)]
        for q_star in grid:
            for rest in itertools.product(grid, repeat=len(free)):
                q = [0.0] * s
                q[i] = q[k] = q_star
                for j, x in zip(free, rest):
                    q[j] = x
                q = tuple(q)
                for q_hat in grid:
                    if q_hat == q_star:
                        continue
                    qi, qk = with_value(q, i, q_hat), with_value(q, k, q_hat)
                    for j in free:
                        base = f(j, q)
                        di, dk = abs(f(j, qi) - base), abs(f(j, qk) - base)
                        t.comparisons += 1
                        if di < dk - tolerance:
                            t.fail(Witness("A5", q, n, (i, k, j), (di, dk), f"q_hat={q_hat}"))
                        elif di > dk + tolerance:
                            t.strict += 1

    verdicts = {
        "A1": tally["A1"].verdict(False),
        "A2": tally["A2"].verdict(False),
        "A3": tally["A3"].verdict(False),
        "A4": tally["A4"].verdict(True),
        "A5": tally["A5"].verdict(True),
    }
    return AxiomReport(
        verdicts=verdicts,
        witnesses={a: tally[a].witnesses for a in AXIOMS},
        violations={a: tally[a].violations for a in AXIOMS},
        comparisons={a: tally[a].comparisons for a in AXIOMS},
        model=model.name,
    )
