"""Figures written next to the JSON/CSV reports.

Each function takes the report dict the CLI prints and writes one image
file; the format follows the file extension (png, pdf, svg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

GOLDEN = (5 ** 0.5 - 1) / 2


def _figure(ncols=1, width=6.0):
    fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, width * GOLDEN), squeeze=False)
    return fig, axes[0]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_slots(report: dict, path: str) -> None:
    """Per-slot welfare contribution (and prices, when present); bisection brackets alongside."""
    history = report.get("diagnostics", {}).get("history") or []
    fig, axes = _figure(2 if history else 1)
    ax = axes[0]
    labels = [f"{j + 1}\n{ad or '-'}" for j, ad in enumerate(report["allocation"])]
    xs = range(len(labels))
    contrib = report["welfare"]["per_slot"]
    ax.bar([x - 0.2 for x in xs], contrib, width=0.4, label="bid x click rate")
    prices = {p["id"]: p["price"] for p in report.get("prices", [])}
    if prices:
        ax.bar(
            [x + 0.2 for x in xs],
            [prices.get(ad) or 0.0 for ad in report["allocation"]],
            width=0.4,
            label=f"price ({report['rule']})",
        )
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_xlabel("position / advertiser")
    ax.set_title(f"{report['model']} / {report['method']}: welfare {report['welfare']['total']:.6g}")
    ax.legend(frameon=False)

    if history:
        ax = axes[1]
        mids = [h[0] for h in history]
        vals = [h[1] for h in history]
        ax.plot(range(1, len(mids) + 1), mids, "o-", label="midpoint S")
        ax.plot(range(1, len(vals) + 1), vals, "s--", label="phi(S)")
        ax.axhline(report["diagnostics"]["s_star"], color="k", lw=0.8, label="fixed point")
        ax.set_xlabel("iteration")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_ylabel("welfare")
        ax.legend(frameon=False)
    _save(fig, path)


def plot_ratio(report: dict, path: str) -> None:
    fig, axes = _figure()
    ax = axes[0]
    names = ["greedy", "standard", "optimal"]
    ax.bar(names, [report[k]["welfare"] for k in names], color=["C3", "C1", "C0"])
    ax.set_ylabel("welfare")
    ax.set_title(f"greedy / optimal = {report['ratio']:.6g}")
    _save(fig, path)


def plot_revenue(report: dict, path: str) -> None:
    fig, axes = _figure()
    ax = axes[0]
    rows = report["rows"]
    xs = [r["position"] for r in rows]
    ax.bar([x - 0.2 for x in xs], [r["price_standard"] for r in rows], width=0.4, label="separable")
    ax.bar([x + 0.2 for x in xs], [r["price_externality"] for r in rows], width=0.4, label="externality")
    ax.set_xlabel("position")
    ax.set_ylabel("swap price")
    ax.set_title(f"lambda = {report['lambda']:g}")
    if rows:
        ax.legend(frameon=False)
    _save(fig, path)


def plot_axioms(report: dict, path: str) -> None:
    fig, axes = _figure()
    ax = axes[0]
    colors = {"pass": "C2", "vacuous": "C7", "fail": "C3"}
    names = list(report["verdicts"])
    ax.bar(names, [1] * len(names), color=[colors[report["verdicts"][a]] for a in names])
    for i, a in enumerate(names):
        ax.text(i, 0.5, report["verdicts"][a], ha="center", va="center")
    ax.set_yticks([])
    ax.set_title(f"{report['model']} (lambda = {report['lambda']:g})")
    _save(fig, path)


PLOTTERS = {
    "allocate": plot_slots,
    "price": plot_slots,
    "ratio": plot_ratio,
    "compare-revenue": plot_revenue,
    "check-axioms": plot_axioms,
}


def plot_report(report: dict, path: str) -> None:
    PLOTTERS[report["command"]](report, path)
