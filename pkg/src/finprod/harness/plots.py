"""Figure rendering for experiment reports.

One PNG per report, written next to the JSON/CSV outputs. Figures are a
convenience view of the records; the data contract stays with the
delimited output, and nothing downstream reads the images back.
"""

from __future__ import annotations

from math import sqrt
from pathlib import Path


def _new_axes():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.8), dpi=120)
    return plt, fig, ax


def render_figures(payload: dict, outdir: Path) -> list[Path]:
    name = payload["config"]["experiment"]
    records = payload["records"]
    renderer = _RENDERERS.get(name, _render_pass_bars)
    plt, fig, ax = _new_axes()
    try:
        renderer(ax, records, payload)
        ax.set_title(name)
        out = Path(outdir) / f"{name}.png"
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.tight_layout()
        fig.savefig(out)
        return [out]
    finally:
        plt.close(fig)


def _render_growth(ax, records, payload):
    ns = [r["n"] for r in records]
    ratios = [r["ratio"] for r in records]
    ax.plot(ns, ratios, "o-")
    ax.set_xlabel("tensor power n")
    ax.set_ylabel("rank-1 part, L1 ratio")


def _render_khintchine(ax, records, payload):
    dims = [r["dim"] for r in records]
    ratios = [r["ratio"] for r in records]
    ax.scatter(dims, ratios, s=12, alpha=0.6)
    ax.axhline(1.0 / sqrt(2.0), color="crimson", lw=1, label="1/sqrt(2)")
    ax.set_xlabel("dimension")
    ax.set_ylabel("L1 / L2 ratio")
    ax.legend(loc="lower right", fontsize=8)


def _render_zinn(ax, records, payload):
    xs = [r["lhs"] for r in records if "lhs" in r]
    ys = [r["rhs"] for r in records if "rhs" in r]
    ax.scatter(xs, ys, s=12, alpha=0.6)
    top = max(xs + ys + [1.0])
    ax.plot([0, top], [0, top], color="gray", lw=1, label="y = x")
    ax.plot([0, top], [0, top / 2.0], color="crimson", lw=1, label="y = x/2")
    ax.set_xlabel("coupled side")
    ax.set_ylabel("decoupled side")
    ax.legend(loc="upper left", fontsize=8)


def _render_ratio_hist(ax, records, payload):
    ratios = [r["ratio"] for r in records if "ratio" in r]
    ax.hist(ratios, bins=30, color="steelblue", alpha=0.8)
    ax.set_xlabel("ratio")
    ax.set_ylabel("count")


def _render_pass_bars(ax, records, payload):
    labels, values = [], []
    for i, r in enumerate(records):
        flag = None
        for key in ("operator_match", "match", "ok", "hard_ok"):
            if key in r:
                flag = bool(r[key])
                break
        if flag is None:
            continue
        labels.append(str(i))
        values.append(1.0 if flag else 0.0)
    if not values:
        values = [1.0 if payload["passed"] else 0.0]
        labels = ["passed"]
    ax.bar(range(len(values)), values, color="seagreen")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylim(0, 1.2)
    ax.set_ylabel("pass")


_RENDERERS = {
    "growth-l1": _render_growth,
    "khintchine-sweep": _render_khintchine,
    "zinn-sweep": _render_zinn,
    "h1-equivalence": _render_ratio_hist,
    "pm-on-h1tm": _render_ratio_hist,
    "noncontraction-search": _render_ratio_hist,
}
