"""Report figures (matplotlib, Agg backend, PNG files)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def monotonicity(curves: dict[str, list[float]], path: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in curves.items():
        pts = [(m, y) for m, y in enumerate(ys) if y > 0]
        ax.plot([m for m, _ in pts], [y for _, y in pts], marker=".", label=f"(n,r)=({label})")
    ax.set_xlabel("m")
    ax.set_ylabel("exact P[H_r(n,m) linear]")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    return _save(fig, path)


def trend(ratios: list[list[float]], multiplier: float, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [row[0] for row in ratios]
    ax.errorbar(ns, [row[2] for row in ratios], yerr=[row[3] for row in ratios], marker="o", capsize=3)
    ax.axhline(multiplier, color="grey", linestyle="--", label="multiplier")
    ax.set_xscale("log")
    ax.set_xlabel("n (m = 0.15 n, r = 3)")
    ax.set_ylabel("|ln freq - E| / ErrorScale")
    ax.legend(fontsize=8)
    return _save(fig, path)


def agreement(rows: list[tuple[str, float, float, float]], path: str) -> str:
    """rows: (label, observed, stderr, predicted)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(rows))
    ax.errorbar(xs, [r[1] for r in rows], yerr=[3 * r[2] for r in rows], fmt="o", capsize=4, label="MC (3 se)")
    ax.scatter(xs, [r[3] for r in rows], marker="x", color="red", label="formula", zorder=3)
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r[0] for r in rows], fontsize=8)
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    return _save(fig, path)


def estimate_bar(label: str, point: float, stderr: float, predicted: float | None, path: str) -> str:
    return agreement([(label, point, stderr, predicted if predicted is not None else float("nan"))], path)


def render_report(results, out_dir: str, multiplier: float) -> list[str]:
    """Write whichever figures the results carry data for; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    by_id = {r.id: r for r in results}
    paths = []
    if 2 in by_id and by_id[2].data:
        paths.append(monotonicity(by_id[2].data, os.path.join(out_dir, "monotonicity.png")))
    if 4 in by_id and by_id[4].data.get("ratios"):
        paths.append(trend(by_id[4].data["ratios"], multiplier, os.path.join(out_dir, "trend.png")))
    rows = []
    for cid, label in ((3, "fixed m"), (5, "binomial p")):
        d = by_id.get(cid).data if cid in by_id else None
        if d:
            rows.append((label, d["freq"], d["stderr"], d["predicted"]))
    if rows:
        paths.append(agreement(rows, os.path.join(out_dir, "linearity.png")))
    return paths
