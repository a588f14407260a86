"""Report writers: JSON, CSV, gnuplot columns, and rendered figures.

Every JSON document carries ``schema``, the config hash, and the seed so
runs can be traced; no timestamps are embedded, which keeps reruns with
one seed byte-identical.  Figures are rendered headlessly (Agg) next to
the delimited files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .geometry import Field, Grid

__all__ = [
    "write_json",
    "write_field_csv",
    "write_iterations_csv",
    "write_radial_columns",
    "constants_table",
    "render_solutions_figure",
    "render_convergence_figure",
    "render_margins_figure",
    "render_constants_figure",
]


def write_json(path: Path, payload: dict, cfg_hash: str, seed: int) -> None:
    doc = {"schema": 1, "config_hash": cfg_hash, "seed": seed}
    doc.update(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _provenance_line(cfg_hash: str | None, seed: int | None) -> str | None:
    if cfg_hash is None:
        return None
    return f"# config_hash={cfg_hash} seed={seed}"


def write_field_csv(
    path: Path, field: Field, cfg_hash: str | None = None, seed: int | None = None
) -> None:
    """One row per node: x_1, ..., x_N, value (leading '#' provenance line)."""
    grid = field.grid
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        prov = _provenance_line(cfg_hash, seed)
        if prov:
            fh.write(prov + "\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(grid.dim)] + ["value"])
        for point, value in zip(grid.points, field.values):
            writer.writerow([repr(float(c)) for c in point] + [repr(float(value))])


def write_iterations_csv(
    path: Path, history: list, cfg_hash: str | None = None, seed: int | None = None
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        prov = _provenance_line(cfg_hash, seed)
        if prov:
            fh.write(prov + "\n")
        writer = csv.writer(fh)
        writer.writerow(["iter", "energy", "grad_norm", "step"])
        for row in history:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def write_radial_columns(
    path: Path,
    grid: Grid,
    fields: list[tuple[str, Field]],
    cfg_hash: str | None = None,
    seed: int | None = None,
) -> None:
    """Gnuplot-style whitespace columns: r, then one column per solution."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        prov = _provenance_line(cfg_hash, seed)
        if prov:
            fh.write(prov + "\n")
        fh.write("# r " + " ".join(name for name, _ in fields) + "\n")
        for i, r in enumerate(grid.radii):
            row = [f"{r:.12g}"] + [f"{f.values[i]:.12g}" for _, f in fields]
            fh.write(" ".join(row) + "\n")


def constants_table(rows: list[dict], headers: list[str]) -> str:
    """Aligned text table from dict rows (missing keys print as '-')."""
    widths = {h: len(h) for h in headers}
    rendered = []
    for row in rows:
        out = {}
        for h in headers:
            v = row.get(h)
            out[h] = "-" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v))
            widths[h] = max(widths[h], len(out[h]))
        rendered.append(out)
    lines = ["  ".join(h.ljust(widths[h]) for h in headers)]
    lines.append("  ".join("-" * widths[h] for h in headers))
    for out in rendered:
        lines.append("  ".join(out[h].ljust(widths[h]) for h in headers))
    return "\n".join(lines)


def _profile_axis(grid: Grid) -> np.ndarray:
    if grid.kind == "radial":
        return grid.radii
    return grid.points[:, 0]


def render_solutions_figure(path: Path, grid: Grid, named_fields: list[tuple[str, Field]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if grid.kind == "radial" or grid.dim == 1:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        xs = _profile_axis(grid)
        for name, f in named_fields:
            ax.plot(xs, f.values, label=name)
        ax.set_xlabel("r" if grid.kind == "radial" else "x")
        ax.set_ylabel("u")
        ax.legend(fontsize=8)
        ax.set_title("critical points")
    elif grid.dim == 2:
        n = max(len(named_fields), 1)
        fig, axes = plt.subplots(1, n, figsize=(4.0 * n, 3.4), squeeze=False)
        xs = grid.points[:, 0].reshape(grid.shape)
        ys = grid.points[:, 1].reshape(grid.shape)
        for ax, (name, f) in zip(axes[0], named_fields):
            im = ax.contourf(xs, ys, f.values.reshape(grid.shape), levels=21)
            fig.colorbar(im, ax=ax, shrink=0.85)
            ax.set_title(name, fontsize=9)
            ax.set_aspect("equal")
    else:
        # central slice along the last axis
        n = max(len(named_fields), 1)
        fig, axes = plt.subplots(1, n, figsize=(4.0 * n, 3.4), squeeze=False)
        mid = grid.shape[-1] // 2
        xs = grid.points[:, 0].reshape(grid.shape)[..., mid]
        ys = grid.points[:, 1].reshape(grid.shape)[..., mid]
        for ax, (name, f) in zip(axes[0], named_fields):
            im = ax.contourf(xs, ys, f.values.reshape(grid.shape)[..., mid], levels=21)
            fig.colorbar(im, ax=ax, shrink=0.85)
            ax.set_title(f"{name} (mid-slice)", fontsize=9)
            ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_convergence_figure(path: Path, histories: list[tuple[str, list]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, (ax_e, ax_g) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for name, hist in histories:
        if not hist:
            continue
        iters = [row[0] for row in hist]
        energies = [row[1] for row in hist]
        gnorms = [max(row[2], 1e-300) for row in hist]
        ax_e.plot(iters, energies, label=name)
        ax_g.semilogy(iters, gnorms, label=name)
    ax_e.set_xlabel("iteration")
    ax_e.set_ylabel("energy")
    ax_g.set_xlabel("iteration")
    ax_g.set_ylabel("gradient norm")
    ax_g.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_margins_figure(path: Path, curves: list[tuple[str, np.ndarray, np.ndarray]]) -> None:
    """Worst-over-(x, t) margin as a function of s, one curve per hypothesis."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name, s, margin in curves:
        ax.plot(s, margin, label=name)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("s")
    ax.set_ylabel("worst margin over (x, t)")
    ax.set_title("hypothesis margins (negative = violated)")
    ax.legend(fontsize=8)
    # margins span orders of magnitude; clip to the interesting band
    finite = np.concatenate([np.asarray(m, dtype=float) for _, _, m in curves])
    lo = np.percentile(finite, 2)
    hi = np.percentile(finite, 98)
    pad = 0.1 * max(hi - lo, 1.0)
    ax.set_ylim(lo - pad, hi + pad)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_constants_figure(path: Path, names: list[str], series: list[tuple[str, list[float]]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x = np.arange(len(names))
    width = 0.8 / max(len(series), 1)
    for k, (label, vals) in enumerate(series):
        ax.bar(x + k * width, vals, width, label=label)
    ax.set_yscale("log")
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(names)
    ax.set_ylabel("value (log scale)")
    ax.set_title("constants: recomputed vs published")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
