"""Pure figure construction from result files.

Rendering is deterministic: fixed styling, a fixed SVG hash salt, and no
dates or timestamps in the image content, so identical inputs give
byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "heatmap-viewer"

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

__all__ = ["RenderSpec", "SchemaError", "render_cer", "render_sc", "save"]

_CER_SCHEMA = "cer_result/1"
_SC_SCHEMA = "sc_sweep/1"


class SchemaError(ValueError):
    """Input file does not carry the expected schema tag."""


@dataclass(frozen=True)
class RenderSpec:
    """What to draw and where to put it."""

    inputs: tuple[str, ...]
    kind: str  # "cer-heatmap" or "sc-sweep"
    out: str
    vmin: float = 1e-4
    vmax: float = 1e-1
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in ("cer-heatmap", "sc-sweep"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("need at least one input file")
        if not 0 < self.vmin < self.vmax:
            raise ValueError("color bounds must satisfy 0 < vmin < vmax")


def _load(path: str, schema: str) -> dict:
    payload = json.loads(Path(path).read_text())
    found = payload.get("schema")
    if found != schema:
        raise SchemaError(f"{path}: expected schema {schema!r}, found {found!r}")
    return payload


def render_cer(spec: RenderSpec) -> plt.Figure:
    """Heatmap grid: one column per input cycle, blocks of orbit rows per
    support, cell color log-scaled on the marginal and cell text mu +- sigma."""
    payloads = [_load(p, _CER_SCHEMA) for p in spec.inputs]
    first = payloads[0]
    if not first["tables"]:
        raise ValueError("result contains no marginal tables")
    for other in payloads[1:]:
        if [t["support"] for t in other["tables"]] != [
            t["support"] for t in first["tables"]
        ]:
            raise ValueError("input files cover different supports")

    # Row catalogue from the first file; every file must provide all rows.
    rows: list[tuple[str, str]] = []
    identity_rows: set[tuple[str, str]] = set()
    for table in first["tables"]:
        for row in table["rows"]:
            key = (table["support"], row["orbit"])
            rows.append(key)
            if row.get("paulis") == ["I"]:
                identity_rows.add(key)
    values = np.full((len(rows), len(payloads)), np.nan)
    sigmas = np.full_like(values, np.nan)
    for j, payload in enumerate(payloads):
        lookup = {
            (t["support"], r["orbit"]): r
            for t in payload["tables"]
            for r in t["rows"]
        }
        for i, key in enumerate(rows):
            row = lookup.get(key)
            if row is not None and row.get("mu") is not None:
                values[i, j] = row["mu"]
                sigmas[i, j] = row["sigma"]

    if spec.threshold is not None:
        keep = [
            i
            for i in range(len(rows))
            if rows[i] in identity_rows
            or np.nanmax(np.abs(values[i])) >= spec.threshold
        ]
        rows = [rows[i] for i in keep]
        values = values[keep]
        sigmas = sigmas[keep]

    n_rows, n_cols = values.shape
    fig, ax = plt.subplots(
        figsize=(2.2 + 1.9 * n_cols, 0.8 + 0.34 * n_rows), dpi=100
    )
    # Color encodes magnitude on the log scale; non-positive cells clamp to
    # the bottom of the range so the text still carries the sign.
    shown = np.clip(np.abs(values), spec.vmin, spec.vmax)
    shown[np.isnan(values)] = spec.vmin
    mesh = ax.imshow(
        shown,
        aspect="auto",
        cmap="viridis",
        norm=LogNorm(vmin=spec.vmin, vmax=spec.vmax),
    )
    for i in range(n_rows):
        for j in range(n_cols):
            if np.isnan(values[i, j]):
                text = "n/a"
            else:
                text = f"{values[i, j]:.4f}±{sigmas[i, j]:.4f}"
            dark = shown[i, j] < np.sqrt(spec.vmin * spec.vmax)
            ax.text(
                j,
                i,
                text,
                ha="center",
                va="center",
                fontsize=6.5,
                color="white" if dark else "black",
            )

    # Horizontal separators between support blocks, labels on the left.
    boundaries = [
        i for i in range(1, n_rows) if rows[i][0] != rows[i - 1][0]
    ]
    for b in boundaries:
        ax.axhline(b - 0.5, color="black", linewidth=1.2)
    ax.set_yticks(range(n_rows))
    ax.set_yticklabels([f"{sup} {orb}" for sup, orb in rows], fontsize=7)
    ax.set_xticks(range(n_cols))
    ax.set_xticklabels(
        [p.get("cycle") or "cycle" for p in payloads], fontsize=8
    )
    ax.set_xlabel("hard cycle")
    ax.set_title("orbit marginal errors")
    fig.colorbar(mesh, ax=ax, label="|marginal|", fraction=0.05)
    fig.tight_layout()
    return fig


def render_sc(spec: RenderSpec) -> plt.Figure:
    """One panel per axis: sweep estimates with error bars, the stored
    quadratic, and a vertical marker at the stored vertex."""
    if len(spec.inputs) != 1:
        raise ValueError("sweep rendering takes exactly one input file")
    payload = _load(spec.inputs[0], _SC_SCHEMA)
    axes_data = payload["axes"]
    if not axes_data:
        raise ValueError("sweep contains no axes")
    n = len(axes_data)
    fig, panels = plt.subplots(
        1, n, figsize=(3.4 * n, 3.2), dpi=100, squeeze=False
    )
    for ax, entry in zip(panels[0], axes_data):
        angles = np.asarray(entry["angles_deg"], dtype=float)
        ax.errorbar(
            angles,
            entry["objective"],
            yerr=entry["sigma"],
            fmt="o",
            markersize=4,
            capsize=2,
            color="#1f77b4",
            label="estimates",
        )
        coeffs = entry["fit"]["coefficients"]
        if all(c is not None for c in coeffs):
            grid = np.linspace(angles.min(), angles.max(), 200)
            ax.plot(
                grid,
                np.polyval(coeffs, grid),
                color="#d62728",
                linewidth=1.2,
                label="stored fit",
            )
        theta = entry["theta_star_deg"]
        if theta is not None:
            ax.axvline(theta, color="black", linestyle="--", linewidth=1.0)
            sigma = entry["theta_star_sigma_deg"]
            if sigma is not None:
                ax.axvspan(theta - sigma, theta + sigma, color="gray", alpha=0.3)
            ax.set_title(
                f"{entry['axis']} on qubit {entry['qubit']}: "
                f"θ* = {theta:.2f}°",
                fontsize=9,
            )
        else:
            ax.set_title(
                f"{entry['axis']} on qubit {entry['qubit']}: {entry['status']}",
                fontsize=9,
            )
        ax.set_xlabel("compensation angle (deg)")
        ax.set_ylabel("objective")
    fig.tight_layout()
    return fig


def save(fig: plt.Figure, out: str) -> None:
    """Write SVG or PNG with no date metadata in the image content."""
    path = Path(out)
    fmt = path.suffix.lstrip(".").lower()
    if fmt not in ("svg", "png"):
        raise ValueError(f"unsupported output format {fmt!r}; use .svg or .png")
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, metadata=metadata)
    plt.close(fig)
