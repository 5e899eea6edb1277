"""Render rate-region and rate-curve figures from isac-mi CSV outputs.

The plotting layer never recomputes rates; it only reads the CSV schemas
written by the `isac-mi` CLI:

  region_<kind>_<mode>.csv : cr_bits_hz,sr_bits_hz,sweep_param,stderr_cr,stderr_sr
  curves_<kind>.csv        : power_db,cr_isac,sr_isac,cr_fdsac,sr_fdsac
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .style import CR_LABEL, FDSAC_COLOR, ISAC_COLOR, PARAMS, SR_LABEL

REGION_HEADER = ["cr_bits_hz", "sr_bits_hz", "sweep_param", "stderr_cr", "stderr_sr"]
CURVES_HEADER = ["power_db", "cr_isac", "sr_isac", "cr_fdsac", "sr_fdsac"]

_CORNER_TEX = {"Po": r"$P_o$", "Ps": r"$P_s$", "Pc": r"$P_c$"}


class PlotInputError(ValueError):
    """Missing or ill-formed input file; the message names the file."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSVs, figure kind, and the output image path."""

    inputs: tuple
    kind: str
    output: str

    def __post_init__(self):
        if self.kind not in ("region", "curves"):
            raise PlotInputError(f"figure kind must be 'region' or 'curves', got {self.kind!r}")
        if not self.inputs:
            raise PlotInputError("no input files given")
        object.__setattr__(self, "inputs", tuple(self.inputs))


def _read_csv(path: str, expected_header) -> dict:
    if not os.path.exists(path):
        raise PlotInputError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotInputError(f"empty input file: {path}") from None
        missing = [col for col in expected_header if col not in header]
        if missing:
            raise PlotInputError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = [row for row in reader if row]
    if not rows:
        raise PlotInputError(f"no data rows in {path}")
    idx = {col: header.index(col) for col in expected_header}
    out = {}
    for col in expected_header:
        cells = [row[idx[col]] for row in rows]
        if col == "sweep_param":
            out[col] = cells
        else:
            try:
                out[col] = np.array([float(c) for c in cells])
            except ValueError as exc:
                raise PlotInputError(f"{path}: non-numeric value in column {col}: {exc}") from exc
    return out


def _mode_label(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    if stem.endswith("_fdsac") or "fdsac" in stem.split("_"):
        return "FDSAC"
    if stem.endswith("_isac") or "isac" in stem.split("_"):
        return "ISAC"
    return stem


def region_polygon(crs: np.ndarray, srs: np.ndarray) -> np.ndarray:
    """Closed boundary of the region dominated by a frontier, down to the axes."""
    order = np.argsort(crs)
    crs, srs = crs[order], srs[order]
    verts = [(0.0, 0.0), (0.0, srs[0])]
    verts.extend(zip(crs, srs))
    verts.append((crs[-1], 0.0))
    return np.array(verts)


def polygon_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def render_region(spec: FigureSpec) -> str:
    """Overlay the filled rate regions of the input CSVs and annotate corners."""
    if spec.kind != "region":
        raise PlotInputError(f"render_region got a {spec.kind!r} spec")
    tables = [(path, _read_csv(path, REGION_HEADER)) for path in spec.inputs]
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots(figsize=(5.2, 4.2))
        for path, table in tables:
            label = _mode_label(path)
            color = FDSAC_COLOR if label == "FDSAC" else ISAC_COLOR
            verts = region_polygon(table["cr_bits_hz"], table["sr_bits_hz"])
            if polygon_area(verts) <= 0.0:
                raise PlotInputError(f"degenerate (empty) region polygon in {path}")
            ax.fill(verts[:, 0], verts[:, 1], alpha=0.25, color=color, linewidth=0)
            ax.plot(verts[1:-1, 0], verts[1:-1, 1], color=color, label=label)
            for cr, sr, param in zip(
                table["cr_bits_hz"], table["sr_bits_hz"], table["sweep_param"]
            ):
                if "corner=" not in param:
                    continue
                corner = param.split("corner=")[1].split(";")[0]
                ax.plot([cr], [sr], marker="o", color=color, markersize=5)
                ax.annotate(
                    _CORNER_TEX.get(corner, corner), (cr, sr),
                    textcoords="offset points", xytext=(6, 6), fontsize=11,
                )
        ax.set_xlabel(CR_LABEL)
        ax.set_ylabel(SR_LABEL)
        ax.set_xlim(left=0.0)
        ax.set_ylim(bottom=0.0)
        ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(spec.output)
        plt.close(fig)
    return spec.output


def render_curves(spec: FigureSpec) -> str:
    """Two-panel rate-versus-power figure with ISAC and FDSAC lines per panel."""
    if spec.kind != "curves":
        raise PlotInputError(f"render_curves got a {spec.kind!r} spec")
    if len(spec.inputs) != 1:
        raise PlotInputError("render_curves takes exactly one curves CSV")
    path = spec.inputs[0]
    table = _read_csv(path, CURVES_HEADER)
    power = table["power_db"]
    with plt.rc_context(PARAMS):
        fig, (ax_cr, ax_sr) = plt.subplots(1, 2, figsize=(8.4, 3.8))
        ax_cr.plot(power, table["cr_isac"], color=ISAC_COLOR, label="ISAC")
        ax_cr.plot(power, table["cr_fdsac"], color=FDSAC_COLOR, linestyle="--", label="FDSAC")
        ax_cr.set_xlabel("Power (dB)")
        ax_cr.set_ylabel(CR_LABEL)
        ax_cr.legend(loc="upper left")
        ax_sr.plot(power, table["sr_isac"], color=ISAC_COLOR, label="ISAC")
        ax_sr.plot(power, table["sr_fdsac"], color=FDSAC_COLOR, linestyle="--", label="FDSAC")
        ax_sr.set_xlabel("Power (dB)")
        ax_sr.set_ylabel(SR_LABEL)
        ax_sr.legend(loc="upper left")
        fig.tight_layout()
        fig.savefig(spec.output)
        plt.close(fig)
    return spec.output
