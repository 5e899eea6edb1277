"""Pinned plot style so reruns produce pixel-identical images."""

PARAMS = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.labelsize": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.6,
    "lines.linewidth": 1.8,
    "legend.fontsize": 9,
    "legend.framealpha": 0.9,
    "svg.hashsalt": "isac-mi-plots",
}

ISAC_COLOR = "#1f77b4"
FDSAC_COLOR = "#d62728"

CR_LABEL = "Communication rate (bits/s/Hz)"
SR_LABEL = "Sensing rate (bits/s/Hz)"
