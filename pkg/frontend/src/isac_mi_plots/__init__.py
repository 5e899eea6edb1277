"""Figure rendering for isac-mi CSV outputs."""

__version__ = "0.1.0"

from .figures import FigureSpec, PlotInputError, render_curves, render_region

__all__ = ["__version__", "FigureSpec", "PlotInputError", "render_curves", "render_region"]
