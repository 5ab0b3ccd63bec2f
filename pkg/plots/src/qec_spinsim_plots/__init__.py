"""Post-hoc figure rendering for qec-spinsim sweep CSVs."""

__version__ = "0.1.0"

from .figspec import FigureSpec, Series, SpecError, parse_spec_file
from .render import build_figure, plotted_arrays, render

__all__ = ["FigureSpec", "Series", "SpecError", "build_figure",
           "parse_spec_file", "plotted_arrays", "render"]
