"""Render publication-style figure analogues from skinchain CSV outputs."""

from .plots import FIGURES, FigureSpec, SchemaError, figure_spec, render

__version__ = "1.0.0"

__all__ = ["FIGURES", "FigureSpec", "SchemaError", "figure_spec", "render"]
