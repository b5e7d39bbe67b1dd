"""Plots for omwu benchmark sweeps and trajectory logs.

This package only reads the published CSV contracts; it never recomputes
dynamics and the solver package never imports it.
"""

from .render import FigureSpec, SchemaError, load_series, render

__all__ = ["FigureSpec", "SchemaError", "load_series", "render"]
