"""Offline figure generation from hullwalk trace and summary files."""

from .inputs import SchemaError, Trace, read_summary, read_trace
from .render import (FigureSpec, THETA_PDF_AT_0, THETA_PDF_AT_PI, SPEED_2_1,
                     admissible_arc, build_figure, convex_hull, render,
                     stationary_theta_pdf)

__version__ = "0.1.0"
