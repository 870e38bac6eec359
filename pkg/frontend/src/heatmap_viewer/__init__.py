"""Figure rendering for cycle-error reconstruction and calibration sweeps.

Consumes the versioned `cer_result/1` and `sc_sweep/1` JSON files and turns
them into heatmap grids and per-axis parabola panels.  Every number shown is
read from the input file; the renderer computes nothing but layout.
"""

from .render import RenderSpec, SchemaError, render_cer, render_sc

__all__ = ["RenderSpec", "SchemaError", "render_cer", "render_sc"]

__version__ = "0.1.0"
