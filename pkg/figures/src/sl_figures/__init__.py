"""Figure rendering for stationary-light simulation outputs."""

from .io import Manifest, SchemaError, load_manifest
from .render import FigureJob, RenderInfo, render

__version__ = "0.1.0"

__all__ = [
    "Manifest",
    "SchemaError",
    "load_manifest",
    "FigureJob",
    "RenderInfo",
    "render",
    "__version__",
]
