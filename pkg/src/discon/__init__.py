"""Discrete conformal structures, circle packings, and PL conformal maps."""

from . import (barycentric, mesh, packing, pipeline, plmap, serialize,
               structure, vertexscale)

__all__ = ["barycentric", "mesh", "packing", "pipeline", "plmap",
           "serialize", "structure", "vertexscale"]

__version__ = "0.1.0"
