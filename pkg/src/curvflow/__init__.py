"""Numerical laboratory for locally constrained curvature flows in the round sphere."""
from . import ballrefs, flows, spheregeom, symfun, verify
from ._backend import active as active_backend

__version__ = "0.1.0"

__all__ = ["ballrefs", "flows", "spheregeom", "symfun", "verify", "active_backend"]
