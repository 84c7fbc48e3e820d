"""Python bindings for the hclab C++ core."""

from ._hclab import *  # noqa: F401,F403
from ._hclab import Environment, Error, GeometryError, InvalidArgument, SolverError  # noqa: F401

__version__ = "0.1.0"
