"""Pseudospectral simulator and diagnostics for damped aggregation dynamics
under strong incompressible advection on the periodic box."""

from ksflow.backend import backend_name

__all__ = ["backend_name"]
__version__ = "0.1.0"
