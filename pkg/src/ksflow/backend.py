"""Selects the compiled kernel backend at import, with a NumPy fallback.

The Cython extension ksflow._kernels is preferred when importable; setting the
environment variable KSFLOW_PURE_PYTHON=1 forces the NumPy implementation
(used by the backend-equivalence tests and the benchmark).
"""

import os

if os.environ.get("KSFLOW_PURE_PYTHON", "") == "1":
    from ksflow import _kernels_py as kernels
else:
    try:
        from ksflow import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from ksflow import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME


def backend_name() -> str:
    """Name of the active kernel backend: "cython" or "python"."""
    return BACKEND
