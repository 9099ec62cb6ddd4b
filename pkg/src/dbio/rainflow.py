"""Rainflow cycle extraction with a compiled fast path.

Imports the Cython kernel when available and falls back to the pure-Python
implementation otherwise; ``BACKEND`` reports which one is active. Both
kernels implement the identical four-point rule, so results are bit-equal.
"""

from __future__ import annotations

try:
    from dbio._rainflow_cy import extract_cycles  # noqa: F401
    BACKEND = "cython"
except ImportError:  # extension not built on this platform
    from dbio._rainflow_py import extract_cycles  # noqa: F401
    BACKEND = "python"

__all__ = ["extract_cycles", "BACKEND"]
