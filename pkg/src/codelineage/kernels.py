"""Hot-loop kernels, compiled when available.

The Cython module ``codelineage._speedups`` is preferred. Setting the
environment variable ``CODELINEAGE_PURE=1`` before import forces the
pure-Python fallback, which produces identical results.
"""
from __future__ import annotations

import os

from codelineage import _purepy

BACKEND = "python"
_impl = _purepy

if not os.environ.get("CODELINEAGE_PURE"):
    try:
        from codelineage import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _purepy

strip_comments = _impl.strip_comments
mask_strings = _impl.mask_strings
match_brace = _impl.match_brace
accumulate_matches = _impl.accumulate_matches


def backends() -> dict[str, object]:
    """All importable kernel implementations, keyed by name."""
    found: dict[str, object] = {"python": _purepy}
    try:
        from codelineage import _speedups

        found["cython"] = _speedups
    except ImportError:
        pass
    return found
