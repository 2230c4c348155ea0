"""Hot-loop backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementation is imported.  Set ``ACL0LMS_BACKEND=python`` to force the
fallback (``=cython`` makes a missing extension an import error).
"""

import os

from . import _kernels_py

_choice = os.environ.get("ACL0LMS_BACKEND", "").strip().lower()

if _choice in ("python", "py", "numpy"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _kernels_py
        BACKEND = "python"

run_filter_bank = _impl.run_filter_bank
run_combined_bank = _impl.run_combined_bank


def available_backends():
    """Map of backend name to module for every backend importable here."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
