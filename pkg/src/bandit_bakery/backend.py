"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python
fallback is always available. ``BANDIT_BAKERY_BACKEND`` forces a choice:

* ``c``      -- require the compiled extension (ImportError if missing),
* ``python`` -- force the pure-Python kernels,
* ``auto``   -- compiled if available, else Python (default).

Both backends compute bitwise-identical results; the choice only affects
speed.
"""

import os

from . import _kernels_py


def _load(name: str):
    if name == "python":
        return _kernels_py
    if name == "c":
        from . import _kernels  # may raise ImportError

        return _kernels
    try:
        from . import _kernels

        return _kernels
    except ImportError:
        return _kernels_py


_choice = os.environ.get("BANDIT_BAKERY_BACKEND", "auto").lower()
if _choice not in ("auto", "c", "python"):
    raise ValueError(
        f"BANDIT_BAKERY_BACKEND must be 'auto', 'c' or 'python', got {_choice!r}"
    )

_impl = _load(_choice)

BACKEND = _impl.BACKEND_NAME
predict_sparse = _impl.predict_sparse
path_rate = _impl.path_rate
apply_update = _impl.apply_update


def available_backends() -> list:
    """Names of the backends importable in this environment."""
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401

        names.insert(0, "c")
    except ImportError:
        pass
    return names
