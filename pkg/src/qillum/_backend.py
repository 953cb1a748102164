"""Frame-kernel backend selection.

Prefers the compiled Cython kernel and falls back to the pure-numpy
implementation when the extension is unavailable.  Both backends consume
the random stream identically, so the choice never changes results.
Set ``QILLUM_BACKEND=python`` or ``=compiled`` to force one.
"""

import os

from . import _kernels_py

KIND_TWIN_BEAM = _kernels_py.KIND_TWIN_BEAM
KIND_SPLIT_THERMAL = _kernels_py.KIND_SPLIT_THERMAL

_requested = os.environ.get("QILLUM_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _kernels_py
    BACKEND = "python"
elif _requested in ("", "compiled"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _kernels_py
        BACKEND = "python"
else:
    raise ValueError(f"QILLUM_BACKEND must be 'python' or 'compiled', "
                     f"got {_requested!r}")

fill_frame = _impl.fill_frame


def available_backends():
    """Names of importable backends, compiled first when present."""
    names = []
    try:
        from . import _kernels  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    names.append("python")
    return names


def get_backend(name):
    """Return the backend module by name (for benchmarks and tests)."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
