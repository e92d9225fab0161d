"""Backend selection for the inner-loop kernels.

The compiled extension is used when it imported cleanly; otherwise the numpy
versions take over. ``use_backend`` switches explicitly (benchmarks, tests).
"""
from . import _core_py

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_NAMES = ("pole_sums", "thomas", "filtered_sums", "pairwise_sum", "series_eval")
BACKEND = None


def available_backends():
    return ("compiled", "python") if _compiled is not None else ("python",)


def use_backend(name):
    """Select ``"compiled"`` or ``"python"`` for every kernel in this module."""
    global BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; reinstall with Cython available")
        mod = _compiled
    elif name == "python":
        mod = _core_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    for n in _NAMES:
        globals()[n] = getattr(mod, n)
    BACKEND = name


use_backend("compiled" if _compiled is not None else "python")
