"""Kernel backend selection: compiled extension if present, numpy otherwise.

Set CHROMALIGN_FORCE_PYTHON_KERNELS=1 to skip the extension (benchmarking,
debugging).
"""

import os

from chromalign._kernels import _fallback

_impl = None
if not os.environ.get("CHROMALIGN_FORCE_PYTHON_KERNELS"):
    try:
        from chromalign._kernels import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = None
if _impl is None:
    _impl = _fallback
    BACKEND = "python"

lasso_cd = _impl.lasso_cd
kendall_stats = _impl.kendall_stats
perm_concordance = _impl.perm_concordance


def get_backend(name: str):
    """Return a kernel module by name ('native' or 'python'); for benchmarks."""
    if name == "python":
        return _fallback
    if name == "native":
        if BACKEND != "native":
            raise ImportError("compiled kernels are not available")
        return _impl
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["native", "python"] if BACKEND == "native" else ["python"]
