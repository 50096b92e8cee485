"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
module is loaded. ``use("python")`` forces the fallback (for benchmarks and
equivalence tests).
"""
import logging

from wlinkpred import _pykernels

log = logging.getLogger(__name__)

try:
    from wlinkpred import _ckernels
except ImportError:  # extension not built
    _ckernels = None
    log.debug("compiled kernels unavailable, using pure-Python fallback")

kernels = _ckernels if _ckernels is not None else _pykernels


def available() -> list[str]:
    return ["cython", "python"] if _ckernels is not None else ["python"]


def use(name: str) -> None:
    global kernels
    if name == "python":
        kernels = _pykernels
    elif name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels were not built")
        kernels = _ckernels
    else:
        raise ValueError(f"unknown backend {name!r}")


def current() -> str:
    return kernels.BACKEND
