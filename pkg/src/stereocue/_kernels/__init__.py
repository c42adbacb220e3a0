"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the NumPy
fallback.  Set ``STEREOCUE_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def available():
    """Names of the importable backends."""
    names = ["python"]
    if _ckernels is not None:
        names.append("compiled")
    return names


def get_backend(name=None):
    name = name or os.environ.get("STEREOCUE_BACKEND", "auto")
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    if name != "auto":
        raise ValueError(f"unknown backend {name!r}")
    return _ckernels if _ckernels is not None else _pykernels


backend = get_backend()
