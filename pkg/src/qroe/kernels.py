"""Kernel dispatch: the compiled extension when present, else the Python versions.

Set ``QROE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("QROE_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

subset_lambda = _impl.subset_lambda
transitive_closure = _impl.transitive_closure
color_search = _impl.color_search
