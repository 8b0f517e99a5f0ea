"""Numeric kernel dispatch.

The compiled extension is used when it imported cleanly; otherwise the numpy
twin takes over. Set ``MAGCN_PURE_PYTHON=1`` to force the numpy backend, e.g.
for benchmarking one against the other.
"""

from __future__ import annotations

import os

from . import numpy_backend

if os.environ.get("MAGCN_PURE_PYTHON"):
    _impl = numpy_backend
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = numpy_backend

matmul = _impl.matmul
matmul_tn = _impl.matmul_tn
matmul_nt = _impl.matmul_nt
softmax_rows = _impl.softmax_rows
softmax_rows_grad = _impl.softmax_rows_grad
sigmoid = _impl.sigmoid
sigmoid_grad = _impl.sigmoid_grad
tanh = _impl.tanh
tanh_grad = _impl.tanh_grad
relu = _impl.relu
relu_grad = _impl.relu_grad
l2norm_rows = _impl.l2norm_rows
l2norm_rows_grad = _impl.l2norm_rows_grad


def backend_name() -> str:
    return _impl.NAME
