"""Pure-numpy implementations of the numeric kernels.

Every function here has a compiled twin in ``_ckernels``; the two must agree
to floating-point roundoff on valid inputs. Inputs are C-contiguous float64
arrays and outputs are freshly allocated C-contiguous float64 arrays.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b


def matmul_tn(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a.T @ b without materializing the transpose."""
    return a.T @ b


def matmul_nt(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a @ b.T without materializing the transpose."""
    return a @ b.T


def softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_rows_grad(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    # d softmax: y * (gy - <y, gy> per row)
    dot = (y * gy).sum(axis=1, keepdims=True)
    return y * (gy - dot)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    np.negative(x, out=out)
    np.exp(out, out=out)
    out += 1.0
    np.reciprocal(out, out=out)
    return out


def sigmoid_grad(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    return gy * y * (1.0 - y)


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def tanh_grad(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    return gy * (1.0 - y * y)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    return gy * (y > 0.0)


def l2norm_rows(x: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Rows scaled to unit length; returns (normalized, raw row norms)."""
    norms = np.sqrt((x * x).sum(axis=1))
    return x / np.maximum(norms, eps)[:, None], norms


def l2norm_rows_grad(
    x: np.ndarray, norms: np.ndarray, gy: np.ndarray, eps: float
) -> np.ndarray:
    # For ||v|| > eps: d(v/r) = gy/r - v (v.gy) / r^3; below eps the
    # denominator is the constant eps, so the map is linear.
    gx = np.empty_like(x)
    big = norms > eps
    r = np.where(big, norms, 1.0)
    vdotg = (x * gy).sum(axis=1)
    gx[:] = gy / r[:, None] - x * (vdotg / r**3)[:, None]
    if not big.all():
        gx[~big] = gy[~big] / eps
    return gx
