"""Parity between the compiled kernels and the numpy fallback."""

import numpy as np
import pytest

from magcn.kernels import numpy_backend as nb

ck = pytest.importorskip("magcn.kernels._ckernels")

RNG = np.random.default_rng(42)
EPS = 1e-12


def rand(*shape):
    return np.ascontiguousarray(RNG.uniform(-2, 2, shape))


@pytest.mark.parametrize("m,k,n", [(1, 1, 1), (3, 4, 5), (8, 72, 72), (2, 0, 3)])
def test_matmul_variants_agree(m, k, n):
    a, b = rand(m, k), rand(k, n)
    np.testing.assert_allclose(ck.matmul(a, b), nb.matmul(a, b), atol=1e-13)
    at = rand(k, m)
    np.testing.assert_allclose(ck.matmul_tn(at, b), nb.matmul_tn(at, b), atol=1e-13)
    bt = rand(n, k)
    np.testing.assert_allclose(ck.matmul_nt(a, bt), nb.matmul_nt(a, bt), atol=1e-13)


def test_softmax_agrees():
    x = rand(6, 9)
    np.testing.assert_allclose(ck.softmax_rows(x), nb.softmax_rows(x), atol=1e-15)
    y = nb.softmax_rows(x)
    g = rand(6, 9)
    np.testing.assert_allclose(ck.softmax_rows_grad(y, g),
                               nb.softmax_rows_grad(y, g), atol=1e-15)


@pytest.mark.parametrize("fn", ["sigmoid", "tanh", "relu"])
def test_activations_agree(fn):
    x = rand(5, 7)
    np.testing.assert_allclose(getattr(ck, fn)(x), getattr(nb, fn)(x), atol=1e-15)
    y = getattr(nb, fn)(x)
    g = rand(5, 7)
    np.testing.assert_allclose(getattr(ck, fn + "_grad")(y, g),
                               getattr(nb, fn + "_grad")(y, g), atol=1e-15)


def test_l2norm_agrees_including_tiny_rows():
    x = rand(5, 4)
    x[2] = 0.0
    cy, cn = ck.l2norm_rows(x, EPS)
    ny, nn = nb.l2norm_rows(x, EPS)
    np.testing.assert_allclose(cy, ny, atol=1e-15)
    np.testing.assert_allclose(cn, nn, atol=1e-15)
    g = rand(5, 4)
    np.testing.assert_allclose(ck.l2norm_rows_grad(x, cn, g, EPS),
                               nb.l2norm_rows_grad(x, nn, g, EPS), atol=1e-13)
