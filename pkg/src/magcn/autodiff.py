"""Dense float64 tensors with reverse-mode differentiation.

A define-by-run tape: every primitive that touches a gradient-carrying
tensor appends one node to the active tape, so the tape is topologically
ordered by construction. ``backward`` replays it in reverse. The tape is
meant to be reset once per training step; evaluation code wraps calls in
``no_grad()`` to skip recording entirely.

Values live in C-contiguous float64 numpy arrays; the arithmetic itself is
delegated to :mod:`magcn.kernels`.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels as K
from .errors import ContractError, DimensionError, NumericError


class Tensor:
    """A dense array plus its slot in the gradient tape."""

    __slots__ = ("data", "requires_grad", "grad", "node")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.node: Node | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() on tensor of shape {self.shape}")
        return self.data.item()

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)


class Node:
    """One executed primitive: inputs, output, and its gradient rule."""

    __slots__ = ("name", "inputs", "out", "backward_fn")

    def __init__(self, name, inputs, out, backward_fn):
        self.name = name
        self.inputs = inputs
        self.out = out
        self.backward_fn = backward_fn


class Tape:
    """Ordered record of executed primitives (producers before consumers)."""

    def __init__(self):
        self.nodes: list[Node] = []

    def reset(self) -> None:
        self.nodes.clear()

    def __len__(self) -> int:
        return len(self.nodes)


class _State(threading.local):
    def __init__(self):
        self.tape = Tape()
        self.grad_enabled = True


_STATE = _State()


def active_tape() -> Tape:
    return _STATE.tape


def reset_tape() -> None:
    _STATE.tape.reset()


@contextmanager
def use_tape(tape: Tape):
    prev = _STATE.tape
    _STATE.tape = tape
    try:
        yield tape
    finally:
        _STATE.tape = prev


@contextmanager
def no_grad():
    prev = _STATE.grad_enabled
    _STATE.grad_enabled = False
    try:
        yield
    finally:
        _STATE.grad_enabled = prev


def _record(name: str, inputs: tuple[Tensor, ...], out_data: np.ndarray,
            backward_fn: Callable[[np.ndarray], Sequence[np.ndarray | None]]) -> Tensor:
    out = Tensor(out_data)
    if _STATE.grad_enabled and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        node = Node(name, inputs, out, backward_fn)
        out.node = node
        _STATE.tape.nodes.append(node)
    return out


def _require_2d(name: str, *tensors: Tensor) -> None:
    for t in tensors:
        if t.data.ndim != 2:
            raise DimensionError(f"{name}: expected 2-d tensor, got shape {t.shape}")


# ---------------------------------------------------------------------------
# primitives


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _require_2d("matmul", a, b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: inner extents differ, {a.shape} x {b.shape}")
    ad, bd = a.data, b.data

    def bwd(g):
        return K.matmul_nt(g, bd), K.matmul_tn(ad, g)

    return _record("matmul", (a, b), K.matmul(ad, bd), bwd)


def matmul_t(a: Tensor, b: Tensor) -> Tensor:
    """a @ b.T; the product against a transposed operand used by attention."""
    _require_2d("matmul_t", a, b)
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"matmul_t: inner extents differ, {a.shape} x {b.shape}^T")
    ad, bd = a.data, b.data

    def bwd(g):
        return K.matmul(g, bd), K.matmul_tn(g, ad)

    return _record("matmul_t", (a, b), K.matmul_nt(ad, bd), bwd)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"add: shapes differ, {a.shape} vs {b.shape}")
    return _record("add", (a, b), a.data + b.data, lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"sub: shapes differ, {a.shape} vs {b.shape}")
    return _record("sub", (a, b), a.data - b.data, lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"mul: shapes differ, {a.shape} vs {b.shape}")
    ad, bd = a.data, b.data
    return _record("mul", (a, b), ad * bd, lambda g: (g * bd, g * ad))


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """x (m, n) plus a (1, n) bias row broadcast over the m rows."""
    _require_2d("add_bias", x, b)
    if b.shape[0] != 1 or b.shape[1] != x.shape[1]:
        raise DimensionError(f"add_bias: bias {b.shape} does not fit {x.shape}")

    def bwd(g):
        return g, g.sum(axis=0, keepdims=True)

    return _record("add_bias", (x, b), x.data + b.data, bwd)


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    return _record("scale", (x,), x.data * c, lambda g: (g * c,))


def relu(x: Tensor) -> Tensor:
    y = K.relu(_as2d(x))
    return _record("relu", (x,), y.reshape(x.shape), lambda g: (K.relu_grad(y, _r2(g)).reshape(x.shape),))


def sigmoid(x: Tensor) -> Tensor:
    y = K.sigmoid(_as2d(x))
    return _record("sigmoid", (x,), y.reshape(x.shape), lambda g: (K.sigmoid_grad(y, _r2(g)).reshape(x.shape),))


def tanh(x: Tensor) -> Tensor:
    y = K.tanh(_as2d(x))
    return _record("tanh", (x,), y.reshape(x.shape), lambda g: (K.tanh_grad(y, _r2(g)).reshape(x.shape),))


def _as2d(x: Tensor) -> np.ndarray:
    d = x.data
    return d if d.ndim == 2 else d.reshape(1, -1)


def _r2(g: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(g if g.ndim == 2 else g.reshape(1, -1))


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax with max subtraction; rows of the output sum to 1."""
    _require_2d("softmax_rows", x)
    if np.isnan(x.data).any():
        raise NumericError("softmax_rows: NaN in input")
    y = K.softmax_rows(x.data)
    return _record("softmax_rows", (x,), y, lambda g: (K.softmax_rows_grad(y, np.ascontiguousarray(g)),))


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    return _record("exp", (x,), y, lambda g: (g * y,))


def log(x: Tensor) -> Tensor:
    xd = x.data
    return _record("log", (x,), np.log(xd), lambda g: (g / xd,))


def absolute(x: Tensor) -> Tensor:
    xd = x.data
    return _record("abs", (x,), np.abs(xd), lambda g: (g * np.sign(xd),))


def concat_cols(tensors: Sequence[Tensor]) -> Tensor:
    """Column-wise concatenation; zero-width operands are legal no-ops."""
    if not tensors:
        raise ContractError("concat_cols: no operands")
    _require_2d("concat_cols", *tensors)
    rows = tensors[0].shape[0]
    if any(t.shape[0] != rows for t in tensors):
        raise DimensionError(
            "concat_cols: row counts differ, " + str([t.shape for t in tensors]))
    widths = [t.shape[1] for t in tensors]
    edges = np.cumsum(widths)[:-1]

    def bwd(g):
        return tuple(np.ascontiguousarray(p) for p in np.hsplit(g, edges))

    return _record("concat_cols", tuple(tensors), np.hstack([t.data for t in tensors]), bwd)


def concat_rows(tensors: Sequence[Tensor]) -> Tensor:
    if not tensors:
        raise ContractError("concat_rows: no operands")
    _require_2d("concat_rows", *tensors)
    cols = tensors[0].shape[1]
    if any(t.shape[1] != cols for t in tensors):
        raise DimensionError(
            "concat_rows: column counts differ, " + str([t.shape for t in tensors]))
    heights = [t.shape[0] for t in tensors]
    edges = np.cumsum(heights)[:-1]

    def bwd(g):
        return tuple(np.ascontiguousarray(p) for p in np.vsplit(g, edges))

    return _record("concat_rows", tuple(tensors), np.vstack([t.data for t in tensors]), bwd)


def gather_rows(x: Tensor, indices: Sequence[int]) -> Tensor:
    """Select rows by index (embedding-style lookup); grads scatter-add back."""
    _require_2d("gather_rows", x)
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1:
        raise DimensionError("gather_rows: indices must be a flat sequence")
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise DimensionError(
            f"gather_rows: index out of range for {x.shape[0]} rows")
    xshape = x.shape

    def bwd(g):
        gx = np.zeros(xshape)
        np.add.at(gx, idx, g)
        return (gx,)

    return _record("gather_rows", (x,), x.data[idx].copy(), bwd)


def mean_rows(x: Tensor) -> Tensor:
    """Average pooling over rows: (n, d) -> (1, d)."""
    _require_2d("mean_rows", x)
    n = x.shape[0]
    if n == 0:
        raise ContractError("mean_rows: empty input")

    def bwd(g):
        return (np.broadcast_to(g / n, x.shape).copy(),)

    return _record("mean_rows", (x,), x.data.mean(axis=0, keepdims=True), bwd)


def l2norm_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    """Each row v maps to v / max(||v||, eps)."""
    _require_2d("l2norm_rows", x)
    y, norms = K.l2norm_rows(x.data, eps)
    xd = x.data

    def bwd(g):
        return (K.l2norm_rows_grad(xd, norms, np.ascontiguousarray(g), eps),)

    return _record("l2norm_rows", (x,), y, bwd)


def frobenius_sq(x: Tensor) -> Tensor:
    """Sum of squared entries, as a scalar tensor."""
    xd = x.data
    return _record("frobenius_sq", (x,), np.asarray((xd * xd).sum()),
                   lambda g: (2.0 * g.item() * xd,))


def sum_all(x: Tensor) -> Tensor:
    return _record("sum_all", (x,), np.asarray(x.data.sum()),
                   lambda g: (np.full(x.shape, g.item()),))


# ---------------------------------------------------------------------------
# reverse pass


def backward(loss: Tensor) -> None:
    """Populate ``grad`` on every gradient-carrying ancestor of ``loss``.

    Repeated calls accumulate into existing ``grad`` buffers; callers reset
    per step via ``zero_grad``/``reset_tape``.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward: loss must be scalar, got shape {loss.shape}")
    pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    if loss.node is None:
        if loss.requires_grad:
            _spill(loss, pending[id(loss)])
        return
    for node in reversed(_STATE.tape.nodes):
        g = pending.pop(id(node.out), None)
        if g is None:
            continue
        if node.out.requires_grad:
            _spill(node.out, g)
        for inp, ig in zip(node.inputs, node.backward_fn(g)):
            if ig is None:
                continue
            if inp.node is not None:
                key = id(inp)
                acc = pending.get(key)
                pending[key] = ig if acc is None else acc + ig
            elif inp.requires_grad:
                _spill(inp, ig)


def _spill(t: Tensor, g: np.ndarray) -> None:
    t.grad = g.copy() if t.grad is None else t.grad + g


# ---------------------------------------------------------------------------
# finite-difference verification


@dataclass
class GradcheckEntry:
    name: str
    max_rel_error: float
    max_abs_error: float


@dataclass
class GradcheckReport:
    eps: float
    tol: float
    entries: list[GradcheckEntry] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol

    def __str__(self) -> str:
        lines = [f"gradcheck eps={self.eps:g} tol={self.tol:g}"]
        for e in self.entries:
            mark = "ok  " if e.max_rel_error <= self.tol else "FAIL"
            lines.append(f"  {mark} {e.name:40s} rel={e.max_rel_error:.3e}")
        lines.append(f"  max relative error {self.max_rel_error:.3e} "
                     f"-> {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def gradcheck(f: Callable[[dict[str, Tensor]], Tensor],
              params: dict[str, Tensor] | Iterable[tuple[str, Tensor]],
              eps: float = 1e-5, tol: float = 1e-4,
              rel_floor: float = 1e-3) -> GradcheckReport:
    """Compare tape gradients of ``f`` against central finite differences.

    ``f`` must be deterministic in ``params``. Per-element relative error is
    |a - n| / max(|a|, |n|, rel_floor); the floor keeps roundoff noise in
    near-zero gradient entries from masquerading as relative error.
    """
    pairs = list(params.items()) if isinstance(params, dict) else list(params)
    pdict = dict(pairs)
    analytic: dict[str, np.ndarray] = {}
    with use_tape(Tape()):
        for _, p in pairs:
            p.zero_grad()
        loss = f(pdict)
        if loss.data.size != 1:
            raise ContractError("gradcheck: f must return a scalar tensor")
        backward(loss)
        for name, p in pairs:
            analytic[name] = np.zeros_like(p.data) if p.grad is None else p.grad.copy()

    report = GradcheckReport(eps=eps, tol=tol)
    with no_grad():
        for name, p in pairs:
            flat = p.data.reshape(-1)
            numeric = np.zeros_like(flat)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                lp = f(pdict).item()
                flat[i] = orig - eps
                lm = f(pdict).item()
                flat[i] = orig
                numeric[i] = (lp - lm) / (2.0 * eps)
            a = analytic[name].reshape(-1)
            denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), rel_floor)
            rel = np.abs(a - numeric) / denom
            report.entries.append(GradcheckEntry(
                name=name,
                max_rel_error=float(rel.max()) if rel.size else 0.0,
                max_abs_error=float(np.abs(a - numeric).max()) if rel.size else 0.0,
            ))
    return report
