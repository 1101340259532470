"""
Операции ленты. Каждая операция - пара (прямая функция над массивами,
фабрика правила локального градиента), зарегистрированная в OPS.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from gradtape.tensor import Tensor, current_tape
from utils.errors import ContractError, ShapeError

VjpFactory = Callable[[List[np.ndarray], np.ndarray], Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]]

OPS: Dict[str, Callable[..., Tensor]] = {}

UNARY_FNS = ("relu", "sigmoid", "tanh")
BINARY_FNS = ("add", "mul", "sub")


def register(name: str):
    def wrap(fn):
        OPS[name] = fn
        return fn
    return wrap


def apply_op(op: str, inputs: Sequence[Tensor], forward: Callable[..., np.ndarray], vjp_factory: VjpFactory) -> Tensor:
    """
    Выполняет forward и, если есть активная лента и нужен градиент, записывает узел.
    Используется и слоями для составных операций (batchnorm).
    """
    arrays = [t.values for t in inputs]
    out_values = forward(*arrays)
    requires = any(t.requires_grad for t in inputs)
    out = Tensor._from_op(out_values, requires)
    tape = current_tape()
    if tape is not None and requires:
        tape.record(op, inputs, out, forward, vjp_factory(arrays, out.values))
    return out


# --- broadcasting helpers ---

def _check_broadcast(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape == b.shape:
        return
    small, big = (a, b) if a.ndim <= b.ndim else (b, a)
    if small.ndim == 0 or big.shape[big.ndim - small.ndim:] == small.shape:
        return
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} are not broadcastable")


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    if grad.shape == shape:
        return grad
    lead = grad.ndim - len(shape)
    return grad.sum(axis=tuple(range(lead))).reshape(shape)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


# --- linear algebra ---

@register("matmul")
def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")

    def vjp_factory(arrays, out):
        A, B = arrays
        return lambda g: (g @ B.T, A.T @ g)

    return apply_op("matmul", (a, b), np.matmul, vjp_factory)


# --- elementwise ---

@register("elementwise")
def elementwise(x: Tensor, fn: str, other: Optional[Tensor] = None) -> Tensor:
    if fn in UNARY_FNS:
        if other is not None:
            raise ContractError(f"{fn} is unary")
        return _UNARY[fn](x)
    if fn in BINARY_FNS:
        if other is None:
            raise ContractError(f"{fn} needs a second operand")
        return _BINARY[fn](x, other)
    raise ContractError(f"unknown elementwise function: {fn}")


@register("relu")
def relu(x: Tensor) -> Tensor:
    def vjp_factory(arrays, out):
        mask = (arrays[0] > 0).astype(np.float64)
        return lambda g: (g * mask,)

    return apply_op("relu", (x,), lambda v: np.maximum(v, 0.0), vjp_factory)


@register("sigmoid")
def sigmoid(x: Tensor) -> Tensor:
    def vjp_factory(arrays, out):
        return lambda g: (g * out * (1.0 - out),)

    return apply_op("sigmoid", (x,), _sigmoid, vjp_factory)


@register("tanh")
def tanh(x: Tensor) -> Tensor:
    def vjp_factory(arrays, out):
        return lambda g: (g * (1.0 - out * out),)

    return apply_op("tanh", (x,), np.tanh, vjp_factory)


@register("add")
def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a.values, b.values, "add")

    def vjp_factory(arrays, out):
        sa, sb = arrays[0].shape, arrays[1].shape
        return lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb))

    return apply_op("add", (a, b), np.add, vjp_factory)


@register("sub")
def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a.values, b.values, "sub")

    def vjp_factory(arrays, out):
        sa, sb = arrays[0].shape, arrays[1].shape
        return lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb))

    return apply_op("sub", (a, b), np.subtract, vjp_factory)


@register("mul")
def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a.values, b.values, "mul")

    def vjp_factory(arrays, out):
        A, B = arrays
        return lambda g: (_unbroadcast(g * B, A.shape), _unbroadcast(g * A, B.shape))

    return apply_op("mul", (a, b), np.multiply, vjp_factory)


_UNARY = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}
_BINARY = {"add": add, "mul": mul, "sub": sub}


@register("where")
def where(cond: np.ndarray, a: Tensor, b: Tensor) -> Tensor:
    """Поэлементный выбор; cond - bool-массив, бродкастится на форму a."""
    if a.shape != b.shape:
        raise ShapeError(f"where: {a.shape} vs {b.shape}")
    cond = np.broadcast_to(np.asarray(cond, dtype=bool), a.shape)

    def forward(x, y):
        return np.where(cond, x, y)

    def vjp_factory(arrays, out):
        return lambda g: (np.where(cond, g, 0.0), np.where(cond, 0.0, g))

    return apply_op("where", (a, b), forward, vjp_factory)


# --- structure ---

def _norm_axis(axis: int, ndim: int, op: str) -> int:
    if not -ndim <= axis < ndim:
        raise ShapeError(f"{op}: axis {axis} out of range for {ndim}-d input")
    return axis % ndim


@register("concat")
def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise ContractError("concat of an empty list")
    if len(parts) == 1:
        return parts[0]
    ndim = parts[0].ndim
    axis = _norm_axis(axis, ndim, "concat")
    ref = parts[0].shape
    for p in parts[1:]:
        if p.ndim != ndim or any(p.shape[i] != ref[i] for i in range(ndim) if i != axis):
            raise ShapeError(f"concat: side dimensions differ, {ref} vs {p.shape} on axis {axis}")

    def forward(*arrays):
        return np.concatenate(arrays, axis=axis)

    def vjp_factory(arrays, out):
        offsets = np.cumsum([a.shape[axis] for a in arrays])[:-1]
        return lambda g: tuple(np.split(g, offsets, axis=axis))

    return apply_op("concat", tuple(parts), forward, vjp_factory)


@register("stack")
def stack(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise ContractError("stack of an empty list")
    ref = parts[0].shape
    for p in parts[1:]:
        if p.shape != ref:
            raise ShapeError(f"stack: {ref} vs {p.shape}")
    axis = _norm_axis(axis, len(ref) + 1, "stack")

    def forward(*arrays):
        return np.stack(arrays, axis=axis)

    def vjp_factory(arrays, out):
        return lambda g: tuple(np.moveaxis(g, axis, 0))

    return apply_op("stack", tuple(parts), forward, vjp_factory)


@register("reshape")
def reshape(x: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    try:
        np.empty(x.shape).reshape(shape)
    except ValueError as e:
        raise ShapeError(f"reshape: {x.shape} -> {shape}: {e}") from None

    def vjp_factory(arrays, out):
        src = arrays[0].shape
        return lambda g: (g.reshape(src),)

    return apply_op("reshape", (x,), lambda v: v.reshape(shape), vjp_factory)


@register("getitem")
def getitem(x: Tensor, index) -> Tensor:
    def forward(v):
        return np.array(v[index], dtype=np.float64)

    def vjp_factory(arrays, out):
        src = arrays[0].shape

        def vjp(g):
            full = np.zeros(src, dtype=np.float64)
            np.add.at(full, index, g)
            return (full,)
        return vjp

    return apply_op("getitem", (x,), forward, vjp_factory)


# --- reductions ---

@register("sum")
def sum_(x: Tensor, axis: Optional[int] = None) -> Tensor:
    def vjp_factory(arrays, out):
        src = arrays[0].shape
        if axis is None:
            return lambda g: (np.broadcast_to(g, src).copy(),)
        return lambda g: (np.broadcast_to(np.expand_dims(g, axis), src).copy(),)

    return apply_op("sum", (x,), lambda v: np.sum(v, axis=axis), vjp_factory)


def _shifted_mean(v: np.ndarray, axis: Optional[int]) -> np.ndarray:
    """Среднее как x0 + mean(x - x0): для постоянного входа ровно x0, без ошибки округления."""
    if v.size == 0:
        return np.mean(v, axis=axis)
    if axis is None:
        x0 = v.flat[0]
        return x0 + np.mean(v - x0)
    x0 = np.take(v, [0], axis=axis)
    return np.squeeze(x0, axis=axis) + np.mean(v - x0, axis=axis)


@register("mean")
def mean(x: Tensor, axis: Optional[int] = None) -> Tensor:
    count = x.size if axis is None else x.shape[axis]

    def vjp_factory(arrays, out):
        src = arrays[0].shape
        if axis is None:
            return lambda g: (np.broadcast_to(g / count, src).copy(),)
        return lambda g: (np.broadcast_to(np.expand_dims(g / count, axis), src).copy(),)

    return apply_op("mean", (x,), lambda v: _shifted_mean(v, axis), vjp_factory)


@register("median")
def median(x: Tensor, axis: int = 0) -> Tensor:
    """
    Медиана вдоль оси; для чётного числа - среднее двух средних значений.
    Градиент уходит в выбранные элементы (по 0.5 каждому при чётном числе).
    """
    axis = _norm_axis(axis, x.ndim, "median")
    n = x.shape[axis]
    if n == 0:
        raise ShapeError("median over an empty axis")

    def picks(v):
        order = np.argsort(v, axis=axis, kind="stable")
        if n % 2:
            return [np.take(order, [n // 2], axis=axis)], 1.0
        return [np.take(order, [n // 2 - 1], axis=axis), np.take(order, [n // 2], axis=axis)], 0.5

    def forward(v):
        idx, w = picks(v)
        total = sum(np.take_along_axis(v, i, axis=axis) for i in idx)
        return np.squeeze(total * w, axis=axis)

    def vjp_factory(arrays, out):
        idx, w = picks(arrays[0])

        def vjp(g):
            full = np.zeros(arrays[0].shape, dtype=np.float64)
            g_exp = np.expand_dims(g, axis) * w
            for i in idx:
                np.put_along_axis(full, i, np.take_along_axis(full, i, axis=axis) + g_exp, axis=axis)
            return (full,)
        return vjp

    return apply_op("median", (x,), forward, vjp_factory)


# --- classification heads ---

def _softmax(v: np.ndarray) -> np.ndarray:
    shifted = v - v.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@register("softmax")
def softmax(logits: Tensor) -> Tensor:
    if logits.ndim == 0:
        raise ShapeError("softmax needs at least one axis")

    def vjp_factory(arrays, out):
        return lambda g: (out * (g - np.sum(g * out, axis=-1, keepdims=True)),)

    return apply_op("softmax", (logits,), _softmax, vjp_factory)


def validate_onehot(onehot: np.ndarray) -> None:
    ok = np.isin(onehot, (0.0, 1.0)).all(axis=-1) & (onehot.sum(axis=-1) == 1.0)
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise ContractError(f"malformed one-hot row {bad}: {onehot[bad].tolist()}")


@register("cross_entropy")
def cross_entropy(logits: Tensor, onehot: Tensor) -> Tensor:
    """Среднее по батчу -log softmax(logits)[true]; one-hot в градиенте не участвует."""
    if logits.ndim != 2 or logits.shape != onehot.shape:
        raise ShapeError(f"cross_entropy: logits {logits.shape} vs one-hot {onehot.shape}")
    validate_onehot(onehot.values)
    batch = logits.shape[0]

    def forward(v, y):
        m = v.max(axis=-1, keepdims=True)
        lse = m[:, 0] + np.log(np.exp(v - m).sum(axis=-1))
        return np.asarray(np.mean(lse - np.sum(y * v, axis=-1)))

    def vjp_factory(arrays, out):
        v, y = arrays
        probs = _softmax(v)
        return lambda g: (g * (probs - y) / batch, None)

    return apply_op("cross_entropy", (logits, onehot), forward, vjp_factory)
