from __future__ import annotations

import contextvars
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ContractError, TensorValueError

# Активная лента - своя у каждого потока / контекста
_ACTIVE_TAPE: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar("active_tape", default=None)


class Tensor:
    """
    Плотный float64-тензор, участвующий в ленте дифференцирования.

    values хранятся в row-major порядке, NaN/Inf отклоняются при создании.
    """

    __slots__ = ("values", "requires_grad", "grad", "name", "tape")

    def __init__(self, values, requires_grad: bool = False, name: Optional[str] = None):
        arr = np.array(values, dtype=np.float64, order="C")
        if not np.isfinite(arr).all():
            raise TensorValueError(f"non-finite values in tensor{' ' + name if name else ''} of shape {arr.shape}")
        self.values: np.ndarray = arr
        self.requires_grad: bool = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name: Optional[str] = name
        self.tape: Optional[Tape] = None

    @classmethod
    def _from_op(cls, arr: np.ndarray, requires_grad: bool) -> "Tensor":
        # результат операции уже свежий массив, копия не нужна
        out = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.float64)
        if not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        if not np.isfinite(arr).all():
            raise TensorValueError(f"operation produced non-finite values, shape {arr.shape}")
        out.values = arr
        out.requires_grad = requires_grad
        out.grad = None
        out.name = None
        out.tape = None
        return out

    @classmethod
    def constant(cls, values) -> "Tensor":
        return cls(values, requires_grad=False)

    @classmethod
    def parameter(cls, values, name: Optional[str] = None) -> "Tensor":
        return cls(values, requires_grad=True, name=name)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        if self.values.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values.copy()

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} requires_grad={self.requires_grad}>"

    # Операторы делегируют в ops, чтобы запись на ленту шла одним путём
    def __add__(self, other):
        from gradtape import ops
        return ops.add(self, _as_tensor(other))

    def __radd__(self, other):
        from gradtape import ops
        return ops.add(_as_tensor(other), self)

    def __sub__(self, other):
        from gradtape import ops
        return ops.sub(self, _as_tensor(other))

    def __rsub__(self, other):
        from gradtape import ops
        return ops.sub(_as_tensor(other), self)

    def __mul__(self, other):
        from gradtape import ops
        return ops.mul(self, _as_tensor(other))

    def __rmul__(self, other):
        from gradtape import ops
        return ops.mul(_as_tensor(other), self)

    def __matmul__(self, other):
        from gradtape import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from gradtape import ops
        return ops.getitem(self, index)


def _as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor.constant(value)


@dataclass(frozen=True)
class Node:
    """Одна записанная операция: входы, выход, прямая функция и правило локального градиента."""
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    forward: Callable[..., np.ndarray]
    vjp: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tape:
    """
    Лента обратного режима. Операции пишутся в порядке выполнения,
    поэтому список узлов уже топологически упорядочен.

    Использование:
        with Tape() as tape:
            loss = build()
        grads = tape.backward(loss)
    """

    def __init__(self):
        self.nodes: List[Node] = []
        self.stochastic: bool = False
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor,
               forward: Callable[..., np.ndarray],
               vjp: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]) -> None:
        output.tape = self
        self.nodes.append(Node(op, tuple(inputs), output, forward, vjp))

    def mark_stochastic(self) -> None:
        self.stochastic = True

    def backward(self, loss: Tensor) -> Dict[int, np.ndarray]:
        """
        Обратный проход от скалярного loss.

        Returns:
            Таблица градиентов: id(tensor) -> массив той же формы.
            Дополнительно заполняет .grad у всех тензоров с requires_grad.
        """
        if loss.shape != ():
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
        if loss.tape is not self:
            raise ContractError("loss was not produced on this tape")

        table: Dict[int, np.ndarray] = {id(loss): np.ones((), dtype=np.float64)}
        for node in reversed(self.nodes):
            upstream = table.get(id(node.output))
            if upstream is None:
                continue
            local = node.vjp(upstream)
            for tensor, grad in zip(node.inputs, local):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in table:
                    # fan-out: накапливаем
                    table[key] = table[key] + grad
                else:
                    table[key] = grad

        seen = set()
        for node in self.nodes:
            for tensor in (*node.inputs, node.output):
                if tensor.requires_grad and id(tensor) not in seen:
                    seen.add(id(tensor))
                    tensor.grad = table.get(id(tensor), np.zeros_like(tensor.values))
        return table

    def replay(self) -> List[np.ndarray]:
        """Повторяет прямой проход по записанным узлам на текущих значениях листьев."""
        values: Dict[int, np.ndarray] = {}
        outputs: List[np.ndarray] = []
        for node in self.nodes:
            args = [values.get(id(t), t.values) for t in node.inputs]
            out = node.forward(*args)
            values[id(node.output)] = out
            outputs.append(out)
        return outputs


def current_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE.get()


def backward(loss: Tensor) -> Dict[int, np.ndarray]:
    if loss.tape is None:
        raise ContractError("loss is not on a tape; build it inside `with Tape():`")
    return loss.tape.backward(loss)
