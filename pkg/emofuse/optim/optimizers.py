from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from gradtape import Tensor
from utils.errors import ContractError, ShapeError

MAX_STEPS = int(np.iinfo(np.int64).max)


def _check_pair(name: str, param: Tensor, grad: np.ndarray) -> None:
    if grad.shape != param.shape:
        raise ShapeError(f"{name}: gradient shape {grad.shape} vs parameter {param.shape}")


def sgd_step(params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray], lr: float) -> Mapping[str, Tensor]:
    """θ <- θ - lr·∇ для каждого параметра, у которого есть градиент."""
    for name, grad in grads.items():
        param = params[name]
        _check_pair(name, param, grad)
        param.values = param.values - lr * grad
    return params


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    alpha: float = 1e-3
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ContractError(f"adam epsilon must be positive, got {self.epsilon}")


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: Optional[float] = None,
) -> Tuple[Mapping[str, Tensor], AdamState]:
    """
    Один шаг Adam. t увеличивается до bias correction, один раз на шаг;
    буферы m, v создаются нулевыми при первом появлении параметра.
    """
    if state.t >= MAX_STEPS:
        raise ContractError("adam step counter overflow")
    lr = state.alpha if lr is None else lr
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.t
    correction2 = 1.0 - b2 ** state.t
    for name, grad in grads.items():
        param = params[name]
        _check_pair(name, param, grad)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(param.values)
            v = np.zeros_like(param.values)
        if m.shape != param.shape:
            raise ShapeError(f"{name}: adam state shape {m.shape} vs parameter {param.shape}")
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        state.m[name] = m
        state.v[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        param.values = param.values - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params, state


class SGD:
    def __init__(self, params: Mapping[str, Tensor]):
        self.params = params

    def step(self, grads: Mapping[str, np.ndarray], lr: float) -> None:
        sgd_step(self.params, grads, lr)


class Adam:
    def __init__(self, params: Mapping[str, Tensor], beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = params
        self.state = AdamState(beta1=beta1, beta2=beta2, epsilon=epsilon)

    def step(self, grads: Mapping[str, np.ndarray], lr: float) -> None:
        adam_step(self.params, grads, self.state, lr)


OPTIMIZERS = {"sgd": SGD, "adam": Adam}
