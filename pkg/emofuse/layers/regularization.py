from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from gradtape import Tensor, add, apply_op, current_tape, mul
from utils.errors import ContractError, ShapeError


@dataclass(frozen=True)
class DropoutSpec:
    rate: float = 0.5
    mode: str = "train"

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ContractError(f"dropout rate must lie in [0, 1), got {self.rate}")
        if self.mode not in ("train", "eval"):
            raise ContractError(f"dropout mode must be train or eval, got {self.mode}")


def dropout_forward(x: Tensor, spec: DropoutSpec, seed: Optional[int] = None) -> Tensor:
    """
    train: маска Bernoulli(1 - rate), выжившие масштабируются на 1/(1 - rate);
    eval или rate == 0: тождественное отображение. Маска воспроизводима по seed.
    """
    if spec.mode == "eval" or spec.rate == 0.0:
        return x
    rng = np.random.default_rng(seed)
    keep = rng.random(x.shape) >= spec.rate
    mask = Tensor.constant(keep / (1.0 - spec.rate))
    tape = current_tape()
    if tape is not None:
        tape.mark_stochastic()
    return mul(x, mask)


@dataclass
class BatchNormParams:
    gamma: Tensor
    beta: Tensor
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    epsilon: float = 1e-5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ContractError(f"batchnorm epsilon must be positive, got {self.epsilon}")

    @property
    def features(self) -> int:
        return self.gamma.shape[0]

    def named(self, prefix: str) -> Dict[str, Tensor]:
        return {f"{prefix}/gamma": self.gamma, f"{prefix}/beta": self.beta}

    def buffers(self, prefix: str) -> Dict[str, np.ndarray]:
        # скользящие статистики сохраняются в чекпоинт, но не обучаются
        return {f"{prefix}/running_mean": self.running_mean, f"{prefix}/running_var": self.running_var}


def init_batchnorm(features: int, momentum: float = 0.1, epsilon: float = 1e-5) -> BatchNormParams:
    return BatchNormParams(
        gamma=Tensor.parameter(np.ones(features)),
        beta=Tensor.parameter(np.zeros(features)),
        running_mean=np.zeros(features),
        running_var=np.ones(features),
        momentum=momentum,
        epsilon=epsilon,
    )


def batchnorm_forward(x: Tensor, p: BatchNormParams, training: bool = True) -> Tensor:
    if x.ndim != 2 or x.shape[1] != p.features:
        raise ShapeError(f"batchnorm: input {x.shape} vs {p.features} features")

    if not training:
        inv_std = 1.0 / np.sqrt(p.running_var + p.epsilon)
        centred = x - Tensor.constant(p.running_mean)
        return add(mul(mul(centred, Tensor.constant(inv_std)), p.gamma), p.beta)

    batch = x.shape[0]
    if batch < 2:
        raise ContractError("batchnorm in train mode needs a batch of at least 2")
    eps = p.epsilon

    def forward(v, gamma, beta):
        mu = v.mean(axis=0)
        var = v.var(axis=0)
        return (v - mu) / np.sqrt(var + eps) * gamma + beta

    def vjp_factory(arrays, out):
        v, gamma, _ = arrays
        mu = v.mean(axis=0)
        inv_std = 1.0 / np.sqrt(v.var(axis=0) + eps)
        xhat = (v - mu) * inv_std

        def vjp(g):
            dxhat = g * gamma
            dx = inv_std / batch * (batch * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
            return dx, (g * xhat).sum(axis=0), g.sum(axis=0)
        return vjp

    out = apply_op("batchnorm", (x, p.gamma, p.beta), forward, vjp_factory)

    batch_mean = x.values.mean(axis=0)
    batch_var = x.values.var(axis=0, ddof=1)
    p.running_mean = (1.0 - p.momentum) * p.running_mean + p.momentum * batch_mean
    p.running_var = (1.0 - p.momentum) * p.running_var + p.momentum * batch_var
    return out
