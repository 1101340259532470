from dataclasses import dataclass
from typing import Dict

import numpy as np

from gradtape import Tensor, add, matmul, relu, reshape, sigmoid, tanh
from layers.init import uniform_param
from utils.errors import ConfigError, ShapeError

ACTIVATIONS = {"relu": relu, "tanh": tanh, "sigmoid": sigmoid, "none": None}


@dataclass
class DenseParams:
    W: Tensor
    b: Tensor
    activation: str = "none"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation: {self.activation}")
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[1],):
            raise ShapeError(f"dense params: W {self.W.shape} and b {self.b.shape} disagree")

    @property
    def in_features(self) -> int:
        return self.W.shape[0]

    @property
    def out_features(self) -> int:
        return self.W.shape[1]

    def named(self, prefix: str) -> Dict[str, Tensor]:
        return {f"{prefix}/W": self.W, f"{prefix}/b": self.b}


def init_dense(rng: np.random.Generator, in_features: int, out_features: int, activation: str = "none") -> DenseParams:
    return DenseParams(
        W=uniform_param(rng, in_features, (in_features, out_features)),
        b=uniform_param(rng, in_features, (out_features,)),
        activation=activation,
    )


def dense_forward(x: Tensor, p: DenseParams) -> Tensor:
    """activation(x·W + b); ведущие оси (например B×T) сворачиваются и восстанавливаются."""
    if x.shape[-1] != p.in_features:
        raise ShapeError(f"dense: input {x.shape} does not match W {p.W.shape}")
    lead = x.shape[:-1]
    flat = x if x.ndim == 2 else reshape(x, (-1, p.in_features))
    out = add(matmul(flat, p.W), p.b)
    fn = ACTIVATIONS[p.activation]
    if fn is not None:
        out = fn(out)
    if x.ndim != 2:
        out = reshape(out, (*lead, p.out_features))
    return out
