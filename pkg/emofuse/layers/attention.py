from dataclasses import dataclass
from typing import Dict

import numpy as np

from gradtape import Tensor, add, matmul, mul, reshape, sigmoid
from layers.init import uniform_param
from utils.errors import ShapeError


@dataclass
class AttentionParams:
    """f_phi: один dense-слой + сигмоида, score на каждый признак каждого шага."""
    W_a: Tensor
    b_a: Tensor

    def named(self, prefix: str) -> Dict[str, Tensor]:
        return {f"{prefix}/W_a": self.W_a, f"{prefix}/b_a": self.b_a}


def init_attention(rng: np.random.Generator, features: int) -> AttentionParams:
    return AttentionParams(
        W_a=uniform_param(rng, features, (features, features)),
        b_a=uniform_param(rng, features, (features,)),
    )


def attention_scores(x: Tensor, p: AttentionParams) -> Tensor:
    k = x.shape[-1]
    if p.W_a.shape != (k, k):
        raise ShapeError(f"attention: input width {k} vs W_a {p.W_a.shape}")
    flat = reshape(x, (-1, k))
    return reshape(sigmoid(add(matmul(flat, p.W_a), p.b_a)), x.shape)


def attention_gate(z: Tensor, x: Tensor, p: AttentionParams) -> Tensor:
    """g = sigmoid(x·W_a + b_a) ⊙ z, так что |g| <= |z| поэлементно."""
    if z.shape != x.shape:
        raise ShapeError(f"attention: z {z.shape} vs x {x.shape}")
    return mul(attention_scores(x, p), z)
