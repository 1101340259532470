"""
GRU-ячейка, стек слоёв с маскированием по длине последовательности
и двунаправленная обёртка.

Шаги t >= lengths[b] замораживают состояние строки b: оно переносится
без изменений и не получает градиента.
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from gradtape import Tensor, add, concat, getitem, matmul, reshape, sigmoid, stack, tanh, where
from layers.init import uniform_param
from utils.errors import ContractError, ShapeError


@dataclass
class GruLayerParams:
    W_z: Tensor
    U_z: Tensor
    b_z: Tensor
    W_r: Tensor
    U_r: Tensor
    b_r: Tensor
    W_h: Tensor
    U_h: Tensor
    b_h: Tensor

    def named(self, prefix: str) -> Dict[str, Tensor]:
        return {f"{prefix}/{key}": value for key, value in vars(self).items()}


@dataclass
class GruParams:
    layers: List[GruLayerParams] = field(default_factory=list)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def hidden_size(self) -> int:
        return self.layers[0].U_z.shape[0]

    @property
    def input_size(self) -> int:
        return self.layers[0].W_z.shape[0]

    def named(self, prefix: str) -> Dict[str, Tensor]:
        """prefix вида '<model>/<layer>'; слой l получает суффикс _l{l}."""
        out: Dict[str, Tensor] = {}
        for i, layer in enumerate(self.layers):
            out.update(layer.named(f"{prefix}_l{i}"))
        return out


def init_gru(rng: np.random.Generator, input_size: int, hidden_size: int = 128, num_layers: int = 2) -> GruParams:
    if input_size < 1 or hidden_size < 1 or num_layers < 1:
        raise ContractError(f"gru sizes must be positive: in={input_size} hidden={hidden_size} layers={num_layers}")
    layers = []
    for i in range(num_layers):
        fan_in = input_size if i == 0 else hidden_size
        gates = {}
        for g in ("z", "r", "h"):
            gates[f"W_{g}"] = uniform_param(rng, fan_in, (fan_in, hidden_size))
            gates[f"U_{g}"] = uniform_param(rng, hidden_size, (hidden_size, hidden_size))
            gates[f"b_{g}"] = uniform_param(rng, hidden_size, (hidden_size,))
        layers.append(GruLayerParams(**gates))
    return GruParams(layers)


def _gate_update(xz: Tensor, xr: Tensor, xh: Tensor, h_prev: Tensor, lp: GruLayerParams) -> Tensor:
    z = sigmoid(add(xz + matmul(h_prev, lp.U_z), lp.b_z))
    r = sigmoid(add(xr + matmul(h_prev, lp.U_r), lp.b_r))
    h_cand = tanh(add(xh + matmul(r * h_prev, lp.U_h), lp.b_h))
    return (1.0 - z) * h_prev + z * h_cand


def gru_cell_step(x_t: Tensor, h_prev: Tensor, p: GruParams, layer: int) -> Tensor:
    """
    Один шаг слоя layer:
        z = σ(xW_z + hU_z + b_z), r = σ(xW_r + hU_r + b_r)
        h~ = tanh(xW_h + (r⊙h)U_h + b_h), h_t = (1-z)⊙h + z⊙h~
    """
    if not 0 <= layer < p.num_layers:
        raise ContractError(f"layer {layer} out of range for {p.num_layers}-layer GRU")
    lp = p.layers[layer]
    if x_t.ndim != 2 or x_t.shape[1] != lp.W_z.shape[0]:
        raise ShapeError(f"gru step: x_t {x_t.shape} vs W {lp.W_z.shape}")
    if h_prev.shape != (x_t.shape[0], lp.U_z.shape[0]):
        raise ShapeError(f"gru step: h_prev {h_prev.shape} vs batch {x_t.shape[0]} hidden {lp.U_z.shape[0]}")
    return _gate_update(matmul(x_t, lp.W_z), matmul(x_t, lp.W_r), matmul(x_t, lp.W_h), h_prev, lp)


def check_lengths(lengths, batch: int, steps: int) -> np.ndarray:
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.shape != (batch,):
        raise ShapeError(f"lengths shape {lengths.shape} does not match batch {batch}")
    if (lengths < 1).any() or (lengths > steps).any():
        raise ContractError(f"lengths must lie in [1, {steps}], got {lengths.tolist()}")
    return lengths


def gru_forward(seq: Tensor, lengths, p: GruParams) -> Tensor:
    """Стек GRU над B×T×in, h_0 = 0; возвращает состояния последнего слоя B×T×H."""
    if seq.ndim != 3:
        raise ShapeError(f"gru expects B×T×in input, got {seq.shape}")
    B, T, _ = seq.shape
    lengths = check_lengths(lengths, B, T)
    if seq.shape[2] != p.input_size:
        raise ShapeError(f"gru: input width {seq.shape[2]} vs W {p.layers[0].W_z.shape}")
    H = p.hidden_size
    valid = [(t < lengths)[:, None] for t in range(T)]

    layer_input = seq
    for lp in p.layers:
        width = layer_input.shape[2]
        flat = reshape(layer_input, (B * T, width))
        # входные проекции считаются сразу для всех шагов
        xz = reshape(matmul(flat, lp.W_z), (B, T, H))
        xr = reshape(matmul(flat, lp.W_r), (B, T, H))
        xh = reshape(matmul(flat, lp.W_h), (B, T, H))
        h = Tensor.constant(np.zeros((B, H)))
        states = []
        for t in range(T):
            step = (slice(None), t, slice(None))
            h_new = _gate_update(getitem(xz, step), getitem(xr, step), getitem(xh, step), h, lp)
            h = h_new if valid[t].all() else where(valid[t], h_new, h)
            states.append(h)
        layer_input = stack(states, axis=1)
    return layer_input


def reverse_valid_index(lengths: np.ndarray, steps: int) -> np.ndarray:
    """Индексы B×T, разворачивающие только валидный префикс каждой строки (инволюция)."""
    t = np.arange(steps)[None, :]
    lengths = np.asarray(lengths)[:, None]
    return np.where(t < lengths, lengths - 1 - t, t)


def bigru_forward(seq: Tensor, lengths, p_fwd: GruParams, p_bwd: GruParams) -> Tensor:
    """Прямой и обратный стеки, склейка по признакам -> B×T×2H."""
    if seq.ndim != 3:
        raise ShapeError(f"bigru expects B×T×in input, got {seq.shape}")
    B, T, _ = seq.shape
    lengths = check_lengths(lengths, B, T)
    forward_states = gru_forward(seq, lengths, p_fwd)
    rows = np.arange(B)[:, None]
    rev = reverse_valid_index(lengths, T)
    reversed_states = gru_forward(getitem(seq, (rows, rev)), lengths, p_bwd)
    backward_states = getitem(reversed_states, (rows, rev))
    return concat([forward_states, backward_states], axis=2)
