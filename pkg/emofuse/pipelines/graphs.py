"""
Графы моделей. Все параметры именуются `<model>/<layer>/<param>` и разбиты на группы,
по которым поэтапное обучение решает, что обновлять.

    audio_ffn     functionals -> dense [-> batchnorm] -> relu -> dropout ... -> dense(7)
    audio_gru     LLD/кадр -> GRU stack [-> attention] -> dropout -> dense(7)/кадр
    visual_gru    эмбеддинг/кадр -> (Bi)GRU [-> attention] -> dropout -> dense(7)/кадр
    early_fusion  1: concat(visual, lld) -> GRU -> dense(7)
                  2: concat(visual, audioGRU) -> GRU -> dense(7)
                  3: concat(visual, audioGRU) -> dense(7)
                  4: concat(visualGRU, audioGRU) -> GRU -> dense(7)
"""
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from gradtape import Tensor, concat, cross_entropy, relu
from layers import (
    AttentionParams,
    BatchNormParams,
    DenseParams,
    DropoutSpec,
    GruParams,
    attention_gate,
    batchnorm_forward,
    bigru_forward,
    dense_forward,
    dropout_forward,
    gru_forward,
    init_attention,
    init_batchnorm,
    init_dense,
    init_gru,
)
from maps.classes import NUM_CLASSES
from models.config import ModelConfig
from pipelines.aggregate import FrameLogits, aggregate_logits, onehot, valid_frame_rows
from seqprep.batching import Batch
from utils.errors import CheckpointError, ConfigError, ContractError, ShapeError


def sub_seed(seed: Optional[int], index: int) -> Optional[int]:
    if seed is None:
        return None
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


class RecurrentBranch:
    """
    (Bi)GRU-стек с необязательным attention-гейтом над его состояниями.
    Слои называются `<model>/<name>_gru_l{i}`, гейт - `<model>/<name>_attention`,
    поэтому ветка одинаково называется в одиночной модели и внутри early fusion.
    """

    def __init__(self, name: str, rng: np.random.Generator, input_size: int, hidden_size: int, num_layers: int,
                 bidirectional: bool = False, attention: bool = False):
        self.name = name
        self.forward_params = init_gru(rng, input_size, hidden_size, num_layers)
        self.backward_params: Optional[GruParams] = (
            init_gru(rng, input_size, hidden_size, num_layers) if bidirectional else None
        )
        self.output_size = hidden_size * (2 if bidirectional else 1)
        self.attention: Optional[AttentionParams] = init_attention(rng, self.output_size) if attention else None

    def named(self, prefix: str) -> Dict[str, Tensor]:
        out = self.forward_params.named(f"{prefix}/{self.name}_gru")
        if self.backward_params is not None:
            out.update(self.backward_params.named(f"{prefix}/{self.name}_gru_bwd"))
        return out

    def named_attention(self, prefix: str) -> Dict[str, Tensor]:
        return self.attention.named(f"{prefix}/{self.name}_attention") if self.attention is not None else {}

    def __call__(self, seq: Tensor, lengths: np.ndarray) -> Tensor:
        if self.backward_params is not None:
            states = bigru_forward(seq, lengths, self.forward_params, self.backward_params)
        else:
            states = gru_forward(seq, lengths, self.forward_params)
        if self.attention is not None:
            # оценки считаются по самим состояниям GRU
            states = attention_gate(states, states, self.attention)
        return states


class ModelGraph:
    """
    Общая часть графов: параметры, группы, буферы, потери и загрузка весов.
    Подклассы задают block_logits (и frame_logits для последовательностей).
    """
    kind = "base"
    d_visual: Optional[int] = None
    d_audio: Optional[int] = None

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self._groups: Dict[str, Dict[str, Tensor]] = {}
        self._batchnorms: Dict[str, BatchNormParams] = {}

    @property
    def prefix(self) -> str:
        return self.kind

    def _add_group(self, group: str, params: Mapping[str, Tensor]) -> None:
        if params:
            self._groups.setdefault(group, {}).update(params)

    def named_parameters(self) -> Dict[str, Tensor]:
        out: Dict[str, Tensor] = {}
        for params in self._groups.values():
            out.update(params)
        return out

    def parameter_groups(self) -> Dict[str, List[str]]:
        return {group: sorted(params) for group, params in self._groups.items()}

    def parameter_count(self) -> int:
        return sum(p.size for p in self.named_parameters().values())

    @property
    def frozen_groups(self) -> List[str]:
        return []

    def buffers(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name, bn in self._batchnorms.items():
            out.update(bn.buffers(name))
        return out

    def state_arrays(self) -> Dict[str, np.ndarray]:
        arrays = {name: p.values for name, p in self.named_parameters().items()}
        arrays.update(self.buffers())
        return arrays

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Строгая загрузка: каждый тензор модели обязан быть в чекпоинте с той же формой."""
        params = self.named_parameters()
        for name, param in params.items():
            if name not in arrays:
                raise CheckpointError(f"checkpoint has no tensor {name}")
            if arrays[name].shape != param.shape:
                raise CheckpointError(f"{name}: checkpoint shape {arrays[name].shape} vs model {param.shape}")
            param.values = np.array(arrays[name], dtype=np.float64)
        for name, bn in self._batchnorms.items():
            for key, value in bn.buffers(name).items():
                if key not in arrays or arrays[key].shape != value.shape:
                    raise CheckpointError(f"checkpoint has no compatible buffer {key}")
            bn.running_mean = np.array(arrays[f"{name}/running_mean"], dtype=np.float64)
            bn.running_var = np.array(arrays[f"{name}/running_var"], dtype=np.float64)

    def warm_start(self, arrays: Mapping[str, np.ndarray]) -> int:
        """Копирует тензоры, совпадающие по имени после `<model>/` и по форме; возвращает их число."""
        by_suffix = {name.split("/", 1)[-1]: value for name, value in arrays.items()}
        restored = 0
        for name, param in self.named_parameters().items():
            value = by_suffix.get(name.split("/", 1)[-1])
            if value is not None and value.shape == param.shape:
                param.values = np.array(value, dtype=np.float64)
                restored += 1
        return restored

    def _dropout(self, x: Tensor, train: bool, seed: Optional[int], index: int) -> Tensor:
        spec = DropoutSpec(rate=self.cfg.dropout, mode="train" if train else "eval")
        return dropout_forward(x, spec, sub_seed(seed, index))

    def block_logits(self, batch: Batch, train: bool = False, seed: Optional[int] = None) -> Tensor:
        raise NotImplementedError

    def batch_loss(self, batch: Batch, train: bool = True, seed: Optional[int] = None) -> Tuple[Tensor, np.ndarray, np.ndarray]:
        """
        Returns:
            (скалярная потеря, логиты блоков B×7 как массив, метки B)
        """
        logits = self.block_logits(batch, train=train, seed=seed)
        loss = cross_entropy(logits, Tensor.constant(onehot(batch.labels)))
        return loss, logits.values, batch.labels


class AudioFFN(ModelGraph):
    kind = "audio_ffn"

    def __init__(self, cfg: ModelConfig, d_audio: int, rng: np.random.Generator):
        super().__init__(cfg)
        self.d_audio = d_audio
        self.hidden: List[DenseParams] = []
        width = d_audio
        for i, units in enumerate(cfg.ffn_hidden):
            layer = init_dense(rng, width, units, activation="none" if cfg.batch_norm else "relu")
            self.hidden.append(layer)
            self._add_group("hidden", layer.named(f"{self.prefix}/dense{i}"))
            if cfg.batch_norm:
                bn = init_batchnorm(units)
                self._batchnorms[f"{self.prefix}/batchnorm{i}"] = bn
                self._add_group("hidden", bn.named(f"{self.prefix}/batchnorm{i}"))
            width = units
        self.classifier = init_dense(rng, width, NUM_CLASSES)
        self._add_group("classifier", self.classifier.named(f"{self.prefix}/classifier"))

    def block_logits(self, batch: Batch, train: bool = False, seed: Optional[int] = None) -> Tensor:
        if batch.audio is None:
            raise ContractError("audio_ffn needs audio functionals")
        x = Tensor.constant(batch.audio[:, 0, :])
        for i, layer in enumerate(self.hidden):
            x = dense_forward(x, layer)
            if self.cfg.batch_norm:
                x = relu(batchnorm_forward(x, self._batchnorms[f"{self.prefix}/batchnorm{i}"], training=train))
            x = self._dropout(x, train, seed, i)
        return dense_forward(x, self.classifier)


class SequenceGraph(ModelGraph):
    """Последовательностная модель: encode -> dropout -> dense(7) на каждом кадре."""

    def encode(self, batch: Batch) -> Tensor:
        raise NotImplementedError

    def _init_classifier(self, rng: np.random.Generator, width: int) -> None:
        self.classifier = init_dense(rng, width, NUM_CLASSES)
        self._add_group("classifier", self.classifier.named(f"{self.prefix}/classifier"))

    def frame_logits(self, batch: Batch, train: bool = False, seed: Optional[int] = None) -> FrameLogits:
        features = self._dropout(self.encode(batch), train, seed, 0)
        return FrameLogits(dense_forward(features, self.classifier), batch.lengths)

    def block_logits(self, batch: Batch, train: bool = False, seed: Optional[int] = None) -> Tensor:
        fl = self.frame_logits(batch, train=train, seed=seed)
        if self.cfg.classify_mode == "per_frame":
            return aggregate_logits(fl, "exact_sequence", "mean")
        return aggregate_logits(fl, self.cfg.classify_mode, self.cfg.effective_reduction)

    def batch_loss(self, batch: Batch, train: bool = True, seed: Optional[int] = None) -> Tuple[Tensor, np.ndarray, np.ndarray]:
        if self.cfg.classify_mode != "per_frame":
            return super().batch_loss(batch, train=train, seed=seed)
        fl = self.frame_logits(batch, train=train, seed=seed)
        rows, frame_labels = valid_frame_rows(fl, batch.labels)
        loss = cross_entropy(rows, Tensor.constant(onehot(frame_labels)))
        block = aggregate_logits(fl, "exact_sequence", "mean")
        return loss, block.values, batch.labels

    @staticmethod
    def _modality(batch: Batch, name: str, width: int) -> Tensor:
        values = getattr(batch, name)
        if values is None:
            raise ContractError(f"batch carries no {name} features")
        if values.shape[2] != width:
            raise ShapeError(f"{name} features have width {values.shape[2]}, model expects {width}")
        return Tensor.constant(values)


class AudioGRU(SequenceGraph):
    kind = "audio_gru"

    def __init__(self, cfg: ModelConfig, d_audio: int, rng: np.random.Generator):
        super().__init__(cfg)
        self.d_audio = d_audio
        self.branch = RecurrentBranch("audio", rng, d_audio, cfg.audio_hidden_size, cfg.audio_num_layers,
                                      attention=cfg.audio_attention)
        self._add_group("audio_gru", self.branch.named(self.prefix))
        self._add_group("attention", self.branch.named_attention(self.prefix))
        self._init_classifier(rng, self.branch.output_size)

    def encode(self, batch: Batch) -> Tensor:
        return self.branch(self._modality(batch, "audio", self.d_audio), batch.lengths)


class VisualGRU(SequenceGraph):
    kind = "visual_gru"

    def __init__(self, cfg: ModelConfig, d_visual: int, rng: np.random.Generator):
        super().__init__(cfg)
        self.d_visual = d_visual
        self.branch = RecurrentBranch("visual", rng, d_visual, cfg.hidden_size, cfg.num_layers,
                                      bidirectional=cfg.bidirectional, attention=cfg.attention)
        self._add_group("visual_gru", self.branch.named(self.prefix))
        self._add_group("attention", self.branch.named_attention(self.prefix))
        self._init_classifier(rng, self.branch.output_size)

    def encode(self, batch: Batch) -> Tensor:
        return self.branch(self._modality(batch, "visual", self.d_visual), batch.lengths)


class EarlyFusion(SequenceGraph):
    kind = "early_fusion"

    def __init__(self, cfg: ModelConfig, d_visual: int, d_audio: int, rng: np.random.Generator):
        super().__init__(cfg)
        self.option = cfg.fusion_option
        self.d_visual = d_visual
        self.d_audio = d_audio

        self.visual_branch: Optional[RecurrentBranch] = None
        self.audio_branch: Optional[RecurrentBranch] = None
        visual_width, audio_width = d_visual, d_audio
        if self.option == 4:
            self.visual_branch = RecurrentBranch("visual", rng, d_visual, cfg.visual_hidden_size, cfg.visual_num_layers)
            self._add_group("visual_gru", self.visual_branch.named(self.prefix))
            visual_width = self.visual_branch.output_size
        if self.option in (2, 3, 4):
            self.audio_branch = RecurrentBranch("audio", rng, d_audio, cfg.audio_hidden_size, cfg.audio_num_layers,
                                                attention=cfg.audio_attention)
            self._add_group("audio_gru", self.audio_branch.named(self.prefix))
            self._add_group("attention", self.audio_branch.named_attention(self.prefix))
            audio_width = self.audio_branch.output_size
        self.fusion_input_width = visual_width + audio_width

        self.fusion_branch: Optional[RecurrentBranch] = None
        width = self.fusion_input_width
        if self.option != 3:
            self.fusion_branch = RecurrentBranch("fusion", rng, width, cfg.hidden_size, cfg.num_layers,
                                                 bidirectional=cfg.bidirectional, attention=cfg.attention)
            self._add_group("fusion_gru", self.fusion_branch.named(self.prefix))
            self._add_group("attention", self.fusion_branch.named_attention(self.prefix))
            width = self.fusion_branch.output_size
        self._init_classifier(rng, width)

    @property
    def frozen_groups(self) -> List[str]:
        return ["visual_gru"] if self.option == 4 and self.cfg.freeze_visual else []

    def encode(self, batch: Batch) -> Tensor:
        visual = self._modality(batch, "visual", self.d_visual)
        audio = self._modality(batch, "audio", self.d_audio)
        if self.visual_branch is not None:
            visual = self.visual_branch(visual, batch.lengths)
        if self.audio_branch is not None:
            audio = self.audio_branch(audio, batch.lengths)
        fused = concat([visual, audio], axis=2)
        if self.fusion_branch is None:
            return fused
        return self.fusion_branch(fused, batch.lengths)


def build_model(cfg: ModelConfig, d_visual: Optional[int], d_audio: Optional[int], seed: int = 0) -> ModelGraph:
    """
    Args:
        cfg: Конфигурация модели
        d_visual: Размерность визуальных признаков (None, если модальности нет)
        d_audio: Размерность аудио-признаков (None, если модальности нет)
        seed: Сид инициализации, если в cfg не задан init_seed

    Returns:
        Граф с инициализированными параметрами
    """
    from maps.graphs import GRAPH_CLASSES

    if cfg.uses_visual and not d_visual:
        raise ConfigError(f"{cfg.kind} needs visual features")
    if cfg.uses_audio and not d_audio:
        raise ConfigError(f"{cfg.kind} needs audio features")
    for name, dim in (("visual", d_visual), ("audio", d_audio)):
        if dim is not None and dim < 1:
            raise ConfigError(f"{name} dimension must be positive, got {dim}")

    rng = np.random.default_rng(cfg.init_seed if cfg.init_seed is not None else seed)
    graph_cls = GRAPH_CLASSES[cfg.kind]
    if graph_cls is EarlyFusion:
        return graph_cls(cfg, d_visual, d_audio, rng)
    if cfg.uses_visual:
        return graph_cls(cfg, d_visual, rng)
    return graph_cls(cfg, d_audio, rng)
