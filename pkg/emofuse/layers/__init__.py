from .dense import DenseParams, dense_forward, init_dense
from .gru import GruLayerParams, GruParams, bigru_forward, gru_cell_step, gru_forward, init_gru
from .attention import AttentionParams, attention_gate, init_attention
from .regularization import BatchNormParams, DropoutSpec, batchnorm_forward, dropout_forward, init_batchnorm
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "DenseParams",
    "dense_forward",
    "init_dense",
    "GruLayerParams",
    "GruParams",
    "bigru_forward",
    "gru_cell_step",
    "gru_forward",
    "init_gru",
    "AttentionParams",
    "attention_gate",
    "init_attention",
    "BatchNormParams",
    "DropoutSpec",
    "batchnorm_forward",
    "dropout_forward",
    "init_batchnorm",
    "load_checkpoint",
    "save_checkpoint",
]
