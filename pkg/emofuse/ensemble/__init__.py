from .logs import LogTable, build_table, load_logs
from .weights import ClassWeights, compute_class_weights
from .regression import RegressionWeights, learn_regression
from .fusion import METHODS, FusionSpec, fuse, fused_scores, learn_fusion_regression, rescale_logits

__all__ = [
    "LogTable",
    "build_table",
    "load_logs",
    "ClassWeights",
    "compute_class_weights",
    "RegressionWeights",
    "learn_regression",
    "METHODS",
    "FusionSpec",
    "fuse",
    "fused_scores",
    "learn_fusion_regression",
    "rescale_logits",
]
