from .tensor import Tape, Tensor, backward, current_tape
from .ops import (
    OPS,
    add,
    apply_op,
    concat,
    cross_entropy,
    elementwise,
    getitem,
    matmul,
    mean,
    median,
    mul,
    relu,
    reshape,
    sigmoid,
    softmax,
    stack,
    sub,
    sum_,
    tanh,
    where,
)
from .check import GradCheckReport, finite_diff_check

__all__ = [
    "Tape",
    "Tensor",
    "backward",
    "current_tape",
    "OPS",
    "add",
    "apply_op",
    "concat",
    "cross_entropy",
    "elementwise",
    "getitem",
    "matmul",
    "mean",
    "median",
    "mul",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "stack",
    "sub",
    "sum_",
    "tanh",
    "where",
    "GradCheckReport",
    "finite_diff_check",
]
