from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from gradtape.tensor import Tape, Tensor
from utils.errors import ContractError, NonDeterministicGraphError


@dataclass
class GradCheckReport:
    per_parameter: Dict[str, float] = field(default_factory=dict)
    worst: Optional[Tuple[str, int]] = None

    @property
    def max_relative_error(self) -> float:
        return max(self.per_parameter.values(), default=0.0)

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_relative_error <= tolerance


def _scalar(loss: Tensor) -> float:
    if loss.shape != ():
        raise ContractError(f"graph builder must return a scalar, got shape {loss.shape}")
    return loss.item()


def finite_diff_check(
    build: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    eps: float = 1e-5,
    floor: float = 1e-6,
    max_checks: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """
    Сравнивает градиенты ленты с центральными конечными разностями.

    Args:
        build: Строит скалярный loss из текущих значений params (без аргументов)
        params: Проверяемые параметры; их values временно меняются на месте
        eps: Шаг разности, > 0
        floor: Нижняя граница знаменателя относительной ошибки
        max_checks: Если задано - проверяется случайная выборка координат каждого параметра
        seed: Сид выборки координат

    Returns:
        Отчёт с максимальной относительной ошибкой по каждому параметру
    """
    if eps <= 0:
        raise ContractError(f"eps must be positive, got {eps}")

    with Tape() as tape:
        loss = build()
    if tape.stochastic:
        raise NonDeterministicGraphError("graph records a stochastic op (dropout in train mode)")
    base = _scalar(loss)
    if _scalar(build()) != base:
        raise NonDeterministicGraphError("two forward passes on identical parameters differ")
    tape.backward(loss)

    rng = np.random.default_rng(seed)
    report = GradCheckReport()
    worst_err = -1.0
    for name, param in params.items():
        analytic = (param.grad if param.grad is not None else np.zeros_like(param.values)).reshape(-1).copy()
        flat = param.values.reshape(-1)
        coords = np.arange(flat.size)
        if max_checks is not None and flat.size > max_checks:
            coords = np.sort(rng.choice(flat.size, size=max_checks, replace=False))
        errors = []
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = _scalar(build())
            flat[i] = orig - eps
            f_minus = _scalar(build())
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = analytic[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            errors.append(err)
            if err > worst_err:
                worst_err = err
                report.worst = (name, int(i))
        report.per_parameter[name] = float(max(errors, default=0.0))
    return report
