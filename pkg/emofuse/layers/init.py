import math
from typing import Sequence

import numpy as np

from gradtape import Tensor


def uniform_param(rng: np.random.Generator, fan_in: int, shape: Sequence[int], name: str = None) -> Tensor:
    """Равномерная инициализация в [-sqrt(1/fan_in), +sqrt(1/fan_in)]."""
    bound = math.sqrt(1.0 / fan_in)
    return Tensor.parameter(rng.uniform(-bound, bound, size=tuple(shape)), name=name)
