"""
Текстовый чекпоинт: таблица именованных тензоров.

    #emofuse-checkpoint v1
    #config {...json...}
    <model>/<layer>/<param>\t<d1,d2,...>\t<v1,v2,...>

Значения пишутся 17 значащими цифрами, поэтому чтение-запись побитово точны.
"""
import json
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from utils.errors import CheckpointError, undecodable_line

MAGIC = "#emofuse-checkpoint v1"


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def save_checkpoint(path: Union[str, Path], arrays: Mapping[str, np.ndarray], config: Optional[dict] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MAGIC]
    if config is not None:
        lines.append("#config " + json.dumps(config, sort_keys=True))
    for name in sorted(arrays):
        if "\t" in name or "\n" in name:
            raise CheckpointError(f"invalid parameter name: {name!r}")
        values = np.asarray(arrays[name], dtype=np.float64)
        shape = ",".join(str(d) for d in values.shape)
        body = ",".join(format_float(v) for v in values.reshape(-1))
        lines.append(f"{name}\t{shape}\t{body}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[Optional[dict], Dict[str, np.ndarray]]:
    """
    Returns:
        (config или None, словарь имя -> массив)
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError:
        raise CheckpointError(f"{path}: line {undecodable_line(path)}: not valid UTF-8") from None
    if not lines or lines[0] != MAGIC:
        raise CheckpointError(f"{path}: not an emofuse checkpoint")

    config: Optional[dict] = None
    arrays: Dict[str, np.ndarray] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        if line.startswith("#config "):
            config = json.loads(line[len("#config "):])
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise CheckpointError(f"{path}: line {number}: expected 3 tab-separated fields")
        name, shape_text, body = parts
        if name in arrays:
            raise CheckpointError(f"{path}: line {number}: duplicate tensor {name}")
        try:
            shape = tuple(int(d) for d in shape_text.split(",")) if shape_text else ()
            flat = np.array([float(v) for v in body.split(",")] if body else [], dtype=np.float64)
            arrays[name] = flat.reshape(shape)
        except ValueError as e:
            raise CheckpointError(f"{path}: line {number}: {e}") from None
    return config, arrays
