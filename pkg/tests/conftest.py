import os

# файловые логи в тестах не нужны; переменные читаются при импорте utils.settings
os.environ["EMOFUSE_LOG_DIR"] = ""
os.environ.setdefault("EMOFUSE_LOG_LEVEL", "WARNING")

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pytest

from maps.classes import CLASS_WORDS, NUM_CLASSES
from seqprep.features import write_feature_file

FEATURES_DIR = "features"


@dataclass
class SyntheticVideo:
    video_id: str
    label: int
    visual: np.ndarray
    audio: Optional[np.ndarray] = None
    functional: Optional[np.ndarray] = None

    @property
    def length(self) -> int:
        return self.visual.shape[0]


def synthetic_videos(
    seed: int,
    per_class: int,
    dim: int = 32,
    min_len: int = 20,
    max_len: int = 120,
    signal_frames: int = 3,
    amplitude: float = 2.0,
    audio_dim: Optional[int] = None,
    functional_dim: Optional[int] = None,
    prototype_seed: int = 1234,
) -> List[SyntheticVideo]:
    """
    Семь классов; в каждом видео signal_frames подряд идущих кадров несут
    шаблон класса поверх шума N(0, 1), остальные кадры - чистый шум.
    Шаблоны зависят только от prototype_seed, поэтому обучающий и проверочный
    наборы с разными seed размечены одинаково.
    """
    proto_rng = np.random.default_rng(prototype_seed)
    visual_proto = proto_rng.choice([-1.0, 1.0], size=(NUM_CLASSES, dim)) * amplitude
    audio_proto = proto_rng.choice([-1.0, 1.0], size=(NUM_CLASSES, audio_dim)) * amplitude if audio_dim else None
    functional_proto = proto_rng.normal(size=(NUM_CLASSES, functional_dim)) if functional_dim else None

    rng = np.random.default_rng(seed)
    videos = []
    for i in range(per_class):
        for label in range(NUM_CLASSES):
            length = int(rng.integers(min_len, max_len + 1))
            start = int(rng.integers(0, length - signal_frames + 1))
            visual = rng.normal(size=(length, dim))
            visual[start:start + signal_frames] += visual_proto[label]
            audio = None
            if audio_dim:
                audio = rng.normal(size=(length, audio_dim))
                audio[start:start + signal_frames] += audio_proto[label]
            functional = None
            if functional_dim:
                functional = functional_proto[label] + 0.5 * rng.normal(size=functional_dim)
            videos.append(
                SyntheticVideo(
                    video_id=f"{CLASS_WORDS[label].lower()}_{seed}_{i:03d}",
                    label=label,
                    visual=visual,
                    audio=audio,
                    functional=functional,
                )
            )
    return videos


def write_dataset(root: Path, name: str, videos: Sequence[SyntheticVideo]) -> Path:
    """Файлы признаков в root/features и манифест root/<name>.tsv; возвращает путь манифеста."""
    root = Path(root)
    lines = []
    for video in videos:
        indices = np.arange(video.length)
        visual_path = f"{FEATURES_DIR}/{video.video_id}_visual.csv"
        write_feature_file(root / visual_path, indices, video.visual)
        audio_path = "-"
        if video.functional is not None:
            audio_path = f"{FEATURES_DIR}/{video.video_id}_functional.csv"
            write_feature_file(root / audio_path, [0], video.functional[None, :])
        elif video.audio is not None:
            audio_path = f"{FEATURES_DIR}/{video.video_id}_audio.csv"
            write_feature_file(root / audio_path, indices, video.audio)
        word = CLASS_WORDS[video.label]
        for index in indices:
            lines.append(f"{video.video_id}\t{word}\t{index}\t{visual_path}\t{audio_path}")
    manifest = root / f"{name}.tsv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def write_run_config(path: Path, **values) -> Path:
    path.write_text("".join(f"{key} = {value}\n" for key, value in values.items()), encoding="utf-8")
    return path


@pytest.fixture
def make_videos():
    return synthetic_videos


@pytest.fixture
def dataset_writer(tmp_path):
    def write(name: str, videos: Sequence[SyntheticVideo]) -> Path:
        return write_dataset(tmp_path, name, videos)
    return write


@pytest.fixture
def config_writer(tmp_path):
    def write(name: str = "run.cfg", **values) -> Path:
        return write_run_config(tmp_path / name, **values)
    return write


@pytest.fixture
def three_video_manifest(tmp_path) -> Path:
    """Angry (3 кадра), Happy (2 кадра), Happy (4 кадра), визуальные признаки D=4."""
    rng = np.random.default_rng(0)
    videos = [
        SyntheticVideo("clip_a", 0, rng.normal(size=(3, 4))),
        SyntheticVideo("clip_b", 3, rng.normal(size=(2, 4))),
        SyntheticVideo("clip_c", 3, rng.normal(size=(4, 4))),
    ]
    return write_dataset(tmp_path, "three", videos)
