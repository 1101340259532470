from enum import Enum
from typing import Dict, List

from utils.errors import ContractError


class EmotionEnum(str, Enum):
    ANGRY = "Angry"
    DISGUST = "Disgust"
    FEAR = "Fear"
    HAPPY = "Happy"
    NEUTRAL = "Neutral"
    SAD = "Sad"
    SURPRISE = "Surprise"


# Порядок классов алфавитный, как в листинге каталогов датасета
CLASS_WORDS: List[str] = [e.value for e in EmotionEnum]
NUM_CLASSES = len(CLASS_WORDS)

word_to_index: Dict[str, int] = {word: i for i, word in enumerate(CLASS_WORDS)}
index_to_word: Dict[int, str] = dict(enumerate(CLASS_WORDS))


def class_index(word: str) -> int:
    try:
        return word_to_index[word]
    except KeyError:
        raise ContractError(f"unknown label word '{word}', expected one of {CLASS_WORDS}") from None


def class_word(index: int) -> str:
    try:
        return index_to_word[int(index)]
    except KeyError:
        raise ContractError(f"class index {index} outside 0..{NUM_CLASSES - 1}") from None
