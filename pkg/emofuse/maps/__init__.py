from .classes import CLASS_WORDS, NUM_CLASSES, EmotionEnum, class_index, class_word

__all__ = [
    "CLASS_WORDS",
    "NUM_CLASSES",
    "EmotionEnum",
    "class_index",
    "class_word",
]
