from typing import Optional


class EmoFuseError(Exception):
    """Базовая ошибка тулкита. CLI превращает её в однострочную диагностику."""


class ShapeError(EmoFuseError, ValueError):
    pass


class TensorValueError(EmoFuseError, ValueError):
    pass


class ContractError(EmoFuseError, ValueError):
    pass


class ConfigError(EmoFuseError, ValueError):
    pass


class ManifestError(EmoFuseError, ValueError):
    """Ошибка разбора манифеста; line_number - номер строки в файле (с 1)."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class AlignmentError(EmoFuseError, ValueError):
    pass


class FeatureFileError(EmoFuseError, ValueError):
    pass


class CheckpointError(EmoFuseError, ValueError):
    pass


class CoverageError(EmoFuseError, ValueError):
    pass


class RegressionError(EmoFuseError, ValueError):
    pass


class PredictionLogError(EmoFuseError, ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class NonDeterministicGraphError(EmoFuseError, ValueError):
    pass


def undecodable_line(path) -> Optional[int]:
    """Номер первой строки файла (с 1), которая не декодируется как UTF-8."""
    with open(path, "rb") as fh:
        for number, raw in enumerate(fh, start=1):
            try:
                raw.decode("utf-8")
            except UnicodeDecodeError:
                return number
    return None
