"""
Лог предсказаний: одна строка на видео

    video_id<TAB>label_index|-<TAB>pred_index<TAB>l0,l1,l2,l3,l4,l5,l6

Логиты пишутся 17 значащими цифрами, чтение-запись побитово точны.
"""
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Union

from pydantic import ValidationError

from layers.checkpoint import format_float
from maps.classes import class_word
from models.records import PredictionRecord, SubmissionEntry
from utils.errors import ContractError, PredictionLogError, undecodable_line

NO_LABEL = "-"


def format_record(record: PredictionRecord) -> str:
    label = NO_LABEL if record.label is None else str(record.label)
    logits = ",".join(format_float(v) for v in record.logits)
    return f"{record.video_id}\t{label}\t{record.predicted}\t{logits}"


def write_prediction_log(records: Iterable[PredictionRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for record in records:
            fh.write(format_record(record) + "\n")
    return path


def parse_record(line: str, line_number: int) -> PredictionRecord:
    fields = line.split("\t")
    if len(fields) != 4:
        raise PredictionLogError(f"expected 4 tab-separated fields, got {len(fields)}", line_number)
    video_id, label, predicted, logits = fields
    try:
        return PredictionRecord(
            video_id=video_id,
            label=None if label == NO_LABEL else int(label),
            predicted=int(predicted),
            logits=tuple(float(v) for v in logits.split(",")),
        )
    except ValidationError as e:
        raise PredictionLogError(e.errors()[0]["msg"], line_number) from None
    except ValueError as e:
        raise PredictionLogError(str(e), line_number) from None


def read_prediction_log(path: Union[str, Path]) -> List[PredictionRecord]:
    path = Path(path)
    if not path.is_file():
        raise PredictionLogError(f"prediction log not found: {path}")
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError:
        raise PredictionLogError("not valid UTF-8", undecodable_line(path)) from None
    records = []
    seen = set()
    for number, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        record = parse_record(line, number)
        if record.video_id in seen:
            raise PredictionLogError(f"duplicate video {record.video_id}", number)
        seen.add(record.video_id)
        records.append(record)
    return records


def write_submission(records: Iterable[PredictionRecord], out_dir: Union[str, Path]) -> List[Path]:
    """Файл `<sample_id>.txt` на каждую запись, внутри только слово класса и перевод строки."""
    out_dir = Path(out_dir)
    try:
        entries = [SubmissionEntry(sample_id=r.video_id, label_word=class_word(r.predicted)) for r in records]
    except ValidationError as e:
        raise ContractError(str(e.errors()[0]["msg"])) from None
    duplicates = sorted(i for i, n in Counter(e.sample_id for e in entries).items() if n > 1)
    if duplicates:
        raise ContractError(f"duplicate sample ids: {duplicates[:5]}")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for entry in entries:
        path = out_dir / f"{entry.sample_id}.txt"
        path.write_text(entry.label_word.value + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def read_submission(out_dir: Union[str, Path]) -> Dict[str, str]:
    return {path.stem: path.read_text(encoding="utf-8").strip() for path in sorted(Path(out_dir).glob("*.txt"))}
