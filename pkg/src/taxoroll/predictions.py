"""Prediction records and the adapter for externally produced predictions.

Transformer-based models run elsewhere (e.g. a fine-tuned encoder) join
the evaluation and review loop through a plain CSV of per-record
predictions instead of being retrained in-repo.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import MalformedCsv, MissingColumn
from .hierarchy import ClassCode, parse_code

EXTERNAL_CSV_COLUMNS = ("record_key", "predicted_code", "confidence", "model_id")


@dataclass(frozen=True)
class Prediction:
    """One model's class assignment for one record."""

    record_key: str
    predicted: ClassCode
    confidence: float
    model_id: str


def load_external_predictions(path: str | Path) -> list[Prediction]:
    """Parse an external predictions CSV.

    Header: ``record_key,predicted_code,confidence,model_id`` with
    confidence in [0, 1]. Malformed rows abort with row diagnostics;
    matching keys against a dataset happens downstream.
    """
    path = Path(path)
    predictions: list[Prediction] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MalformedCsv(f"{path}: empty file")
        missing = [c for c in EXTERNAL_CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
        for rownum, row in enumerate(reader, start=2):
            if any(row.get(c) is None for c in EXTERNAL_CSV_COLUMNS):
                raise MalformedCsv(f"{path}: row {rownum}: fewer fields than header")
            try:
                confidence = float(row["confidence"])
            except ValueError:
                raise MalformedCsv(
                    f"{path}: row {rownum}: confidence {row['confidence']!r} is not a number"
                ) from None
            if not 0.0 <= confidence <= 1.0:
                raise MalformedCsv(
                    f"{path}: row {rownum}: confidence {confidence} outside [0, 1]"
                )
            try:
                code = parse_code(row["predicted_code"])
            except Exception as exc:
                raise MalformedCsv(f"{path}: row {rownum}: {exc}") from None
            predictions.append(
                Prediction(
                    record_key=row["record_key"],
                    predicted=code,
                    confidence=confidence,
                    model_id=row["model_id"],
                )
            )
    return predictions


def write_predictions_csv(predictions: list[Prediction], path: str | Path) -> int:
    """Write predictions in the external-adapter CSV format."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EXTERNAL_CSV_COLUMNS)
        for p in predictions:
            writer.writerow([p.record_key, p.predicted, f"{p.confidence:.6f}", p.model_id])
    return len(predictions)
