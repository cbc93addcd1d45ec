"""Labeled description records: ingestion, cleaning, splitting, counting.

Records carry a free-text device description plus one optional class code
per breakdown level. Datasets are immutable after construction; splitting
returns a new dataset with TRAIN/VALIDATION tags.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidCode, MalformedCsv, MissingColumn, TooFewRecords
from .hierarchy import BreakdownLevel, ClassCode, Hierarchy, parse_code

CSV_COLUMNS = ("record_id", "plant_id", "description", "bl0", "bl1", "bl2")

_LEVEL_COLUMNS = {
    "bl0": BreakdownLevel.BL0,
    "bl1": BreakdownLevel.BL1,
    "bl2": BreakdownLevel.BL2,
}


class Split(Enum):
    TRAIN = "TRAIN"
    VALIDATION = "VALIDATION"


@dataclass(frozen=True)
class Record:
    """One device description with its per-level class labels."""

    record_id: str
    plant_id: str
    description: str
    labels: Mapping[BreakdownLevel, ClassCode | None]

    @property
    def key(self) -> str:
        return f"{self.plant_id}/{self.record_id}"

    def label(self, level: BreakdownLevel) -> ClassCode | None:
        return self.labels.get(level)


@dataclass(frozen=True)
class RelabelStats:
    """Outcome counters of applying a label mapping to one level."""

    level: BreakdownLevel
    n_rewritten: int
    n_excluded: int


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of records plus optional split assignment."""

    records: tuple[Record, ...]
    split: Mapping[str, Split] = field(default_factory=dict)
    rejects: tuple[tuple[int, str], ...] = ()
    relabel_stats: tuple[RelabelStats, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def subset(self, split: Split) -> tuple[Record, ...]:
        return tuple(r for r in self.records if self.split.get(r.key) is split)

    def train_records(self) -> tuple[Record, ...]:
        return self.subset(Split.TRAIN)

    def validation_records(self) -> tuple[Record, ...]:
        return self.subset(Split.VALIDATION)

    def record_by_key(self, key: str) -> Record | None:
        for r in self.records:
            if r.key == key:
                return r
        return None


@dataclass(frozen=True)
class ClassCounts:
    """Per-class sample histogram at one breakdown level."""

    level: BreakdownLevel
    counts: Mapping[ClassCode, int]

    def total(self) -> int:
        return sum(self.counts.values())


# -- text cleaning -------------------------------------------------------

_NON_ALNUM_RE = re.compile(r"[^a-z0-9\s]")
_WS_RE = re.compile(r"\s+")
_INT_TOKEN_RE = re.compile(r"^\d+$")


def clean_text(raw: str, extra_patterns: Sequence[str] = ()) -> str:
    """Normalize a raw description for tokenization.

    Lowercases, replaces every character outside letters/digits/whitespace
    with a space, collapses whitespace runs, drops standalone integer
    tokens (component enumerations like "engine 2"), and trims. Extra
    regex patterns, when given, are blanked out first. Idempotent; may
    return an empty string.
    """
    text = raw.lower()
    for pattern in extra_patterns:
        text = re.sub(pattern, " ", text)
    text = _NON_ALNUM_RE.sub(" ", text)
    tokens = [t for t in _WS_RE.split(text) if t and not _INT_TOKEN_RE.match(t)]
    return " ".join(tokens)


def tokenize(cleaned: str) -> list[str]:
    """Whitespace-split an already cleaned string (order preserved)."""
    return cleaned.split()


# -- CSV ingestion -------------------------------------------------------

def ingest_csv(
    path: str | Path,
    hierarchies: Mapping[BreakdownLevel, Hierarchy],
) -> Dataset:
    """Parse a record CSV, validating labels against the hierarchies.

    Rows with invalid or unknown codes, duplicate keys or missing ids are
    collected into ``Dataset.rejects`` as ``(row_number, reason)`` pairs
    rather than aborting the ingest. Raises :class:`MissingColumn` /
    :class:`MalformedCsv` only for structural file problems.
    """
    path = Path(path)
    records: list[Record] = []
    rejects: list[tuple[int, str]] = []
    seen_keys: set[str] = set()

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MalformedCsv(f"{path}: empty file, expected header {','.join(CSV_COLUMNS)}")
        missing = [c for c in CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")

        for rownum, row in enumerate(reader, start=2):  # header is row 1
            if any(row.get(c) is None for c in CSV_COLUMNS):
                rejects.append((rownum, "short row: fewer fields than header"))
                continue
            record_id = row["record_id"].strip()
            plant_id = row["plant_id"].strip()
            if not record_id:
                rejects.append((rownum, "empty record_id"))
                continue
            key = f"{plant_id}/{record_id}"
            if key in seen_keys:
                rejects.append((rownum, f"duplicate record key {key!r}"))
                continue

            labels: dict[BreakdownLevel, ClassCode | None] = {}
            bad = None
            for column, level in _LEVEL_COLUMNS.items():
                cell = row[column].strip()
                if not cell:
                    labels[level] = None
                    continue
                try:
                    code = parse_code(cell)
                except InvalidCode as exc:
                    bad = f"column {column}: {exc}"
                    break
                hierarchy = hierarchies.get(level)
                if hierarchy is not None and code not in hierarchy:
                    bad = f"column {column}: code {code!r} not in {level} hierarchy"
                    break
                labels[level] = code
            if bad is not None:
                rejects.append((rownum, bad))
                continue

            seen_keys.add(key)
            records.append(
                Record(
                    record_id=record_id,
                    plant_id=plant_id,
                    description=row["description"],
                    labels=labels,
                )
            )

    return Dataset(records=tuple(records), rejects=tuple(rejects))


def write_rejects(ds: Dataset, path: str | Path) -> int:
    """Write the rejects report (``row,reason``); returns the row count."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "reason"])
        for row, reason in ds.rejects:
            writer.writerow([row, reason])
    return len(ds.rejects)


def write_csv(ds: Dataset, path: str | Path) -> int:
    """Write records in the ingest CSV format; returns the record count."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in ds.records:
            writer.writerow(
                [
                    r.record_id,
                    r.plant_id,
                    r.description,
                    r.label(BreakdownLevel.BL0) or "",
                    r.label(BreakdownLevel.BL1) or "",
                    r.label(BreakdownLevel.BL2) or "",
                ]
            )
    return len(ds.records)


# -- splitting & counting ------------------------------------------------

def split_dataset(
    ds: Dataset,
    validation_fraction: float,
    seed: int,
    stratify_level: BreakdownLevel | None = None,
) -> Dataset:
    """Assign TRAIN/VALIDATION tags via a seeded shuffle and tail split.

    Deterministic: the same seed always produces the same split. With
    ``stratify_level`` set, the tail split is applied per class at that
    level instead of globally (off by default).
    """
    if not 0 < validation_fraction < 1:
        raise ValueError(f"validation_fraction must be in (0, 1), got {validation_fraction}")
    n = len(ds.records)
    if n < 2:
        raise TooFewRecords(f"cannot split {n} record(s)")

    rng = np.random.default_rng(seed)

    def tail_split(indices: Sequence[int]) -> set[int]:
        order = list(indices)
        rng.shuffle(order)
        k = int(round(len(order) * validation_fraction))
        k = min(max(k, 1), len(order) - 1) if len(order) > 1 else 0
        return set(order[len(order) - k:])

    if stratify_level is None:
        val_idx = tail_split(range(n))
    else:
        groups: dict[str, list[int]] = {}
        for i, r in enumerate(ds.records):
            groups.setdefault(r.label(stratify_level) or "", []).append(i)
        val_idx = set()
        for label in sorted(groups):
            members = groups[label]
            if len(members) == 1:
                continue  # singletons stay in TRAIN
            val_idx |= tail_split(members)

    split = {
        r.key: (Split.VALIDATION if i in val_idx else Split.TRAIN)
        for i, r in enumerate(ds.records)
    }
    return replace(ds, split=split)


def class_counts(
    ds: Dataset,
    level: BreakdownLevel,
    split: Split = Split.TRAIN,
) -> ClassCounts:
    """Exact label histogram at ``level`` over the given split."""
    counts: dict[ClassCode, int] = {}
    for r in ds.subset(split):
        code = r.label(level)
        if code is not None:
            counts[code] = counts.get(code, 0) + 1
    return ClassCounts(level=level, counts=counts)


def labeled_records(
    records: Iterable[Record], level: BreakdownLevel
) -> list[Record]:
    """Records carrying a label at ``level``."""
    return [r for r in records if r.label(level) is not None]
