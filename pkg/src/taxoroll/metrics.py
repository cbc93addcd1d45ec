"""Per-class and aggregate evaluation reports (weighted/macro P-R-F1)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyMatrix, MismatchedReports, ShapeMismatch
from .hierarchy import BreakdownLevel, ClassCode


class EvalMode(Enum):
    FLAT = "flat"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Exact tallies of true class (rows) vs predicted class (columns)."""

    classes: tuple[ClassCode, ...]
    matrix: np.ndarray
    n_excluded: int = 0

    def total(self) -> int:
        return int(self.matrix.sum())


def confusion(
    y_true: Sequence[ClassCode],
    y_pred: Sequence[ClassCode],
    n_excluded: int = 0,
) -> ConfusionMatrix:
    """Build a confusion matrix over the union of both class sets."""
    if len(y_true) != len(y_pred):
        raise ShapeMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    classes = tuple(sorted(set(y_true) | set(y_pred)))
    index = {c: i for i, c in enumerate(classes)}
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        matrix[index[t], index[p]] += 1
    return ConfusionMatrix(classes=classes, matrix=matrix, n_excluded=n_excluded)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    """Classification report in the weighted/macro layout.

    Zero-division convention: precision (recall) is 0 when a class has no
    predicted (true) instances; F1 is 0 when P + R = 0. Macro averages run
    over the classes present in the evaluated set, unweighted.
    """

    level: BreakdownLevel | None
    model_id: str
    mode: EvalMode
    per_class: Mapping[ClassCode, ClassMetrics]
    macro: tuple[float, float, float]
    weighted: tuple[float, float, float]
    accuracy: float
    n_evaluated: int
    n_excluded: int

    @property
    def macro_f1(self) -> float:
        return self.macro[2]

    def to_json_dict(self) -> dict:
        return {
            "level": self.level.value if self.level else None,
            "model_id": self.model_id,
            "mode": self.mode.value,
            "per_class": {
                c: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for c, m in sorted(self.per_class.items())
            },
            "macro": {"precision": self.macro[0], "recall": self.macro[1], "f1": self.macro[2]},
            "weighted": {
                "precision": self.weighted[0],
                "recall": self.weighted[1],
                "f1": self.weighted[2],
            },
            "accuracy": self.accuracy,
            "n_evaluated": self.n_evaluated,
            "n_excluded": self.n_excluded,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def report(
    cm: ConfusionMatrix,
    level: BreakdownLevel | None = None,
    model_id: str = "",
    mode: EvalMode = EvalMode.FLAT,
) -> EvalReport:
    """Compute per-class and aggregate metrics from a confusion matrix."""
    total = cm.total()
    if total == 0:
        raise EmptyMatrix("confusion matrix has no entries")

    matrix = cm.matrix
    tp = np.diag(matrix).astype(float)
    pred_totals = matrix.sum(axis=0).astype(float)
    true_totals = matrix.sum(axis=1).astype(float)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(true_totals > 0, tp / true_totals, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)

    per_class = {
        c: ClassMetrics(
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
            support=int(true_totals[i]),
        )
        for i, c in enumerate(cm.classes)
    }
    macro = (float(precision.mean()), float(recall.mean()), float(f1.mean()))
    weights = true_totals / total
    weighted = (
        float((precision * weights).sum()),
        float((recall * weights).sum()),
        float((f1 * weights).sum()),
    )
    accuracy = float(tp.sum() / total)
    return EvalReport(
        level=level,
        model_id=model_id,
        mode=mode,
        per_class=per_class,
        macro=macro,
        weighted=weighted,
        accuracy=accuracy,
        n_evaluated=total,
        n_excluded=cm.n_excluded,
    )


@dataclass(frozen=True)
class ReportComparison:
    """Side-by-side flat vs dynamic metric deltas."""

    level: BreakdownLevel | None
    model_id: str
    flat: EvalReport
    dynamic: EvalReport

    @property
    def macro_f1_delta(self) -> float:
        return self.dynamic.macro_f1 - self.flat.macro_f1

    @property
    def macro_f1_relative_improvement(self) -> float:
        """(dynamic - flat) / flat; infinity when flat macro-F1 is zero."""
        if self.flat.macro_f1 == 0:
            return float("inf") if self.dynamic.macro_f1 > 0 else 0.0
        return self.macro_f1_delta / self.flat.macro_f1


def compare(flat: EvalReport, dynamic: EvalReport) -> ReportComparison:
    """Pair a flat and a dynamic report for the same level and model."""
    if flat.level != dynamic.level or flat.model_id != dynamic.model_id:
        raise MismatchedReports(
            f"cannot compare ({flat.level}, {flat.model_id!r}) "
            f"with ({dynamic.level}, {dynamic.model_id!r})"
        )
    return ReportComparison(level=flat.level, model_id=flat.model_id, flat=flat, dynamic=dynamic)


def render_report_table(reports: Sequence[EvalReport]) -> str:
    """Aligned text table: Weighted/Macro rows, P/R/F1 columns, one
    Flat/Dynamic sub-row per report, plus accuracy lines."""
    if not reports:
        return ""
    header = f"{'':<10}{'':<9}{'P':>7}{'R':>7}{'F1':>7}"
    lines = [header]
    for group, picker in (("Weighted", lambda r: r.weighted), ("Macro", lambda r: r.macro)):
        for i, rep in enumerate(reports):
            name = group if i == 0 else ""
            p, r, f1 = picker(rep)
            mode = rep.mode.value.capitalize()
            lines.append(f"{name:<10}{mode:<9}{p:>7.2f}{r:>7.2f}{f1:>7.2f}")
    for rep in reports:
        lines.append(f"Accuracy  {rep.mode.value.capitalize():<9}{rep.accuracy:>7.2f}")
    return "\n".join(lines)


def render_comparison(cmp: ReportComparison) -> str:
    table = render_report_table([cmp.flat, cmp.dynamic])
    rel = cmp.macro_f1_relative_improvement
    rel_text = "inf" if rel == float("inf") else f"{rel * 100:+.1f}%"
    return (
        f"{table}\n"
        f"Macro-F1 delta (dynamic - flat): {cmp.macro_f1_delta:+.4f} ({rel_text} relative)"
    )
