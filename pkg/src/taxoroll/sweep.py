"""Macro-F1 evolution across merge thresholds and threshold selection.

One train/validation split is frozen and reused for every grid point so
that the threshold is the only thing varying. The selected threshold is
the smallest grid value whose macro-F1 reaches the target and stays
within epsilon of it for the rest of the grid ("stabilizes above t").
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Dataset
from .errors import ConfigInvalid
from .hierarchy import BreakdownLevel, Hierarchy
from .metrics import EvalMode
from .pipeline import FeatureSpace, ModelKind, ModelParams, build_features, evaluate_at_v
from .predictions import Prediction

DEFAULT_GRID = tuple(range(0, 201, 10))


@dataclass(frozen=True)
class SweepConfig:
    level: BreakdownLevel
    model_kind: ModelKind
    grid: tuple[int, ...] = DEFAULT_GRID
    t: float = 0.8
    epsilon: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.grid:
            raise ConfigInvalid("sweep grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigInvalid(f"sweep grid must be strictly increasing, got {self.grid}")
        if not 0 < self.t <= 1:
            raise ConfigInvalid(f"target t must be in (0, 1], got {self.t}")
        if self.epsilon < 0:
            raise ConfigInvalid(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class SweepPoint:
    v: int
    macro_f1: float
    n_retained_classes: int
    n_excluded_validation: int


def run_sweep(
    ds: Dataset,
    hierarchy: Hierarchy,
    cfg: SweepConfig,
    params: ModelParams | None = None,
    features: FeatureSpace | None = None,
    external: Mapping[str, Prediction] | None = None,
) -> list[SweepPoint]:
    """Evaluate macro-F1 at every grid threshold over one frozen split.

    The dataset must already carry its split. Deterministic for a fixed
    seed. Retained-class counts are checked to be non-increasing along the
    grid; a violation (possible only when the grid dips below
    ``min_support``, where discarded siblings can pool into a fresh
    parent) raises a warning rather than failing the sweep.
    """
    params = params or ModelParams(seed=cfg.seed)
    if features is None:
        features = build_features(ds, rf_vocab_cap=params.rf_vocab_cap)

    points: list[SweepPoint] = []
    for v in cfg.grid:
        outcome = evaluate_at_v(
            features,
            hierarchy,
            cfg.level,
            cfg.model_kind,
            v,
            params=params,
            external=external,
            mode=EvalMode.DYNAMIC if v > 0 else EvalMode.FLAT,
        )
        points.append(
            SweepPoint(
                v=v,
                macro_f1=outcome.report.macro_f1,
                n_retained_classes=outcome.n_retained_classes,
                n_excluded_validation=outcome.n_excluded_validation,
            )
        )

    for a, b in zip(points, points[1:]):
        if b.n_retained_classes > a.n_retained_classes:
            warnings.warn(
                f"retained classes increased from v={a.v} ({a.n_retained_classes}) "
                f"to v={b.v} ({b.n_retained_classes}); sub-min_support thresholds "
                "can pool discarded siblings into a new parent class",
                stacklevel=2,
            )
    return points


def select_threshold(
    points: Sequence[SweepPoint], t: float, epsilon: float = 0.01
) -> int | None:
    """Smallest v reaching macro-F1 >= t with every later point >= t - epsilon."""
    ordered = sorted(points, key=lambda p: p.v)
    for i, point in enumerate(ordered):
        if point.macro_f1 >= t and all(q.macro_f1 >= t - epsilon for q in ordered[i + 1:]):
            return point.v
    return None


def argmax_point(points: Sequence[SweepPoint]) -> SweepPoint:
    """The grid point with the highest macro-F1 (first on ties)."""
    return max(points, key=lambda p: (p.macro_f1, -p.v))


def write_sweep_csv(points: Sequence[SweepPoint], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["v", "macro_f1", "n_retained_classes", "n_excluded_validation"])
        for p in sorted(points, key=lambda q: q.v):
            writer.writerow([p.v, f"{p.macro_f1:.6f}", p.n_retained_classes, p.n_excluded_validation])


def write_sweep_svg(points: Sequence[SweepPoint], path: str | Path, title: str = "") -> None:
    """Emit a dependency-free SVG line chart of macro-F1 against v."""
    pts = sorted(points, key=lambda p: p.v)
    width, height = 640, 400
    ml, mr, mt, mb = 60, 20, 30, 45
    plot_w, plot_h = width - ml - mr, height - mt - mb
    v_min, v_max = pts[0].v, pts[-1].v
    v_span = max(v_max - v_min, 1)

    def x(v: float) -> float:
        return ml + (v - v_min) / v_span * plot_w

    def y(f1: float) -> float:
        return mt + (1.0 - f1) * plot_h

    poly = " ".join(f"{x(p.v):.1f},{y(p.macro_f1):.1f}" for p in pts)
    grid_lines = []
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        gy = mt + (1.0 - frac) * plot_h
        grid_lines.append(
            f'<line x1="{ml}" y1="{gy:.1f}" x2="{width - mr}" y2="{gy:.1f}" '
            f'stroke="#ddd" stroke-width="1"/>'
            f'<text x="{ml - 8}" y="{gy + 4:.1f}" text-anchor="end" font-size="11">{frac:.2f}</text>'
        )
    ticks = []
    for p in pts:
        ticks.append(
            f'<text x="{x(p.v):.1f}" y="{height - mb + 16}" text-anchor="middle" '
            f'font-size="10">{p.v}</text>'
        )
    markers = "".join(
        f'<circle cx="{x(p.v):.1f}" cy="{y(p.macro_f1):.1f}" r="3" fill="#1f77b4"/>' for p in pts
    )
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-size="13">{title}</text>\n'
        + "".join(grid_lines)
        + f'\n<polyline points="{poly}" fill="none" stroke="#1f77b4" stroke-width="2"/>\n'
        + markers
        + "".join(ticks)
        + f'\n<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" '
        f'font-size="12">threshold v</text>\n'
        f'<text x="16" y="{height / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {height / 2:.0f})">macro F1</text>\n'
        "</svg>\n"
    )
    Path(path).write_text(svg, encoding="utf-8")
