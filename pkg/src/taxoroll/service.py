"""HTTP JSON facade for the domain-expert correction loop.

Serves low-confidence predictions for triage, accepts label corrections
(durable JSON-lines log, newest wins per record/level), retrains on
demand with corrections folded into the training labels, and exposes
reports and sweeps. Snapshots are immutable and replaced atomically; every
response carries the snapshot version it was served from.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .corpus import Dataset, Record
from .errors import Busy, InvalidCode, NoModel, TaxorollError, UnknownClass, UnknownRecord
from .hierarchy import BreakdownLevel, Hierarchy, parse_code
from .metrics import EvalReport
from .pipeline import FeatureSpace, ModelKind, ModelParams, build_features, evaluate_at_v
from .predictions import Prediction
from .sweep import DEFAULT_GRID, SweepConfig, SweepPoint, run_sweep, select_threshold


@dataclass(frozen=True)
class ServiceConfig:
    levels: tuple[BreakdownLevel, ...]
    models: tuple[ModelKind, ...] = (ModelKind.NB,)
    v: int = 0
    seed: int = 42
    validation_fraction: float = 0.2
    min_support: int = 10
    nb_alpha: float = 0.01
    rf_trees: int = 100
    threads: int = 1
    sweep: bool = False
    sweep_t: float = 0.7
    state_dir: Path | None = None
    ui_dir: Path | None = None

    def model_params(self) -> ModelParams:
        return ModelParams(
            nb_alpha=self.nb_alpha,
            rf_trees=self.rf_trees,
            min_support=self.min_support,
            seed=self.seed,
            threads=self.threads,
        )


@dataclass(frozen=True)
class Snapshot:
    """One (level, model) artifact set, replaced wholesale on retrain."""

    version: int
    level: BreakdownLevel
    model_kind: ModelKind
    v: int
    report_flat: EvalReport
    report_dynamic: EvalReport
    predictions: tuple[Prediction, ...]  # ascending (confidence, record_key)
    retained_codes: tuple[str, ...]
    sweep_points: tuple[SweepPoint, ...] = ()


@dataclass(frozen=True)
class Correction:
    sequence: int
    record_key: str
    level: BreakdownLevel
    corrected_code: str
    annotator: str
    timestamp: int

    def to_json_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "record_key": self.record_key,
            "level": self.level.value,
            "corrected_code": self.corrected_code,
            "annotator": self.annotator,
            "timestamp": self.timestamp,
        }


class CorrectionLog:
    """Append-only corrections log, optionally durable as JSON lines."""

    def __init__(self, path: Path | None = None):
        self._path = path
        self._entries: list[Correction] = []
        self._lock = threading.Lock()
        if path is not None and path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                raw = json.loads(line)
                self._entries.append(
                    Correction(
                        sequence=raw["sequence"],
                        record_key=raw["record_key"],
                        level=BreakdownLevel(raw["level"]),
                        corrected_code=raw["corrected_code"],
                        annotator=raw["annotator"],
                        timestamp=raw["timestamp"],
                    )
                )

    def append(self, record_key: str, level: BreakdownLevel, code: str, annotator: str) -> Correction:
        with self._lock:
            correction = Correction(
                sequence=len(self._entries) + 1,
                record_key=record_key,
                level=level,
                corrected_code=code,
                annotator=annotator,
                timestamp=int(time.time()),
            )
            self._entries.append(correction)
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(correction.to_json_dict(), sort_keys=True) + "\n")
                    fh.flush()
            return correction

    def all(self) -> list[Correction]:
        with self._lock:
            return list(self._entries)

    def active(self) -> dict[tuple[str, BreakdownLevel], Correction]:
        """Newest correction per (record, level)."""
        result: dict[tuple[str, BreakdownLevel], Correction] = {}
        for c in self.all():
            result[(c.record_key, c.level)] = c
        return result

    def for_record(self, record_key: str) -> list[Correction]:
        return [c for c in self.all() if c.record_key == record_key]


class AppState:
    def __init__(
        self,
        dataset: Dataset,
        hierarchies: dict[BreakdownLevel, Hierarchy],
        config: ServiceConfig,
    ):
        self.config = config
        self.hierarchies = hierarchies
        self.base_dataset = dataset
        self.records_by_key = {r.key: r for r in dataset.records}
        self.features = build_features(dataset)
        log_path = None
        if config.state_dir is not None:
            config.state_dir.mkdir(parents=True, exist_ok=True)
            log_path = config.state_dir / "corrections.jsonl"
        self.corrections = CorrectionLog(log_path)
        self.retrain_lock = threading.Lock()
        self._version = 0
        self._snapshots: dict[tuple[BreakdownLevel, ModelKind], Snapshot] = {}
        for level in config.levels:
            for model in config.models:
                self._install(level, model, config.v)

    # -- snapshot machinery -------------------------------------------------

    def snapshot(self, level: BreakdownLevel, model: ModelKind) -> Snapshot:
        snap = self._snapshots.get((level, model))
        if snap is None:
            raise NoModel(f"no snapshot for level={level.value} model={model.value}")
        return snap

    def _corrected_features(self) -> FeatureSpace:
        """Feature space with active corrections overriding labels.

        Corrections change labels only, never text, so the fitted
        vocabulary and count matrices are reused as-is.
        """
        active = self.corrections.active()
        if not active:
            return self.features

        def fix(records: tuple[Record, ...]) -> tuple[Record, ...]:
            out = []
            for r in records:
                overrides = {
                    level: c.corrected_code
                    for (key, level), c in active.items()
                    if key == r.key
                }
                if overrides:
                    labels = dict(r.labels)
                    labels.update(overrides)
                    r = replace(r, labels=labels)
                out.append(r)
            return tuple(out)

        return replace(
            self.features,
            train_records=fix(self.features.train_records),
            val_records=fix(self.features.val_records),
        )

    def _build_snapshot(self, level: BreakdownLevel, model: ModelKind, v: int) -> Snapshot:
        features = self._corrected_features()
        hierarchy = self.hierarchies[level]
        params = self.config.model_params()
        sweep_points: tuple[SweepPoint, ...] = ()
        if self.config.sweep:
            cfg = SweepConfig(
                level=level, model_kind=model, grid=DEFAULT_GRID,
                t=self.config.sweep_t, seed=self.config.seed,
            )
            sweep_points = tuple(
                run_sweep(self.base_dataset, hierarchy, cfg, params=params, features=features)
            )
            if v == 0:
                v = select_threshold(sweep_points, self.config.sweep_t) or 0

        flat = evaluate_at_v(features, hierarchy, level, model, 0, params=params)
        if v > 0:
            dynamic = evaluate_at_v(features, hierarchy, level, model, v, params=params)
        else:
            dynamic = flat
        predictions = tuple(
            sorted(dynamic.predictions, key=lambda p: (p.confidence, p.record_key))
        )
        self._version += 1
        return Snapshot(
            version=self._version,
            level=level,
            model_kind=model,
            v=v,
            report_flat=flat.report,
            report_dynamic=dynamic.report,
            predictions=predictions,
            retained_codes=tuple(sorted(dynamic.mapping.retained.counts)),
            sweep_points=sweep_points,
        )

    def _install(self, level: BreakdownLevel, model: ModelKind, v: int) -> Snapshot:
        snap = self._build_snapshot(level, model, v)
        self._snapshots[(level, model)] = snap  # atomic reference swap
        return snap

    def retrain(self, level: BreakdownLevel, model: ModelKind, v: int | None) -> dict:
        if not self.retrain_lock.acquire(blocking=False):
            raise Busy("a retrain is already in progress")
        try:
            before = self.snapshot(level, model)
            target_v = before.v if v is None else v
            after = self._install(level, model, target_v)
            return {
                "level": level.value,
                "model": model.value,
                "v": after.v,
                "before_macro_f1": before.report_dynamic.macro_f1,
                "after_macro_f1": after.report_dynamic.macro_f1,
                "snapshot_version": after.version,
                "n_corrections": len(self.corrections.active()),
            }
        finally:
            self.retrain_lock.release()



# -- request bodies ---------------------------------------------------------

class CorrectionIn(BaseModel):
    record_key: str
    level: Literal["BL0", "BL1", "BL2"]
    corrected_code: str
    annotator: str = "expert"


class RetrainIn(BaseModel):
    level: Literal["BL0", "BL1", "BL2"]
    model: Literal["nb", "rf"]
    v: int | None = Field(default=None, ge=0)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _report_json(report: EvalReport, version: int) -> dict:
    data = report.to_json_dict()
    data["snapshot_version"] = version
    return data


def build_app(
    dataset: Dataset,
    hierarchies: dict[BreakdownLevel, Hierarchy],
    config: ServiceConfig,
) -> FastAPI:
    """Assemble the FastAPI app around a freshly built pipeline state."""
    from .corpus import split_dataset

    if not dataset.split:
        dataset = split_dataset(dataset, config.validation_fraction, config.seed)
    state = AppState(dataset, hierarchies, config)
    app = FastAPI(title="taxoroll review service", version=__version__)
    app.state.pipeline = state

    @app.exception_handler(TaxorollError)
    async def _taxoroll_error(request: Request, exc: TaxorollError):
        if isinstance(exc, Busy):
            return _error(409, "busy", str(exc))
        if isinstance(exc, (UnknownRecord, NoModel, UnknownClass)):
            return _error(404, type(exc).__name__.lower(), str(exc))
        return _error(400, type(exc).__name__.lower(), str(exc))

    def _parse_level(value: str) -> BreakdownLevel:
        try:
            return BreakdownLevel(value.upper())
        except ValueError:
            raise InvalidCode(f"unknown breakdown level {value!r}") from None

    def _parse_model(value: str) -> ModelKind:
        try:
            return ModelKind(value.lower())
        except ValueError:
            raise NoModel(f"unknown model {value!r}") from None

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/api/hierarchy")
    def hierarchy(level: str):
        lv = _parse_level(level)
        h = hierarchies.get(lv)
        if h is None:
            raise NoModel(f"no hierarchy for level {lv.value}")
        return {
            "level": lv.value,
            "codes": [
                {
                    "code": code,
                    "label": h.label_for(code),
                    "parent": code[:-1] if len(code) > 1 else None,
                    "depth": len(code),
                }
                for code in h.codes
            ],
        }

    @app.get("/api/report")
    def report(level: str, model: str, mode: str = "dynamic"):
        snap = state.snapshot(_parse_level(level), _parse_model(model))
        if mode.lower() == "flat":
            return _report_json(snap.report_flat, snap.version)
        if mode.lower() == "dynamic":
            return _report_json(snap.report_dynamic, snap.version)
        raise InvalidCode(f"mode must be flat or dynamic, got {mode!r}")

    @app.get("/api/sweep")
    def sweep(level: str, model: str):
        snap = state.snapshot(_parse_level(level), _parse_model(model))
        if not snap.sweep_points:
            raise NoModel("no sweep was computed for this snapshot")
        return {
            "snapshot_version": snap.version,
            "points": [
                {
                    "v": p.v,
                    "macro_f1": p.macro_f1,
                    "n_retained_classes": p.n_retained_classes,
                    "n_excluded_validation": p.n_excluded_validation,
                }
                for p in snap.sweep_points
            ],
        }

    @app.get("/api/predictions")
    def predictions(
        level: str,
        model: str,
        max_confidence: float = Query(default=1.0, ge=0.0, le=1.0),
        limit: int = Query(default=50, ge=1, le=500),
        offset: int = Query(default=0, ge=0),
    ):
        lv = _parse_level(level)
        snap = state.snapshot(lv, _parse_model(model))
        active = state.corrections.active()
        matching = [p for p in snap.predictions if p.confidence <= max_confidence]
        page = matching[offset : offset + limit]
        h = hierarchies[lv]
        items = []
        for p in page:
            record = state.records_by_key.get(p.record_key)
            correction = active.get((p.record_key, lv))
            items.append(
                {
                    "record_key": p.record_key,
                    "description": record.description if record else "",
                    "predicted_code": p.predicted,
                    "predicted_label": h.label_for(p.predicted),
                    "path": h.path(p.predicted) if p.predicted in h else [p.predicted],
                    "confidence": p.confidence,
                    "model_id": p.model_id,
                    "active_correction": correction.to_json_dict() if correction else None,
                }
            )
        return {
            "snapshot_version": snap.version,
            "total": len(matching),
            "limit": limit,
            "offset": offset,
            "items": items,
        }

    @app.post("/api/corrections", status_code=201)
    def submit_correction(body: CorrectionIn):
        lv = BreakdownLevel(body.level)
        if body.record_key not in state.records_by_key:
            raise UnknownRecord(f"unknown record key {body.record_key!r}")
        code = parse_code(body.corrected_code)
        h = hierarchies.get(lv)
        if h is None or code not in h:
            raise InvalidCode(f"code {code!r} not in {lv.value} hierarchy")
        correction = state.corrections.append(body.record_key, lv, code, body.annotator)
        return correction.to_json_dict()

    @app.get("/api/corrections")
    def list_corrections(record: str | None = None):
        if record is not None:
            entries = state.corrections.for_record(record)
        else:
            entries = state.corrections.all()
        active = {c.sequence for c in state.corrections.active().values()}
        return {
            "corrections": [
                {**c.to_json_dict(), "active": c.sequence in active} for c in entries
            ]
        }

    @app.post("/api/retrain")
    def retrain(body: RetrainIn):
        return state.retrain(BreakdownLevel(body.level), ModelKind(body.model), body.v)

    if config.ui_dir is not None:
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
