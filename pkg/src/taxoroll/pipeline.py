"""End-to-end glue: features, rollup, training and evaluation for one run.

The expensive parts (cleaning, tokenization, vocabulary, count matrices)
do not depend on the merge threshold, so they are computed once into a
``FeatureSpace`` and reused across threshold-sweep points and retrains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import scipy.sparse as sp

from .corpus import ClassCounts, Dataset, Record, Split, clean_text, class_counts, tokenize
from .errors import ConfigInvalid
from .features import TokenCountVectorizer
from .forest import RandomForest
from .hierarchy import BreakdownLevel, ClassCode, Hierarchy
from .metrics import EvalMode, EvalReport, confusion, report
from .naive_bayes import MultinomialNaiveBayes
from .predictions import Prediction
from .rollup import DISCARDED, LabelMapping, RollupAudit, RollupConfig, RootPolicy, compute_rollup


class ModelKind(Enum):
    NB = "nb"
    RF = "rf"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ModelParams:
    """Hyperparameters and execution knobs for the in-repo models."""

    nb_alpha: float = 0.01
    rf_trees: int = 600
    rf_max_depth: int | None = None
    rf_min_leaf: int = 1
    rf_vocab_cap: int | None = 5000
    min_support: int = 10
    root_policy: RootPolicy = RootPolicy.KEEP_IF_MIN_SUPPORT
    seed: int = 0
    threads: int = 1


@dataclass
class FeatureSpace:
    """Split-frozen, threshold-independent feature matrices.

    ``X_*_rf`` use the document-frequency-capped vocabulary (exact greedy
    splits stay tractable); Naive Bayes uses the full vocabulary.
    """

    train_records: tuple[Record, ...]
    val_records: tuple[Record, ...]
    vectorizer: TokenCountVectorizer
    rf_vectorizer: TokenCountVectorizer
    X_train: sp.csr_matrix
    X_val: sp.csr_matrix
    X_train_rf: sp.csr_matrix
    X_val_rf: sp.csr_matrix


def build_features(
    ds: Dataset,
    rf_vocab_cap: int | None = 5000,
    extra_clean_patterns: Sequence[str] = (),
) -> FeatureSpace:
    """Clean, tokenize and vectorize a split dataset once."""
    train_records = ds.train_records()
    val_records = ds.validation_records()
    if not train_records:
        raise ConfigInvalid("dataset has no TRAIN records; split it first")

    def docs(records: Sequence[Record]) -> list[list[str]]:
        return [tokenize(clean_text(r.description, extra_clean_patterns)) for r in records]

    train_docs = docs(train_records)
    val_docs = docs(val_records)

    vectorizer = TokenCountVectorizer().fit(train_docs)
    rf_vectorizer = TokenCountVectorizer(max_features=rf_vocab_cap).fit(train_docs)
    return FeatureSpace(
        train_records=train_records,
        val_records=val_records,
        vectorizer=vectorizer,
        rf_vectorizer=rf_vectorizer,
        X_train=vectorizer.transform(train_docs),
        X_val=vectorizer.transform(val_docs),
        X_train_rf=rf_vectorizer.transform(train_docs),
        X_val_rf=rf_vectorizer.transform(val_docs),
    )


@dataclass
class EvalOutcome:
    """Everything one (level, model, v) evaluation produces."""

    level: BreakdownLevel
    model_kind: ModelKind
    model_id: str
    v: int
    mapping: LabelMapping
    audit: RollupAudit
    report: EvalReport
    predictions: list[Prediction]
    n_excluded_validation: int
    n_retained_classes: int
    model: object | None = None
    missing_external: list[str] = field(default_factory=list)


def _mapped_labels(
    records: Sequence[Record],
    level: BreakdownLevel,
    mapping: LabelMapping,
) -> tuple[list[int], list[ClassCode], int]:
    """Row indices and mapped labels of usable records, plus excluded count."""
    rows: list[int] = []
    labels: list[ClassCode] = []
    excluded = 0
    for i, record in enumerate(records):
        code = record.label(level)
        if code is None:
            continue
        target = mapping.target_for(code)
        if target is None or target == DISCARDED:
            excluded += 1
            continue
        rows.append(i)
        labels.append(target)
    return rows, labels, excluded


def evaluate_at_v(
    features: FeatureSpace,
    hierarchy: Hierarchy,
    level: BreakdownLevel,
    model_kind: ModelKind,
    v: int,
    params: ModelParams = ModelParams(),
    external: Mapping[str, Prediction] | None = None,
    mode: EvalMode | None = None,
) -> EvalOutcome:
    """Roll up at threshold ``v``, train, and evaluate on validation.

    ``mode`` defaults to FLAT for v == 0 and DYNAMIC otherwise. For
    EXTERNAL models, predictions are looked up by record key and their
    codes pass through the same label mapping as the ground truth.
    """
    counts = ClassCounts(
        level=level,
        counts=_train_counts(features.train_records, level),
    )
    cfg = RollupConfig(v=v, min_support=params.min_support, root_policy=params.root_policy)
    mapping, audit = compute_rollup(counts, hierarchy, cfg)

    train_rows, y_train, _ = _mapped_labels(features.train_records, level, mapping)
    val_rows, y_val, n_excluded = _mapped_labels(features.val_records, level, mapping)
    if not train_rows:
        raise ConfigInvalid(f"no trainable records at {level} with v={v}")
    if not val_rows:
        raise ConfigInvalid(f"no evaluable validation records at {level} with v={v}")
    val_keys = [features.val_records[i].key for i in val_rows]

    missing_external: list[str] = []
    if model_kind is ModelKind.NB:
        model = MultinomialNaiveBayes(alpha=params.nb_alpha)
        model.fit(features.X_train[train_rows], y_train)
        codes, conf = model.predict_with_confidence(features.X_val[val_rows])
        model_id = "nb"
    elif model_kind is ModelKind.RF:
        model = RandomForest(
            n_trees=params.rf_trees,
            seed=params.seed,
            max_depth=params.rf_max_depth,
            min_leaf=params.rf_min_leaf,
            n_jobs=params.threads,
        )
        model.fit(features.X_train_rf[train_rows], y_train)
        codes, conf = model.predict_with_confidence(features.X_val_rf[val_rows])
        model_id = "rf"
    elif model_kind is ModelKind.EXTERNAL:
        if external is None:
            raise ConfigInvalid("EXTERNAL model kind requires a predictions mapping")
        model = None
        codes = []
        conf = []
        kept_rows = []
        kept_labels = []
        for row, key, true_code in zip(val_rows, val_keys, y_val):
            pred = external.get(key)
            if pred is None:
                missing_external.append(key)
                continue
            mapped = mapping.target_for(pred.predicted)
            predicted = (
                pred.predicted if mapped is None or mapped == DISCARDED else mapped
            )
            codes.append(predicted)
            conf.append(pred.confidence)
            kept_rows.append(row)
            kept_labels.append(true_code)
        model_id = next(iter(external.values())).model_id if external else "external"
        val_rows, y_val = kept_rows, kept_labels
        val_keys = [features.val_records[i].key for i in val_rows]
    else:  # pragma: no cover - exhaustive enum
        raise ConfigInvalid(f"unknown model kind {model_kind}")

    if mode is None:
        mode = EvalMode.FLAT if v == 0 else EvalMode.DYNAMIC
    cm = confusion(y_val, list(codes), n_excluded=n_excluded)
    rep = report(cm, level=level, model_id=model_id, mode=mode)
    predictions = [
        Prediction(record_key=key, predicted=code, confidence=float(c), model_id=model_id)
        for key, code, c in zip(val_keys, codes, conf)
    ]
    return EvalOutcome(
        level=level,
        model_kind=model_kind,
        model_id=model_id,
        v=v,
        mapping=mapping,
        audit=audit,
        report=rep,
        predictions=predictions,
        n_excluded_validation=n_excluded,
        n_retained_classes=len(mapping.retained.counts),
        model=model,
        missing_external=missing_external,
    )


def _train_counts(records: Sequence[Record], level: BreakdownLevel) -> dict[ClassCode, int]:
    counts: dict[ClassCode, int] = {}
    for r in records:
        code = r.label(level)
        if code is not None:
            counts[code] = counts.get(code, 0) + 1
    return counts


def dataset_counts(ds: Dataset, level: BreakdownLevel) -> ClassCounts:
    """TRAIN-split class counts (the rollup's input histogram)."""
    return class_counts(ds, level, Split.TRAIN)
