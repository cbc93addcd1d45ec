"""Hierarchy-aware text classification with class rollup and KB population.

The package covers the full path from raw device-description exports to a
queryable knowledge base: letter-coded class hierarchies, text cleaning
and token-count features, dynamic class rollup for imbalanced label sets,
Naive Bayes / Random Forest classifiers, macro-F1 threshold sweeps,
triple mapping with subclass-closure queries, and an HTTP review service.
"""

from .corpus import (
    ClassCounts,
    Dataset,
    Record,
    Split,
    class_counts,
    clean_text,
    ingest_csv,
    split_dataset,
    tokenize,
)
from .features import TokenCountVectorizer
from .forest import RandomForest
from .hierarchy import (
    BreakdownLevel,
    Hierarchy,
    ancestors,
    is_descendant_or_self,
    load_hierarchy,
    parent_of,
    parse_code,
)
from .kbmap import (
    MappingContext,
    Triple,
    TripleStore,
    parse_ntriples,
    query_classified_as,
    record_to_triples,
    serialize_ntriples,
)
from .metrics import EvalMode, EvalReport, compare, confusion, report
from .naive_bayes import MultinomialNaiveBayes
from .pipeline import ModelKind, ModelParams, build_features, evaluate_at_v
from .predictions import Prediction, load_external_predictions
from .rollup import (
    DISCARDED,
    ClassRollup,
    LabelMapping,
    RollupAudit,
    RollupConfig,
    RootPolicy,
    apply_mapping,
    compute_rollup,
    mapping_summary,
)
from .sweep import SweepConfig, SweepPoint, run_sweep, select_threshold
from .synth import SynthConfig, generate_synthetic, load_synth_config

__version__ = "0.1.0"

__all__ = [
    "BreakdownLevel",
    "ClassCounts",
    "ClassRollup",
    "DISCARDED",
    "Dataset",
    "EvalMode",
    "EvalReport",
    "Hierarchy",
    "LabelMapping",
    "MappingContext",
    "ModelKind",
    "ModelParams",
    "MultinomialNaiveBayes",
    "Prediction",
    "RandomForest",
    "Record",
    "RollupAudit",
    "RollupConfig",
    "RootPolicy",
    "Split",
    "SweepConfig",
    "SweepPoint",
    "SynthConfig",
    "TokenCountVectorizer",
    "Triple",
    "TripleStore",
    "ancestors",
    "apply_mapping",
    "build_features",
    "class_counts",
    "clean_text",
    "compare",
    "compute_rollup",
    "confusion",
    "evaluate_at_v",
    "generate_synthetic",
    "ingest_csv",
    "is_descendant_or_self",
    "load_external_predictions",
    "load_hierarchy",
    "load_synth_config",
    "mapping_summary",
    "parent_of",
    "parse_code",
    "parse_ntriples",
    "query_classified_as",
    "record_to_triples",
    "report",
    "run_sweep",
    "select_threshold",
    "serialize_ntriples",
    "split_dataset",
    "tokenize",
]
