"""Command-line driver for the full pipeline.

Subcommands mirror the pipeline stages: ``generate``, ``ingest``,
``rollup``, ``train``, ``eval``, ``sweep``, ``classify``, ``map``,
``query``, ``serve`` and ``report``. Every run with identical flags and
seed writes byte-identical artifacts. Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import artifacts
from .corpus import Dataset, Split, clean_text, class_counts, ingest_csv, split_dataset, tokenize, write_csv, write_rejects
from .errors import DataError, TaxorollError
from .features import TokenCountVectorizer
from .forest import RandomForest
from .hierarchy import BreakdownLevel, Hierarchy, load_hierarchy, parse_code
from .kbmap import (
    load_mapping_context,
    map_records,
    parse_ntriples,
    query_classified_as,
    serialize_ntriples,
)
from .metrics import EvalMode, compare, render_comparison, render_report_table
from .naive_bayes import MultinomialNaiveBayes
from .pipeline import ModelKind, ModelParams, build_features, evaluate_at_v
from .predictions import Prediction, load_external_predictions, write_predictions_csv
from .rollup import (
    RollupConfig,
    RootPolicy,
    compute_rollup,
    export_audit_csv,
    export_mapping_csv,
    mapping_summary,
)
from .sweep import SweepConfig, argmax_point, run_sweep, select_threshold, write_sweep_csv, write_sweep_svg
from .synth import generate_synthetic, load_synth_config

_LEVELS = [lv.value for lv in BreakdownLevel]


def _level(value: str) -> BreakdownLevel:
    return BreakdownLevel(value.upper())


def _parse_hierarchy_specs(specs: tuple[str, ...]) -> dict[BreakdownLevel, Hierarchy]:
    hierarchies = {}
    for spec in specs:
        name, _, path = spec.partition("=")
        if not path:
            raise click.UsageError(f"--hierarchy expects LEVEL=PATH, got {spec!r}")
        try:
            level = _level(name)
        except ValueError:
            raise click.UsageError(f"unknown breakdown level {name!r} in {spec!r}") from None
        hierarchies[level] = load_hierarchy(path, level)
    return hierarchies


def _load_dataset(
    data: str | None,
    synth_config: str | None,
    hierarchy_specs: tuple[str, ...],
) -> tuple[Dataset, dict[BreakdownLevel, Hierarchy]]:
    if (data is None) == (synth_config is None):
        raise click.UsageError("provide exactly one of --data or --synth-config")
    if synth_config is not None:
        cfg = load_synth_config(synth_config)
        return generate_synthetic(cfg), dict(cfg.hierarchies)
    hierarchies = _parse_hierarchy_specs(hierarchy_specs)
    if not hierarchies:
        raise click.UsageError("--data requires at least one --hierarchy LEVEL=PATH")
    return ingest_csv(data, hierarchies), hierarchies


def _require_hierarchy(
    hierarchies: dict[BreakdownLevel, Hierarchy], level: BreakdownLevel
) -> Hierarchy:
    if level not in hierarchies:
        raise click.UsageError(f"no hierarchy provided for {level.value}")
    return hierarchies[level]


def _parse_grid(text: str) -> tuple[int, ...]:
    """Grid syntax: comma list ("0,50,100") or start:end:step ("0:200:10")."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise click.UsageError(f"grid must be start:end:step, got {text!r}")
        try:
            start, end, step = (int(p) for p in parts)
        except ValueError:
            raise click.UsageError(f"grid bounds must be integers: {text!r}") from None
        if step <= 0 or end < start:
            raise click.UsageError(f"invalid grid range {text!r}")
        return tuple(range(start, end + 1, step))
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise click.UsageError(f"grid must be integers: {text!r}") from None


def _model_params(ctx: click.Context, **overrides) -> ModelParams:
    defaults = dict(threads=ctx.obj.get("threads", 1))
    defaults.update(overrides)
    return ModelParams(**defaults)


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


data_option = click.option("--data", type=click.Path(exists=True, dir_okay=False), help="Record CSV.")
synth_option = click.option(
    "--synth-config", type=click.Path(exists=True, dir_okay=False), help="Synthetic corpus JSON config."
)
hierarchy_option = click.option(
    "--hierarchy", "hierarchy_specs", multiple=True, metavar="LEVEL=PATH",
    help="Hierarchy file for a breakdown level (repeatable).",
)
level_option = click.option(
    "--level", required=True, type=click.Choice(_LEVELS, case_sensitive=False), callback=lambda c, p, v: _level(v)
)
seed_option = click.option("--seed", default=42, show_default=True, help="Split / model seed.")
fraction_option = click.option(
    "--validation-fraction", default=0.20, show_default=True,
    type=click.FloatRange(0, 1, min_open=True, max_open=True),
)
rollup_options = [
    click.option("--v", "v", default=0, show_default=True, type=click.IntRange(min=0), help="Merge threshold."),
    click.option("--min-support", default=10, show_default=True, type=click.IntRange(min=1)),
    click.option(
        "--root-policy", default="KEEP_IF_MIN_SUPPORT", show_default=True,
        type=click.Choice([p.value for p in RootPolicy], case_sensitive=False),
        callback=lambda c, p, v: RootPolicy(v.upper()),
    ),
]
model_options = [
    click.option("--model", default="nb", show_default=True,
                 type=click.Choice(["nb", "rf", "external"], case_sensitive=False),
                 callback=lambda c, p, v: ModelKind(v.lower())),
    click.option("--alpha", default=0.01, show_default=True, help="Naive Bayes smoothing."),
    click.option("--rf-trees", default=600, show_default=True, type=click.IntRange(min=0)),
    click.option("--rf-max-depth", default=None, type=click.IntRange(min=1)),
    click.option("--rf-min-leaf", default=1, show_default=True, type=click.IntRange(min=1)),
    click.option("--rf-vocab-cap", default=5000, show_default=True, type=click.IntRange(min=1)),
    click.option("--external-predictions", type=click.Path(exists=True, dir_okay=False),
                 help="Predictions CSV for --model external."),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
@click.option("--threads", default=1, show_default=True, type=click.IntRange(min=1),
              help="Worker threads for tree building.")
@click.version_option(package_name="taxoroll")
@click.pass_context
def cli(ctx, threads):
    """Hierarchy-aware classification, threshold sweeps and KB population."""
    ctx.obj = {"threads": threads}


# -- generate --------------------------------------------------------------

@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
def generate(config_path, out):
    """Generate a synthetic labeled corpus from a JSON config."""
    out_dir = _out_dir(out)
    cfg = load_synth_config(config_path)
    ds = generate_synthetic(cfg)
    corpus_path = out_dir / "corpus.csv"
    n = write_csv(ds, corpus_path)
    artifacts.write_manifest(
        out_dir, "generate",
        {"config_path": str(config_path), "n_records": n},
        {"corpus": corpus_path.name},
    )
    click.echo(f"wrote {n} records to {corpus_path}")


# -- ingest ----------------------------------------------------------------

@cli.command()
@data_option
@hierarchy_option
@click.option("--out", required=True, type=click.Path(file_okay=False))
def ingest(data, hierarchy_specs, out):
    """Validate a record CSV against hierarchies; report rejects."""
    if data is None:
        raise click.UsageError("--data is required")
    out_dir = _out_dir(out)
    hierarchies = _parse_hierarchy_specs(hierarchy_specs)
    if not hierarchies:
        raise click.UsageError("provide at least one --hierarchy LEVEL=PATH")
    ds = ingest_csv(data, hierarchies)
    dataset_path = out_dir / "dataset.csv"
    rejects_path = out_dir / "rejects.csv"
    write_csv(ds, dataset_path)
    n_rejects = write_rejects(ds, rejects_path)
    summary = {
        "n_records": len(ds),
        "n_rejects": n_rejects,
        "labeled": {
            lv.value: sum(1 for r in ds.records if r.label(lv)) for lv in hierarchies
        },
    }
    summary_path = out_dir / "ingest_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    artifacts.write_manifest(
        out_dir, "ingest", {"data": str(data)},
        {"dataset": dataset_path.name, "rejects": rejects_path.name, "summary": summary_path.name},
    )
    click.echo(f"{len(ds)} records ingested, {n_rejects} rejected")


# -- rollup ----------------------------------------------------------------

@cli.command()
@data_option
@synth_option
@hierarchy_option
@level_option
@seed_option
@fraction_option
@_add_options(rollup_options)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def rollup(data, synth_config, hierarchy_specs, level, seed, validation_fraction,
           v, min_support, root_policy, out):
    """Compute the class rollup mapping from TRAIN counts."""
    out_dir = _out_dir(out)
    ds, hierarchies = _load_dataset(data, synth_config, hierarchy_specs)
    hierarchy = _require_hierarchy(hierarchies, level)
    ds = split_dataset(ds, validation_fraction, seed)
    counts = class_counts(ds, level, Split.TRAIN)
    cfg = RollupConfig(v=v, min_support=min_support, root_policy=root_policy)
    mapping, audit = compute_rollup(counts, hierarchy, cfg)
    summary = mapping_summary(mapping, audit)

    mapping_path = out_dir / "mapping.csv"
    audit_path = out_dir / "audit.csv"
    summary_path = out_dir / "rollup_summary.txt"
    export_mapping_csv(mapping, mapping_path)
    export_audit_csv(audit, audit_path)
    summary_path.write_text(summary.as_text() + "\n")
    artifacts.write_manifest(
        out_dir, "rollup",
        {"level": level.value, "v": v, "min_support": min_support,
         "root_policy": root_policy.value, "seed": seed,
         "validation_fraction": validation_fraction},
        {"mapping": mapping_path.name, "audit": audit_path.name, "summary": summary_path.name},
    )
    click.echo(summary.as_text())


# -- train / classify -------------------------------------------------------

def _train_payload(ctx, ds, hierarchy, level, model_kind, v, seed, params_kwargs):
    params = _model_params(
        ctx, seed=seed,
        min_support=params_kwargs["min_support"], root_policy=params_kwargs["root_policy"],
        nb_alpha=params_kwargs["alpha"], rf_trees=params_kwargs["rf_trees"],
        rf_max_depth=params_kwargs["rf_max_depth"], rf_min_leaf=params_kwargs["rf_min_leaf"],
        rf_vocab_cap=params_kwargs["rf_vocab_cap"],
    )
    features = build_features(ds, rf_vocab_cap=params.rf_vocab_cap)
    outcome = evaluate_at_v(features, hierarchy, level, model_kind, v, params=params)

    payload = {
        "model_kind": model_kind.value,
        "level": level.value,
        "v": v,
        "seed": seed,
        "mapping": {"map": dict(sorted(outcome.mapping.map.items())),
                    "retained": dict(sorted(outcome.mapping.retained.counts.items()))},
        "validation_macro_f1": outcome.report.macro_f1,
    }
    if model_kind is ModelKind.NB:
        model = outcome.model
        payload["vocabulary"] = dict(features.vectorizer.vocabulary_)
        payload["nb"] = {
            "alpha": model.alpha,
            "classes": list(model.classes_),
            "class_log_prior": model.class_log_prior_,
            "feature_log_prob": model.feature_log_prob_,
        }
    elif model_kind is ModelKind.RF:
        model = outcome.model
        payload["vocabulary"] = dict(features.rf_vectorizer.vocabulary_)
        payload["rf"] = {
            "n_trees": model.n_trees,
            "seed": model.seed,
            "max_depth": model.max_depth,
            "min_leaf": model.min_leaf,
            "classes": list(model.classes_),
            "trees": [
                {
                    "feature": t.feature, "threshold": t.threshold, "left": t.left,
                    "right": t.right, "leaf_class": t.leaf_class, "leaf_count": t.leaf_count,
                }
                for t in model.trees_
            ],
        }
    else:
        raise click.UsageError("train supports --model nb or rf; external models are files")
    return payload, outcome


@cli.command()
@data_option
@synth_option
@hierarchy_option
@level_option
@seed_option
@fraction_option
@_add_options(rollup_options)
@_add_options(model_options)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.pass_context
def train(ctx, data, synth_config, hierarchy_specs, level, seed, validation_fraction,
          v, min_support, root_policy, model, alpha, rf_trees, rf_max_depth,
          rf_min_leaf, rf_vocab_cap, external_predictions, out):
    """Roll up, train a model, and persist the artifact."""
    out_dir = _out_dir(out)
    ds, hierarchies = _load_dataset(data, synth_config, hierarchy_specs)
    hierarchy = _require_hierarchy(hierarchies, level)
    ds = split_dataset(ds, validation_fraction, seed)
    payload, outcome = _train_payload(
        ctx, ds, hierarchy, level, model, v, seed,
        dict(min_support=min_support, root_policy=root_policy, alpha=alpha,
             rf_trees=rf_trees, rf_max_depth=rf_max_depth, rf_min_leaf=rf_min_leaf,
             rf_vocab_cap=rf_vocab_cap),
    )
    model_path = out_dir / f"model_{model.value}_{level.value.lower()}.pkl"
    config = {"level": level.value, "model": model.value, "v": v, "seed": seed,
              "alpha": alpha, "rf_trees": rf_trees, "min_support": min_support}
    payload["config_hash"] = artifacts.config_hash(config)
    artifacts.save_model(model_path, payload)
    artifacts.write_manifest(out_dir, "train", config, {"model": model_path.name})
    click.echo(
        f"trained {model.value} at {level.value} v={v}: "
        f"validation macro-F1 {outcome.report.macro_f1:.4f} -> {model_path}"
    )


@cli.command()
@click.option("--model-artifact", required=True, type=click.Path(exists=True, dir_okay=False))
@data_option
@hierarchy_option
@click.option("--out", required=True, type=click.Path(file_okay=False))
def classify(model_artifact, data, hierarchy_specs, out):
    """Batch-predict class codes for every record in a CSV."""
    if data is None:
        raise click.UsageError("--data is required")
    out_dir = _out_dir(out)
    payload = artifacts.load_model(model_artifact)
    hierarchies = _parse_hierarchy_specs(hierarchy_specs) if hierarchy_specs else {}
    ds = ingest_csv(data, hierarchies)

    vec = TokenCountVectorizer.from_vocabulary(payload["vocabulary"])
    docs = [tokenize(clean_text(r.description)) for r in ds.records]
    X = vec.transform(docs)
    if payload["model_kind"] == "nb":
        nb_state = payload["nb"]
        model = MultinomialNaiveBayes(alpha=nb_state["alpha"])
        model.classes_ = np.array(nb_state["classes"], dtype=object)
        model.class_log_prior_ = nb_state["class_log_prior"]
        model.feature_log_prob_ = nb_state["feature_log_prob"]
        model_id = "nb"
    elif payload["model_kind"] == "rf":
        from .forest import Tree

        rf_state = payload["rf"]
        model = RandomForest(
            n_trees=rf_state["n_trees"], seed=rf_state["seed"],
            max_depth=rf_state["max_depth"], min_leaf=rf_state["min_leaf"],
        )
        model.classes_ = np.array(rf_state["classes"], dtype=object)
        model.trees_ = [Tree(**t) for t in rf_state["trees"]]
        model._pack()
        model_id = "rf"
    else:
        raise DataError(f"unsupported model kind {payload['model_kind']!r} in artifact")

    codes, conf = model.predict_with_confidence(X)
    predictions = [
        Prediction(record_key=r.key, predicted=c, confidence=float(p), model_id=model_id)
        for r, c, p in zip(ds.records, codes, conf)
    ]
    pred_path = out_dir / "predictions.csv"
    n = write_predictions_csv(predictions, pred_path)
    artifacts.write_manifest(
        out_dir, "classify",
        {"model_artifact": str(model_artifact), "data": str(data)},
        {"predictions": pred_path.name},
    )
    click.echo(f"wrote {n} predictions to {pred_path}")


# -- eval --------------------------------------------------------------------

@cli.command("eval")
@data_option
@synth_option
@hierarchy_option
@level_option
@seed_option
@fraction_option
@_add_options(rollup_options)
@_add_options(model_options)
@click.option("--mode", default="flat,dynamic", show_default=True,
              help="Comma list drawn from flat,dynamic.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.pass_context
def eval_cmd(ctx, data, synth_config, hierarchy_specs, level, seed, validation_fraction,
             v, min_support, root_policy, model, alpha, rf_trees, rf_max_depth,
             rf_min_leaf, rf_vocab_cap, external_predictions, mode, out):
    """Evaluate flat and/or dynamic classification on the validation set."""
    modes = [m.strip().lower() for m in mode.split(",") if m.strip()]
    unknown = [m for m in modes if m not in ("flat", "dynamic")]
    if unknown or not modes:
        raise click.UsageError(f"--mode must combine flat,dynamic; got {mode!r}")
    if "dynamic" in modes and v == 0:
        raise click.UsageError("dynamic mode needs --v greater than 0")

    out_dir = _out_dir(out)
    ds, hierarchies = _load_dataset(data, synth_config, hierarchy_specs)
    hierarchy = _require_hierarchy(hierarchies, level)
    ds = split_dataset(ds, validation_fraction, seed)
    params = _model_params(
        ctx, seed=seed, min_support=min_support, root_policy=root_policy,
        nb_alpha=alpha, rf_trees=rf_trees, rf_max_depth=rf_max_depth,
        rf_min_leaf=rf_min_leaf, rf_vocab_cap=rf_vocab_cap,
    )
    features = build_features(ds, rf_vocab_cap=params.rf_vocab_cap)
    external = None
    if model is ModelKind.EXTERNAL:
        if external_predictions is None:
            raise click.UsageError("--model external requires --external-predictions")
        external = {p.record_key: p for p in load_external_predictions(external_predictions)}

    written: dict[str, str] = {}
    reports = {}
    for m in modes:
        mode_v = 0 if m == "flat" else v
        outcome = evaluate_at_v(
            features, hierarchy, level, model, mode_v, params=params, external=external,
            mode=EvalMode.FLAT if m == "flat" else EvalMode.DYNAMIC,
        )
        reports[m] = outcome.report
        report_path = out_dir / f"report_{m}.json"
        report_path.write_text(outcome.report.to_json() + "\n")
        written[f"report_{m}"] = report_path.name

    table_path = out_dir / "report_tables.txt"
    if len(reports) == 2:
        comparison = compare(reports["flat"], reports["dynamic"])
        table_path.write_text(render_comparison(comparison) + "\n")
    else:
        table_path.write_text(render_report_table(list(reports.values())) + "\n")
    written["tables"] = table_path.name
    artifacts.write_manifest(
        out_dir, "eval",
        {"level": level.value, "model": model.value, "v": v, "seed": seed, "modes": modes},
        written,
    )
    click.echo(table_path.read_text().rstrip())


# -- sweep --------------------------------------------------------------------

@cli.command()
@data_option
@synth_option
@hierarchy_option
@level_option
@seed_option
@fraction_option
@click.option("--min-support", default=10, show_default=True, type=click.IntRange(min=1))
@_add_options(model_options)
@click.option("--grid", default="0:200:10", show_default=True, help="start:end:step or comma list.")
@click.option("--t", "t_target", default=0.8, show_default=True,
              type=click.FloatRange(0, 1, min_open=True), help="Target macro-F1.")
@click.option("--epsilon", default=0.01, show_default=True, type=click.FloatRange(min=0))
@click.option("--plot", is_flag=True, help="Also emit an SVG chart.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.pass_context
def sweep(ctx, data, synth_config, hierarchy_specs, level, seed, validation_fraction,
          min_support, model, alpha, rf_trees, rf_max_depth, rf_min_leaf, rf_vocab_cap,
          external_predictions, grid, t_target, epsilon, plot, out):
    """Evaluate macro-F1 across thresholds and select the stable one."""
    out_dir = _out_dir(out)
    ds, hierarchies = _load_dataset(data, synth_config, hierarchy_specs)
    hierarchy = _require_hierarchy(hierarchies, level)
    ds = split_dataset(ds, validation_fraction, seed)
    cfg = SweepConfig(
        level=level, model_kind=model, grid=_parse_grid(grid),
        t=t_target, epsilon=epsilon, seed=seed,
    )
    params = _model_params(
        ctx, seed=seed, min_support=min_support, nb_alpha=alpha, rf_trees=rf_trees,
        rf_max_depth=rf_max_depth, rf_min_leaf=rf_min_leaf, rf_vocab_cap=rf_vocab_cap,
    )
    external = None
    if model is ModelKind.EXTERNAL:
        if external_predictions is None:
            raise click.UsageError("--model external requires --external-predictions")
        external = {p.record_key: p for p in load_external_predictions(external_predictions)}

    points = run_sweep(ds, hierarchy, cfg, params=params, external=external)
    csv_path = out_dir / "sweep.csv"
    write_sweep_csv(points, csv_path)
    written = {"sweep": csv_path.name}
    if plot:
        svg_path = out_dir / "sweep.svg"
        write_sweep_svg(points, svg_path, title=f"{level.value} {model.value} macro-F1 vs v")
        written["plot"] = svg_path.name

    selected = select_threshold(points, t=cfg.t, epsilon=cfg.epsilon)
    best = argmax_point(points)
    artifacts.write_manifest(
        out_dir, "sweep",
        {"level": level.value, "model": model.value, "grid": list(cfg.grid),
         "t": cfg.t, "epsilon": cfg.epsilon, "seed": seed},
        written,
    )
    click.echo(f"wrote {csv_path}")
    click.echo(f"argmax: v={best.v} macro_f1={best.macro_f1:.4f}")
    if selected is None:
        click.echo(f"selected: none (no v stabilizes above t={cfg.t})")
    else:
        click.echo(f"selected: v={selected}")


# -- map / query ----------------------------------------------------------------

@cli.command("map")
@data_option
@hierarchy_option
@click.option("--context", "context_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--predictions", "prediction_specs", multiple=True, metavar="LEVEL=CSV",
              help="Predictions CSV per level (repeatable); default uses record labels.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def map_cmd(data, hierarchy_specs, context_path, prediction_specs, out):
    """Materialize classifications as N-Triples."""
    if data is None:
        raise click.UsageError("--data is required")
    out_dir = _out_dir(out)
    hierarchies = _parse_hierarchy_specs(hierarchy_specs) if hierarchy_specs else {}
    ds = ingest_csv(data, hierarchies)
    ctx_obj = load_mapping_context(context_path)

    per_level: dict[BreakdownLevel, dict[str, str]] = {}
    for spec in prediction_specs:
        name, _, path = spec.partition("=")
        if not path:
            raise click.UsageError(f"--predictions expects LEVEL=CSV, got {spec!r}")
        preds = load_external_predictions(path)
        per_level[_level(name)] = {p.record_key: p.predicted for p in preds}

    pairs = []
    for record in ds.records:
        assignment = {}
        if per_level:
            for level, by_key in per_level.items():
                code = by_key.get(record.key)
                if code is not None:
                    assignment[level] = code
        else:
            assignment = {lv: code for lv, code in record.labels.items() if code}
        pairs.append((record, assignment))

    store, report = map_records(pairs, ctx_obj)
    nt_path = out_dir / "triples.nt"
    n = serialize_ntriples(store, nt_path)
    artifacts.write_manifest(
        out_dir, "map",
        {"data": str(data), "context": str(context_path)},
        {"triples": nt_path.name},
    )
    click.echo(f"wrote {n} triples to {nt_path}")
    if report.slug_collisions:
        click.echo(f"warning: {len(report.slug_collisions)} subject slug collision(s)", err=True)


@cli.command()
@click.option("--triples", "triples_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--context", "context_path", required=True, type=click.Path(exists=True, dir_okay=False))
@hierarchy_option
@level_option
@click.option("--class", "code_text", required=True, help="Class code to query.")
@click.option("--subclasses", is_flag=True, help="Include descendant classes.")
def query(triples_path, context_path, hierarchy_specs, level, code_text, subclasses):
    """List subjects classified as a code (optionally with subclasses)."""
    hierarchies = _parse_hierarchy_specs(hierarchy_specs)
    hierarchy = _require_hierarchy(hierarchies, level)
    store = parse_ntriples(triples_path)
    ctx_obj = load_mapping_context(context_path)
    code = parse_code(code_text)
    for subject in query_classified_as(store, code, subclasses, hierarchy, ctx_obj):
        click.echo(subject)


# -- report ----------------------------------------------------------------------

@cli.command("report")
@click.argument("report_files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
def report_cmd(report_files):
    """Render report JSON files as aligned text tables."""
    from .metrics import ClassMetrics, EvalReport

    loaded = []
    for path in report_files:
        raw = json.loads(Path(path).read_text())
        loaded.append(
            EvalReport(
                level=BreakdownLevel(raw["level"]) if raw.get("level") else None,
                model_id=raw["model_id"],
                mode=EvalMode(raw["mode"]),
                per_class={
                    c: ClassMetrics(m["precision"], m["recall"], m["f1"], m["support"])
                    for c, m in raw["per_class"].items()
                },
                macro=(raw["macro"]["precision"], raw["macro"]["recall"], raw["macro"]["f1"]),
                weighted=(raw["weighted"]["precision"], raw["weighted"]["recall"], raw["weighted"]["f1"]),
                accuracy=raw["accuracy"],
                n_evaluated=raw["n_evaluated"],
                n_excluded=raw["n_excluded"],
            )
        )
    modes = {r.mode for r in loaded}
    if len(loaded) == 2 and modes == {EvalMode.FLAT, EvalMode.DYNAMIC}:
        flat = next(r for r in loaded if r.mode is EvalMode.FLAT)
        dyn = next(r for r in loaded if r.mode is EvalMode.DYNAMIC)
        click.echo(render_comparison(compare(flat, dyn)))
    else:
        click.echo(render_report_table(loaded))


# -- serve -------------------------------------------------------------------------

@cli.command()
@data_option
@synth_option
@hierarchy_option
@seed_option
@fraction_option
@click.option("--level", "levels", multiple=True, type=click.Choice(_LEVELS, case_sensitive=False),
              help="Levels to serve (repeatable; default all with hierarchies).")
@click.option("--model", "models", multiple=True, type=click.Choice(["nb", "rf"], case_sensitive=False),
              help="Models to serve (repeatable; default nb).")
@click.option("--v", "v", default=0, show_default=True, type=click.IntRange(min=0),
              help="Merge threshold for dynamic snapshots (0 = sweep-select).")
@click.option("--min-support", default=10, show_default=True, type=click.IntRange(min=1))
@click.option("--alpha", default=0.01, show_default=True)
@click.option("--rf-trees", default=100, show_default=True, type=click.IntRange(min=1))
@click.option("--sweep", "do_sweep", is_flag=True,
              help="Precompute a threshold sweep per snapshot; with --v 0 the "
                   "selected threshold drives the dynamic model.")
@click.option("--sweep-t", default=0.7, show_default=True,
              type=click.FloatRange(0, 1, min_open=True), help="Sweep selection target.")
@click.option("--state-dir", default=None, type=click.Path(file_okay=False),
              help="Directory for the corrections log (default: in-memory only path under --out).")
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False),
              help="Static directory with the built review UI.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_context
def serve(ctx, data, synth_config, hierarchy_specs, seed, validation_fraction, levels,
          models, v, min_support, alpha, rf_trees, do_sweep, sweep_t, state_dir,
          ui_dir, host, port):
    """Serve the review API (and UI, when --ui-dir is given) over HTTP."""
    import uvicorn

    from .service import ServiceConfig, build_app

    ds, hierarchies = _load_dataset(data, synth_config, hierarchy_specs)
    level_set = [_level(lv) for lv in levels] if levels else sorted(hierarchies, key=lambda l: l.value)
    model_set = [ModelKind(m.lower()) for m in models] if models else [ModelKind.NB]
    config = ServiceConfig(
        levels=tuple(level_set),
        models=tuple(model_set),
        v=v,
        seed=seed,
        validation_fraction=validation_fraction,
        min_support=min_support,
        nb_alpha=alpha,
        rf_trees=rf_trees,
        threads=ctx.obj.get("threads", 1),
        sweep=do_sweep,
        sweep_t=sweep_t,
        state_dir=Path(state_dir) if state_dir else None,
        ui_dir=Path(ui_dir) if ui_dir else None,
    )
    app = build_app(ds, hierarchies, config)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except (TaxorollError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
