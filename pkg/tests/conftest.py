"""Shared fixtures: small hierarchies and the session-cached benchmark."""

from __future__ import annotations

import pytest

from taxoroll.corpus import split_dataset
from taxoroll.data_files import benchmark_config, demo_hierarchies
from taxoroll.hierarchy import BreakdownLevel, Hierarchy
from taxoroll.pipeline import build_features
from taxoroll.synth import generate_synthetic


@pytest.fixture
def bl1_hierarchy() -> Hierarchy:
    return Hierarchy(BreakdownLevel.BL1, ["L", "LN", "LNA", "LNB", "LA", "M"])


@pytest.fixture
def demo() -> dict[BreakdownLevel, Hierarchy]:
    return demo_hierarchies()


@pytest.fixture(scope="session")
def benchmark():
    """Shipped 20k-record benchmark: config, split dataset and features.

    Session-scoped: generation plus featurization costs a few seconds and
    several tests (including acceptance) share it read-only.
    """
    cfg = benchmark_config()
    ds = split_dataset(generate_synthetic(cfg), 0.2, seed=42)
    features = build_features(ds)
    return cfg, ds, features
