"""Access to packaged data: demo hierarchies and the benchmark config."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .hierarchy import BreakdownLevel, Hierarchy, load_hierarchy
from .synth import SynthConfig, load_synth_config


def data_path(name: str) -> Path:
    """Filesystem path of a packaged data file."""
    return Path(resources.files("taxoroll").joinpath("data", name))


def demo_hierarchies() -> dict[BreakdownLevel, Hierarchy]:
    """The small illustrative hierarchies shipped with the package."""
    return {
        level: load_hierarchy(data_path(f"demo_{level.value.lower()}.txt"), level)
        for level in BreakdownLevel
    }


def benchmark_config() -> SynthConfig:
    """The shipped synthetic benchmark (seed 42, 20k records)."""
    return load_synth_config(data_path("benchmark.json"))
