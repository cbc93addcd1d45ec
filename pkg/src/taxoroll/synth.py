"""Seeded synthetic corpus generator mimicking plant-export data shape.

Real device descriptions are confidential, so tests and demos run on
generated corpora with the same statistical fingerprints: heavy head-class
imbalance with a Zipf tail, short free-text descriptions whose tokens are
shared along the class hierarchy, noise words, and enumeration suffixes.
Generation is bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Dataset, Record
from .errors import ConfigInvalid
from .hierarchy import BreakdownLevel, ClassCode, Hierarchy, load_hierarchy

# Tokens owned by a hierarchy node, by node depth. Shallow nodes get
# bigger pools: their tokens are shared by every descendant class.
_POOL_SIZE_BY_DEPTH = {1: 12, 2: 6, 3: 4}

# Probability that an informative word comes from each depth of the
# label's root-to-leaf path (truncated and renormalized for short paths).
_DEPTH_WEIGHTS = (0.35, 0.40, 0.25)

_NOISE_VOCAB_SIZE = 150
_N_PLANTS = 6

_CONSONANTS = "bcdfghjklmnpqrstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SynthConfig:
    """Targets and knobs for one synthetic corpus."""

    seed: int
    hierarchies: Mapping[BreakdownLevel, Hierarchy]
    n_records: int
    head_class_share: float
    zipf_exponent: float
    mean_words: float
    noise_rate: float
    enumeration_rate: float

    def __post_init__(self) -> None:
        if not self.hierarchies:
            raise ConfigInvalid("at least one hierarchy is required")
        if self.n_records < 1:
            raise ConfigInvalid(f"n_records must be >= 1, got {self.n_records}")
        if not 0 <= self.head_class_share < 1:
            raise ConfigInvalid(f"head_class_share must be in [0, 1), got {self.head_class_share}")
        if self.zipf_exponent <= 0:
            raise ConfigInvalid(f"zipf_exponent must be > 0, got {self.zipf_exponent}")
        if self.mean_words <= 0:
            raise ConfigInvalid(f"mean_words must be > 0, got {self.mean_words}")
        for name in ("noise_rate", "enumeration_rate"):
            rate = getattr(self, name)
            if not 0 <= rate <= 1:
                raise ConfigInvalid(f"{name} must be in [0, 1], got {rate}")


def load_synth_config(path: str | Path) -> SynthConfig:
    """Read a SynthConfig from JSON; hierarchy paths resolve relative to it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: not valid JSON: {exc}") from None
    try:
        hier_paths = raw.pop("hierarchy")
        hierarchies = {
            BreakdownLevel(level): load_hierarchy(path.parent / rel, BreakdownLevel(level))
            for level, rel in hier_paths.items()
        }
        return SynthConfig(hierarchies=hierarchies, **raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{path}: {exc}") from None


def head_class(hierarchy: Hierarchy) -> ClassCode:
    """The class receiving ``head_class_share`` of a level's records."""
    return sorted(hierarchy.leaves)[0]


def class_distribution(
    hierarchy: Hierarchy, head_share: float, zipf_exponent: float
) -> tuple[list[ClassCode], np.ndarray]:
    """Leaf classes and their sampling probabilities for one level.

    The lexicographically first leaf takes ``head_share``; the rest follow
    a Zipf law (rank-``k`` weight ``k**-s``) over the remaining mass. With
    ``head_share == 0`` the Zipf law covers every leaf.
    """
    leaves = sorted(hierarchy.leaves)
    if len(leaves) == 1:
        return leaves, np.array([1.0])
    if head_share == 0.0:
        ranks = np.arange(1, len(leaves) + 1, dtype=float)
        weights = ranks ** -zipf_exponent
        return leaves, weights / weights.sum()
    ranks = np.arange(1, len(leaves), dtype=float)
    weights = ranks ** -zipf_exponent
    probs = np.concatenate([[head_share], weights * (1.0 - head_share) / weights.sum()])
    return leaves, probs


def _label_vector(
    rng: np.random.Generator,
    leaves: list[ClassCode],
    probs: np.ndarray,
    n: int,
) -> list[ClassCode]:
    """Shuffled label assignment whose class counts match ``probs`` exactly.

    Counts come from largest-remainder rounding of ``probs * n``, so the
    realized frequencies track the head+Zipf design without multinomial
    sampling noise; only the order is random.
    """
    target = probs * n
    counts = np.floor(target).astype(int)
    remainder = target - counts
    missing = n - int(counts.sum())
    for idx in np.argsort(-remainder, kind="stable")[:missing]:
        counts[idx] += 1
    labels = [leaf for leaf, c in zip(leaves, counts) for _ in range(int(c))]
    rng.shuffle(labels)
    return labels


def _fresh_word(rng: np.random.Generator, used: set[str]) -> str:
    while True:
        n_syllables = int(rng.integers(2, 4))
        word = "".join(
            _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(n_syllables)
        )
        if word not in used:
            used.add(word)
            return word


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """Generate a labeled dataset per the config; deterministic in the seed.

    Per record and level, a leaf class is drawn from the head+Zipf
    distribution. The description mixes tokens owned by the nodes on each
    label's root-to-leaf path (ancestor pools weighted above leaf pools),
    noise tokens at ``noise_rate``, and an integer enumeration suffix at
    ``enumeration_rate``. Ground-truth labels are attached at all levels.
    """
    rng = np.random.default_rng(cfg.seed)
    levels = sorted(cfg.hierarchies, key=lambda lv: lv.value)

    used_words: set[str] = set()
    pools: dict[tuple[BreakdownLevel, ClassCode], list[str]] = {}
    for level in levels:
        for code in cfg.hierarchies[level].codes:
            size = _POOL_SIZE_BY_DEPTH[len(code)]
            pools[(level, code)] = [_fresh_word(rng, used_words) for _ in range(size)]
    noise_vocab = [_fresh_word(rng, used_words) for _ in range(_NOISE_VOCAB_SIZE)]

    distributions = {
        level: class_distribution(cfg.hierarchies[level], cfg.head_class_share, cfg.zipf_exponent)
        for level in levels
    }
    paths = {
        level: {code: cfg.hierarchies[level].path(code) for code in distributions[level][0]}
        for level in levels
    }
    label_vectors = {
        level: _label_vector(rng, *distributions[level], cfg.n_records) for level in levels
    }

    records = []
    for i in range(cfg.n_records):
        labels: dict[BreakdownLevel, ClassCode | None] = {
            level: label_vectors[level][i] for level in levels
        }
        n_words = 1 + int(rng.poisson(max(cfg.mean_words - 1.0, 0.0)))
        words = []
        for _ in range(n_words):
            if rng.random() < cfg.noise_rate:
                words.append(noise_vocab[int(rng.integers(len(noise_vocab)))])
                continue
            level = levels[int(rng.integers(len(levels)))]
            path = paths[level][labels[level]]
            depth_w = np.array(_DEPTH_WEIGHTS[: len(path)])
            node = path[int(rng.choice(len(path), p=depth_w / depth_w.sum()))]
            pool = pools[(level, node)]
            words.append(pool[int(rng.integers(len(pool)))])
        if rng.random() < cfg.enumeration_rate:
            words.append(str(int(rng.integers(1, 100))))
        # light capitalization dirt, removed again by clean_text
        words = [w.capitalize() if rng.random() < 0.3 else w for w in words]

        records.append(
            Record(
                record_id=f"r{i:06d}",
                plant_id=f"plant-{int(rng.integers(1, _N_PLANTS + 1))}",
                description=" ".join(words),
                labels=labels,
            )
        )
    return Dataset(records=tuple(records))
