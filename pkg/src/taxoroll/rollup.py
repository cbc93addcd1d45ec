"""Dynamic class management: merge under-threshold classes into parents.

Classes with fewer than ``v`` training samples are folded into their
hierarchy parent, bottom-up, so that sample counts accumulate upward and a
still-thin parent cascades further. Root classes cannot merge; after the
sweep an absolute support floor discards classes that remain too small.
The result is a per-class label mapping plus an audit trail.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .corpus import ClassCounts, Dataset, RelabelStats, Record
from .errors import ConfigInvalid, UnknownClass
from .hierarchy import BreakdownLevel, ClassCode, Hierarchy, ancestors, parent_of

#: Mapping target for classes dropped from the dataset entirely.
DISCARDED = "DISCARDED"


class RootPolicy(Enum):
    """What to do with root classes that end below the merge threshold."""

    KEEP_IF_MIN_SUPPORT = "KEEP_IF_MIN_SUPPORT"
    DISCARD_BELOW_V = "DISCARD_BELOW_V"


@dataclass(frozen=True)
class RollupConfig:
    v: int
    min_support: int = 10
    root_policy: RootPolicy = RootPolicy.KEEP_IF_MIN_SUPPORT

    def __post_init__(self) -> None:
        if self.v < 0:
            raise ConfigInvalid(f"v must be >= 0, got {self.v}")
        if self.min_support < 1:
            raise ConfigInvalid(f"min_support must be >= 1, got {self.min_support}")


@dataclass(frozen=True)
class LabelMapping:
    """Per-class rewrite produced by the rollup.

    ``map`` sends every source class to itself, to an ancestor, or to
    ``DISCARDED``; ``retained`` holds the post-merge class counts.
    """

    level: BreakdownLevel
    map: Mapping[ClassCode, str]
    retained: ClassCounts

    def target_for(self, code: ClassCode) -> str | None:
        """Resolve a code via the map, walking ancestors for unseen codes.

        Returns a retained class code, ``DISCARDED``, or ``None`` when
        neither the code nor any ancestor is covered by the mapping.
        """
        if code in self.map:
            return self.map[code]
        for anc in ancestors(code):
            if anc in self.map:
                return self.map[anc]
        return None


@dataclass(frozen=True)
class RollupAudit:
    """Ordered merge steps and final discards of one rollup run."""

    steps: tuple[tuple[ClassCode, ClassCode, int], ...]
    discarded: tuple[tuple[ClassCode, int], ...]


def compute_rollup(
    counts: ClassCounts,
    hierarchy: Hierarchy,
    cfg: RollupConfig,
) -> tuple[LabelMapping, RollupAudit]:
    """Run the bottom-up merge sweep over one level's class counts.

    Codes are processed by decreasing length (lexicographic within a
    length) so children reinforce their parent before the parent is
    judged. Every non-root class whose accumulated count is below ``v``
    moves its samples to its parent. Roots never merge; they are kept or
    discarded per ``cfg.root_policy``. After the sweep, any class left
    below ``cfg.min_support`` is discarded. Deterministic regardless of
    the iteration order of ``counts``.
    """
    for code in counts.counts:
        if code not in hierarchy:
            raise UnknownClass(f"counted code {code!r} not in {hierarchy.level} hierarchy")
        if counts.counts[code] < 0:
            raise ConfigInvalid(f"negative count for {code!r}")

    acc: dict[ClassCode, int] = dict(counts.counts)
    merged_into: dict[ClassCode, ClassCode] = {}
    steps: list[tuple[ClassCode, ClassCode, int]] = []

    max_len = max((len(c) for c in acc), default=0)
    for length in range(max_len, 1, -1):
        for code in sorted(c for c in acc if len(c) == length and c not in merged_into):
            if acc[code] < cfg.v:
                parent = parent_of(code)
                assert parent is not None  # length > 1
                moved = acc[code]
                acc[parent] = acc.get(parent, 0) + moved
                merged_into[code] = parent
                if moved > 0:
                    steps.append((code, parent, moved))

    survivors = [c for c in sorted(acc) if c not in merged_into]
    discarded: set[ClassCode] = set()
    for code in survivors:
        n = acc[code]
        if len(code) == 1 and cfg.root_policy is RootPolicy.DISCARD_BELOW_V and n < cfg.v:
            discarded.add(code)
        elif n < cfg.min_support:
            discarded.add(code)

    def resolve(code: ClassCode) -> ClassCode:
        while code in merged_into:
            code = merged_into[code]
        return code

    mapping: dict[ClassCode, str] = {}
    for code in sorted(set(acc)):
        final = resolve(code)
        mapping[code] = DISCARDED if final in discarded else final

    retained = ClassCounts(
        level=counts.level,
        counts={c: acc[c] for c in survivors if c not in discarded},
    )
    audit = RollupAudit(
        steps=tuple(steps),
        discarded=tuple((c, acc[c]) for c in sorted(discarded)),
    )
    return LabelMapping(level=counts.level, map=mapping, retained=retained), audit


def apply_mapping(
    ds: Dataset,
    level: BreakdownLevel,
    mapping: LabelMapping,
) -> Dataset:
    """Rewrite every record's label at ``level`` through the mapping.

    Labels absent from the map are resolved by walking ancestors until a
    mapped code is found; otherwise (or when mapped to ``DISCARDED``) the
    record is excluded at that level, i.e. its label becomes ``None``.
    Rewrite/exclusion counters are attached to the returned dataset.
    """
    if mapping.level is not level:
        raise ConfigInvalid(f"mapping is for {mapping.level}, dataset relabel asked for {level}")

    rewritten = 0
    excluded = 0
    new_records: list[Record] = []
    for r in ds.records:
        code = r.label(level)
        if code is None:
            new_records.append(r)
            continue
        target = mapping.target_for(code)
        if target is None or target == DISCARDED:
            excluded += 1
            new_labels = dict(r.labels)
            new_labels[level] = None
            new_records.append(replace(r, labels=new_labels))
        elif target != code:
            rewritten += 1
            new_labels = dict(r.labels)
            new_labels[level] = target
            new_records.append(replace(r, labels=new_labels))
        else:
            new_records.append(r)

    stats = RelabelStats(level=level, n_rewritten=rewritten, n_excluded=excluded)
    return replace(
        ds,
        records=tuple(new_records),
        relabel_stats=ds.relabel_stats + (stats,),
    )


@dataclass(frozen=True)
class RollupSummary:
    """Shape of a mapping: how many classes survived, merged or dropped."""

    retained: int
    merged_one_level: int
    merged_two_levels: int
    discarded: int

    @property
    def merged(self) -> int:
        return self.merged_one_level + self.merged_two_levels

    def as_text(self) -> str:
        rows = [
            ("retained classes", self.retained),
            ("merged one level", self.merged_one_level),
            ("merged two levels", self.merged_two_levels),
            ("discarded classes", self.discarded),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value:>6}" for name, value in rows)


def mapping_summary(mapping: LabelMapping, audit: RollupAudit) -> RollupSummary:
    """Summarize a mapping into retain/merge/discard counters."""
    merged_one = merged_two = discarded = 0
    for source in sorted(mapping.map):
        target = mapping.map[source]
        if target == DISCARDED:
            discarded += 1
        elif target != source:
            hops = len(source) - len(target)
            if hops == 1:
                merged_one += 1
            else:
                merged_two += 1
    return RollupSummary(
        retained=len(mapping.retained.counts),
        merged_one_level=merged_one,
        merged_two_levels=merged_two,
        discarded=discarded,
    )


def export_mapping_csv(mapping: LabelMapping, path: str | Path) -> None:
    """Write ``source_code,target_code_or_DISCARDED`` rows, sorted."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_code", "target_code_or_DISCARDED"])
        for source in sorted(mapping.map):
            writer.writerow([source, mapping.map[source]])


def export_audit_csv(audit: RollupAudit, path: str | Path) -> None:
    """Write the merge steps in sweep order."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["merged_class", "target_class", "samples_moved"])
        for merged, target, moved in audit.steps:
            writer.writerow([merged, target, moved])


class ClassRollup(BaseEstimator, TransformerMixin):
    """Sklearn-style label transformer wrapping :func:`compute_rollup`.

    ``fit`` learns the mapping from an array of training labels;
    ``transform`` rewrites labels, yielding ``None`` for excluded ones.
    """

    def __init__(
        self,
        hierarchy: Hierarchy,
        v: int = 0,
        min_support: int = 10,
        root_policy: RootPolicy = RootPolicy.KEEP_IF_MIN_SUPPORT,
    ):
        self.hierarchy = hierarchy
        self.v = v
        self.min_support = min_support
        self.root_policy = root_policy

    def fit(self, y: Sequence[ClassCode], _unused=None) -> "ClassRollup":
        counts: dict[ClassCode, int] = {}
        for code in y:
            if code is not None:
                counts[code] = counts.get(code, 0) + 1
        cfg = RollupConfig(v=self.v, min_support=self.min_support, root_policy=self.root_policy)
        self.mapping_, self.audit_ = compute_rollup(
            ClassCounts(level=self.hierarchy.level, counts=counts), self.hierarchy, cfg
        )
        return self

    def transform(self, y: Sequence[ClassCode]) -> list[ClassCode | None]:
        if not hasattr(self, "mapping_"):
            raise NotFittedError("ClassRollup.transform called before fit")
        out: list[ClassCode | None] = []
        for code in y:
            if code is None:
                out.append(None)
                continue
            target = self.mapping_.target_for(code)
            out.append(None if target is None or target == DISCARDED else target)
        return out
