"""Materialize classifications as triples and query them with closure.

Each classified record becomes one ``ClassifiedAs`` statement per level,
linking a deterministic subject IRI (plant/record slug) to a class IRI.
The in-memory store answers single-pattern matches; class queries can
close over subclasses, i.e. all codes extending the queried prefix.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from .corpus import Record
from .errors import InvalidContext, InvalidIri, IoError, ParseError, UnknownClass
from .hierarchy import BreakdownLevel, ClassCode, Hierarchy

_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|^`\\]*$")

Iri = str


def parse_iri(text: str) -> Iri:
    """Validate an absolute IRI (scheme prefix, no whitespace/brackets)."""
    if not _IRI_RE.match(text):
        raise InvalidIri(f"invalid IRI {text!r}")
    return text


class Triple(NamedTuple):
    subject: Iri
    predicate: Iri
    object: Iri


class TripleStore:
    """Set-semantics triple store with subject/predicate/object indexes."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: set[Triple] = set()
        self._by_subject: dict[Iri, set[Triple]] = {}
        self._by_predicate: dict[Iri, set[Triple]] = {}
        self._by_object: dict[Iri, set[Triple]] = {}
        for t in triples:
            self.add(t)

    def add(self, triple: Triple) -> bool:
        """Insert a triple; returns False when it was already present."""
        if triple in self._triples:
            return False
        for part in triple:
            parse_iri(part)
        self._triples.add(triple)
        self._by_subject.setdefault(triple.subject, set()).add(triple)
        self._by_predicate.setdefault(triple.predicate, set()).add(triple)
        self._by_object.setdefault(triple.object, set()).add(triple)
        return True

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: object) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TripleStore) and self._triples == other._triples

    def sorted_triples(self) -> list[Triple]:
        return sorted(self._triples)

    def match(
        self,
        subject: Iri | None = None,
        predicate: Iri | None = None,
        object: Iri | None = None,
    ) -> list[Triple]:
        """All triples matching the bound components (None = wildcard)."""
        candidate_sets = []
        if subject is not None:
            candidate_sets.append(self._by_subject.get(subject, set()))
        if predicate is not None:
            candidate_sets.append(self._by_predicate.get(predicate, set()))
        if object is not None:
            candidate_sets.append(self._by_object.get(object, set()))
        if not candidate_sets:
            return self.sorted_triples()
        smallest = min(candidate_sets, key=len)
        result = [
            t
            for t in smallest
            if (subject is None or t.subject == subject)
            and (predicate is None or t.predicate == predicate)
            and (object is None or t.object == object)
        ]
        return sorted(result)


@dataclass(frozen=True)
class MappingContext:
    """IRI construction rules for mapping records into the store."""

    base_iri: Iri
    vocab_prefix: Iri
    class_iri_template: str = "PowerPlantComponent{code}"

    def __post_init__(self) -> None:
        try:
            parse_iri(self.base_iri)
            parse_iri(self.classified_as_iri())
            parse_iri(self.class_iri("QA"))
        except InvalidIri as exc:
            raise InvalidContext(str(exc)) from None

    def subject_iri(self, record: Record) -> Iri:
        slug_plant = slug(record.plant_id)
        slug_record = slug(record.record_id)
        if not slug_plant or not slug_record:
            raise InvalidContext(
                f"record ({record.plant_id!r}, {record.record_id!r}) slugs to an empty segment"
            )
        return f"{self.base_iri.rstrip('/')}/{slug_plant}/{slug_record}"

    def classified_as_iri(self) -> Iri:
        return f"{self.vocab_prefix}ClassifiedAs"

    def class_iri(self, code: ClassCode) -> Iri:
        return f"{self.vocab_prefix}{self.class_iri_template.format(code=code)}"


def load_mapping_context(path: str | Path) -> MappingContext:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return MappingContext(
        base_iri=raw["base_iri"],
        vocab_prefix=raw["vocab_prefix"],
        class_iri_template=raw.get("class_iri_template", "PowerPlantComponent{code}"),
    )


_SLUG_STRIP_RE = re.compile(r"[^a-z0-9-]")
_HYPHEN_RUN_RE = re.compile(r"-+")


def slug(text: str) -> str:
    """Lowercase, whitespace to hyphens, strip other non-alphanumerics."""
    out = re.sub(r"\s+", "-", text.lower().strip())
    out = _SLUG_STRIP_RE.sub("", out)
    return _HYPHEN_RUN_RE.sub("-", out).strip("-")


def record_to_triples(
    record: Record,
    predictions: Mapping[BreakdownLevel, ClassCode],
    ctx: MappingContext,
) -> list[Triple]:
    """One ClassifiedAs triple per classified level for one record."""
    subject = ctx.subject_iri(record)
    predicate = ctx.classified_as_iri()
    return [
        Triple(subject, predicate, ctx.class_iri(predictions[level]))
        for level in sorted(predictions, key=lambda lv: lv.value)
    ]


@dataclass
class MappingReport:
    """Diagnostics from a bulk record-to-triples run."""

    n_records: int = 0
    n_triples: int = 0
    slug_collisions: list[tuple[str, str]] = field(default_factory=list)


def map_records(
    records_with_predictions: Iterable[tuple[Record, Mapping[BreakdownLevel, ClassCode]]],
    ctx: MappingContext,
    store: TripleStore | None = None,
) -> tuple[TripleStore, MappingReport]:
    """Map many records into a store, reporting subject-slug collisions."""
    store = store if store is not None else TripleStore()
    report = MappingReport()
    subject_owner: dict[Iri, str] = {}
    for record, predictions in records_with_predictions:
        subject = ctx.subject_iri(record)
        owner = subject_owner.get(subject)
        if owner is not None and owner != record.key:
            report.slug_collisions.append((owner, record.key))
        subject_owner[subject] = record.key
        for triple in record_to_triples(record, predictions, ctx):
            if store.add(triple):
                report.n_triples += 1
        report.n_records += 1
    return store, report


# -- N-Triples serialization ----------------------------------------------

_NT_LINE_RE = re.compile(r"^<([^\s<>]+)> <([^\s<>]+)> <([^\s<>]+)> \.$")


def serialize_ntriples(store: TripleStore, path: str | Path) -> int:
    """Write ``<s> <p> <o> .`` lines, sorted for reproducibility."""
    try:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            count = 0
            for s, p, o in store.sorted_triples():
                fh.write(f"<{s}> <{p}> <{o}> .\n")
                count += 1
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return count


def parse_ntriples(path: str | Path) -> TripleStore:
    """Parse a file produced by :func:`serialize_ntriples`.

    Accepts blank lines and ``#`` comments; anything else that does not
    match the IRI-triple grammar raises :class:`ParseError` with the line
    number.
    """
    store = TripleStore()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _NT_LINE_RE.match(line)
        if not m:
            raise ParseError(f"malformed N-Triples statement: {raw!r}", line=lineno)
        try:
            store.add(Triple(*m.groups()))
        except InvalidIri as exc:
            raise ParseError(str(exc), line=lineno) from None
    return store


def query_classified_as(
    store: TripleStore,
    code: ClassCode,
    include_subclasses: bool,
    hierarchy: Hierarchy,
    ctx: MappingContext,
) -> list[Iri]:
    """Subjects classified as ``code`` (optionally closing over descendants).

    Descendants are the hierarchy codes having ``code`` as a prefix; the
    result is deduplicated and sorted.
    """
    if code not in hierarchy:
        raise UnknownClass(f"code {code!r} not in {hierarchy.level} hierarchy")
    codes = hierarchy.descendants_or_self(code) if include_subclasses else (code,)
    predicate = ctx.classified_as_iri()
    subjects: set[Iri] = set()
    for c in codes:
        for triple in store.match(None, predicate, ctx.class_iri(c)):
            subjects.add(triple.subject)
    return sorted(subjects)
