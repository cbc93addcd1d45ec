"""Letter-coded classification hierarchies for the three breakdown levels.

A class code is a string of 1-3 uppercase letters; nesting is encoded in
the code itself: dropping the last letter yields the parent class, so the
code length is the class depth. ``Hierarchy`` holds the validated code set
for one breakdown level and answers parent/ancestor/descendant queries.
"""

from __future__ import annotations

import re
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DepthExceeded, InvalidCode

#: A validated class code. Kept as a plain ``str``; use :func:`parse_code`
#: at trust boundaries.
ClassCode = str

_CODE_RE = re.compile(r"^[A-Z]{1,3}$")

MAX_CODE_LEN = 3


class BreakdownLevel(Enum):
    """Granularity tier of a system within a plant."""

    BL0 = "BL0"
    BL1 = "BL1"
    BL2 = "BL2"

    @property
    def max_depth(self) -> int:
        """Deepest code length allowed at this level."""
        return 1 if self is BreakdownLevel.BL0 else MAX_CODE_LEN

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def parse_code(text: str) -> ClassCode:
    """Validate and normalize a class code (uppercased, 1-3 letters A-Z)."""
    code = text.strip().upper()
    if not _CODE_RE.match(code):
        raise InvalidCode(f"invalid class code {text!r}: expected 1-{MAX_CODE_LEN} letters A-Z")
    return code


def level_of(code: ClassCode) -> int:
    """Depth of a code in its hierarchy (= its length)."""
    return len(code)


def parent_of(code: ClassCode) -> ClassCode | None:
    """Direct parent (drop the last letter); ``None`` for root codes."""
    return code[:-1] if len(code) > 1 else None


def ancestors(code: ClassCode) -> list[ClassCode]:
    """Proper ancestors, nearest first. Empty for roots."""
    return [code[:k] for k in range(len(code) - 1, 0, -1)]


def is_descendant_or_self(a: ClassCode, b: ClassCode) -> bool:
    """True iff ``a`` equals ``b`` or sits below it (``b`` is a prefix of ``a``)."""
    return a.startswith(b)


class Hierarchy:
    """Immutable, parent-closed code set for one breakdown level.

    Construction validates every code, enforces the level's depth limit and
    requires the set to be closed under parents (every non-root code's
    prefix is present). Instances are safe to share across threads.
    """

    def __init__(
        self,
        level: BreakdownLevel,
        codes: Iterable[ClassCode],
        labels: Mapping[ClassCode, str] | None = None,
        load_warnings: Iterable[str] = (),
    ):
        validated = {parse_code(c) for c in codes}
        for code in validated:
            if len(code) > level.max_depth:
                raise DepthExceeded(
                    f"code {code!r} has depth {len(code)}, max for {level} is {level.max_depth}"
                )
            parent = parent_of(code)
            if parent is not None and parent not in validated:
                raise InvalidCode(f"hierarchy not closed under parents: {code!r} lacks {parent!r}")
        self.level = level
        self._codes = frozenset(validated)
        self._sorted = tuple(sorted(validated))
        self.labels = dict(labels or {})
        self.load_warnings = tuple(load_warnings)

    @classmethod
    def from_codes_closed(
        cls,
        level: BreakdownLevel,
        codes: Iterable[ClassCode],
        labels: Mapping[ClassCode, str] | None = None,
    ) -> "Hierarchy":
        """Build a hierarchy, auto-inserting missing ancestor codes.

        Inserted codes are reported in ``load_warnings`` on the result.
        """
        validated = {parse_code(c) for c in codes}
        inserted = []
        for code in sorted(validated):
            for anc in ancestors(code):
                if anc not in validated:
                    inserted.append(anc)
        validated.update(inserted)
        warnings = [f"auto-inserted missing ancestor code {c!r}" for c in sorted(set(inserted))]
        return cls(level, validated, labels=labels, load_warnings=warnings)

    # -- queries ---------------------------------------------------------

    def __contains__(self, code: object) -> bool:
        return code in self._codes

    def __len__(self) -> int:
        return len(self._codes)

    def __iter__(self):
        return iter(self._sorted)

    @property
    def codes(self) -> tuple[ClassCode, ...]:
        """All codes, sorted."""
        return self._sorted

    @property
    def roots(self) -> tuple[ClassCode, ...]:
        return tuple(c for c in self._sorted if len(c) == 1)

    @property
    def leaves(self) -> tuple[ClassCode, ...]:
        """Codes with no children in this hierarchy."""
        prefixes = {parent_of(c) for c in self._sorted if len(c) > 1}
        return tuple(c for c in self._sorted if c not in prefixes)

    def children(self, code: ClassCode) -> tuple[ClassCode, ...]:
        return tuple(c for c in self._sorted if len(c) == len(code) + 1 and c.startswith(code))

    def descendants_or_self(self, code: ClassCode) -> tuple[ClassCode, ...]:
        return tuple(c for c in self._sorted if is_descendant_or_self(c, code))

    def label_for(self, code: ClassCode) -> str | None:
        return self.labels.get(code)

    def path(self, code: ClassCode) -> list[ClassCode]:
        """Root-first path down to ``code`` (inclusive)."""
        return list(reversed(ancestors(code))) + [code]

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"Hierarchy({self.level}, {len(self)} codes)"


def load_hierarchy(path: str | Path, level: BreakdownLevel) -> Hierarchy:
    """Load a hierarchy from a ``CODE[,label]`` per-line text file.

    ``#`` starts a comment line, blank lines are skipped. Missing
    intermediate codes are auto-inserted and flagged in ``load_warnings``.
    Raises :class:`InvalidCode` (with line number) or :class:`DepthExceeded`.
    """
    codes: list[ClassCode] = []
    labels: dict[ClassCode, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        code_part, _, label_part = line.partition(",")
        try:
            code = parse_code(code_part)
        except InvalidCode as exc:
            raise InvalidCode(f"{path}:{lineno}: {exc}") from None
        if len(code) > level.max_depth:
            raise DepthExceeded(
                f"{path}:{lineno}: code {code!r} exceeds max depth {level.max_depth} for {level}"
            )
        codes.append(code)
        label = label_part.strip()
        if label:
            labels[code] = label
    return Hierarchy.from_codes_closed(level, codes, labels=labels)
