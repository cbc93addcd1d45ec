"""Exception hierarchy shared across the package.

Everything raised on bad input derives from :class:`DataError` so the CLI
can map it to a single exit code; :class:`UsageError` style problems are
left to click.
"""


class TaxorollError(Exception):
    """Base class for all package errors."""


class DataError(TaxorollError):
    """Invalid input data (files, codes, configs). CLI exit code 2."""


class InvalidCode(DataError):
    """A class code failed validation."""


class DepthExceeded(DataError):
    """A class code is deeper than its breakdown level allows."""


class InvalidIri(DataError):
    """An IRI string failed validation."""


class InvalidContext(DataError):
    """A knowledge-base mapping context produced invalid IRIs."""


class MalformedCsv(DataError):
    """A CSV input could not be parsed; message carries row diagnostics."""


class MissingColumn(MalformedCsv):
    """A required CSV column is absent."""


class TooFewRecords(DataError):
    """Operation requires more records than the dataset holds."""


class ConfigInvalid(DataError):
    """A configuration object violates its invariants."""


class UnknownClass(DataError):
    """A class code is not part of the relevant hierarchy or model."""


class EmptyCorpus(DataError):
    """Vocabulary construction got no usable documents."""


class ShapeMismatch(DataError):
    """Paired inputs (features/labels, true/predicted) differ in length."""


class ModelUnusable(TaxorollError):
    """A model artifact is degenerate (e.g. an empty forest)."""


class EmptyMatrix(DataError):
    """Metrics requested on a confusion matrix with no entries."""


class MismatchedReports(DataError):
    """Reports being compared have different level or model."""


class ParseError(DataError):
    """A serialized artifact (e.g. N-Triples file) is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class IoError(DataError):
    """Filesystem problem while reading or writing an artifact."""


class Busy(TaxorollError):
    """An exclusive operation (retrain) is already in progress."""


class NoModel(TaxorollError):
    """No trained snapshot exists for the requested level/model."""


class UnknownRecord(DataError):
    """A record key does not exist in the current dataset."""


class SweepInvariantViolation(TaxorollError):
    """A sweep produced points violating a structural invariant."""
