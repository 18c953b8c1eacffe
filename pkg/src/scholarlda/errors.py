"""Exception types shared across the package."""


class ScholarLdaError(Exception):
    """Base class for every error this package raises deliberately."""


class RecordLoadError(ScholarLdaError):
    """An input file could not be parsed into records.

    Collects every bad row so callers see all problems at once instead of
    fixing them one re-run at a time.
    """

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)  # (line_number, reason) pairs
        detail = "; ".join(f"line {n}: {reason}" for n, reason in self.problems)
        super().__init__(f"{self.path}: {detail}")


class EmptyCorpusError(ScholarLdaError):
    """Every document was dropped (or none were supplied)."""


class FileFormatError(ScholarLdaError):
    """A corpus or model file is malformed or violates its schema."""


class IncompatibleVocabularyError(ScholarLdaError):
    """Held-out corpus vocabulary does not match the model's vocabulary."""


class FingerprintMismatchError(ScholarLdaError):
    """The corpus on disk is not the corpus the model was trained on."""


class EmptySelectionError(ScholarLdaError):
    """A document filter matched nothing."""


class UnknownVenueError(ScholarLdaError):
    """No document in the corpus belongs to the requested venue."""


class UnknownEntityError(ScholarLdaError):
    """No document in the corpus belongs to the requested entity."""


class YearNotInSeriesError(ScholarLdaError):
    """A trend query named a year the series has no data for."""


class CountInvariantError(ScholarLdaError):
    """Sampler bookkeeping became inconsistent; a bug, not bad input."""
