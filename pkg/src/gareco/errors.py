"""Exception types shared across the toolkit."""


class GarecoError(Exception):
    """Base class for all toolkit errors."""


class CorpusValidationError(GarecoError):
    """One or more corpus records failed validation.

    `errors` holds one human-readable message per offending record/field.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        summary = "; ".join(self.errors[:5])
        if len(self.errors) > 5:
            summary += f"; ... ({len(self.errors)} errors total)"
        super().__init__(summary)


class UnbalancedTokenError(GarecoError):
    """A special-token span (<MATH>/<NOTE>/<TAG>) has no matching delimiter."""


class NoGroundTruthError(GarecoError):
    """The paper carries no annotation usable as ground truth under the policy."""


class EmbeddingFormatError(GarecoError):
    """Embedding file violates the on-disk format or its invariants."""


class ZeroNormError(GarecoError):
    """A vector with zero norm was used where a direction is required."""


class DimensionMismatchError(GarecoError):
    """Two vectors of different dimension were combined."""


class MissingEmbeddingError(GarecoError):
    """A required embedding key is absent from the store."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"missing embedding for key '{key}'")
