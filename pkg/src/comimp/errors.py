"""Exception hierarchy shared across the package."""


class ComimpError(Exception):
    """Base class for all errors raised by this package."""


class UnknownTarget(ComimpError):
    """A matrix carries a feature that is absent from the alignment target."""


class SchemaMismatch(ComimpError):
    """Matrices or files disagree on their feature schema."""


class LabelKindMismatch(ComimpError):
    """Label vectors cannot be stacked (differing kind or name)."""


class AllMissingColumn(ComimpError):
    """A column has no observed cell, so nothing can be imputed from it."""


class NonFinite(ComimpError):
    """A numeric routine produced or encountered non-finite values."""


class HasMissing(ComimpError):
    """An operation that requires fully observed data received masked cells."""


class DegenerateRank(ComimpError):
    """A requested PCA rank exceeds what the data can support."""


class ShapeMismatch(ComimpError):
    """Array or feature dimensions do not line up."""


class RankDeficient(ComimpError):
    """The regression design matrix is numerically singular."""


class SingleClass(ComimpError):
    """Classification requires at least two distinct labels."""


class CsvSchemaError(ComimpError):
    """A CSV file violates the expected tabular schema."""


class StudyError(ComimpError):
    """A benchmark repeat failed; carries the failing repeat index."""

    def __init__(self, repeat: int, message: str):
        super().__init__(f"repeat {repeat}: {message}")
        self.repeat = repeat
