"""Exception hierarchy shared by every xq module.

The CLI maps these onto exit codes: weight/usage problems exit 1, data and
model validation problems exit 2, external-protocol problems exit 3.
"""


class XQError(Exception):
    """Base class for all engine errors."""


class DataError(XQError):
    """Dataset ingestion or validation failure (ragged rows, missing values,
    unknown columns, malformed chunk specs)."""


class UndefinedCorrelationError(DataError):
    """Pearson correlation requested against a zero-variance column."""


class ModelError(XQError):
    """Predictor contract violation: rank-deficient fit, signature mismatch,
    non-finite prediction."""


class WeightError(XQError):
    """Invalid weight vector (negative entries or sum != 1)."""


class ProtocolError(XQError):
    """External-model line protocol violation; the message cites the
    offending line."""


class PurityViolationError(ProtocolError):
    """An external model returned different answers for identical batches."""
