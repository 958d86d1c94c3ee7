"""Exception types shared across the package."""


class RankError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(RankError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedSchemeError(InvalidArgumentError):
    """The requested encoding scheme cannot encode this kind of input."""


class DegenerateDataError(RankError):
    """The input data carries no usable signal (e.g. zero variance)."""


class FormatError(RankError):
    """A serialized artifact has a malformed header field."""

    def __init__(self, field, detail=""):
        self.field = field
        message = f"bad '{field}' field"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class TruncationError(FormatError):
    """A serialized artifact is shorter than its header promises."""

    def __init__(self, expected_bytes, actual_bytes):
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes
        self.field = "payload"
        RankError.__init__(
            self, f"expected {expected_bytes} bytes, found {actual_bytes}"
        )


class TrainingDivergedError(RankError):
    """Training produced non-finite values; carries the offending layer index."""

    def __init__(self, layer_index, detail="non-finite values"):
        self.layer_index = layer_index
        self.detail = detail
        super().__init__(f"affine layer {layer_index}: {detail}")
