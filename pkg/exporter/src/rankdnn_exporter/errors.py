"""Exporter exception hierarchy."""


class ExporterError(Exception):
    """Base class for every error this package raises on purpose."""


class MissingWeightsError(ExporterError):
    """A file-backed backbone was requested but its checkpoint is absent."""


class WeightsFormatError(ExporterError):
    """A checkpoint file exists but does not match the documented schema."""


class DatasetError(ExporterError):
    """The dataset folder is unusable (missing, empty, or unmapped class)."""


class InvalidArgumentError(ExporterError):
    """A caller-supplied value is out of range or malformed."""
