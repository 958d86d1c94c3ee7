"""Export image-folder datasets to .fvec feature files with frozen backbones.

The bridge between image folders and the feature-file consumers: pick a
backbone, point at a root/<class_name>/<image> tree, get a labeled FVEC v1
file plus a JSON sidecar mapping every row back to its source path.
"""

from .backbones import (
    BACKBONE_NAMES,
    Backbone,
    get_backbone,
    init_cnn_weights,
    weights_dir,
)
from .errors import (
    DatasetError,
    ExporterError,
    InvalidArgumentError,
    MissingWeightsError,
    WeightsFormatError,
)
from .export import ExportManifest, ExportResult, export_features
from .fvec import write_fvec
from .images import IMAGE_EXTENSIONS, load_image, scan_dataset

__version__ = "0.1.0"

__all__ = [
    "BACKBONE_NAMES",
    "Backbone",
    "DatasetError",
    "ExportManifest",
    "ExportResult",
    "ExporterError",
    "IMAGE_EXTENSIONS",
    "InvalidArgumentError",
    "MissingWeightsError",
    "WeightsFormatError",
    "export_features",
    "get_backbone",
    "init_cnn_weights",
    "load_image",
    "scan_dataset",
    "weights_dir",
    "write_fvec",
]
