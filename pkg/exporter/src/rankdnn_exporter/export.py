"""Folder-to-FVEC export.

export_features walks a class-folder dataset in sorted-path order, runs
every decodable image through a frozen backbone in batches, and writes

  * the FVEC v1 feature file named by the manifest, and
  * a JSON sidecar at <out>.json recording provenance: backbone, dim,
    resolution, preprocessing constants, the class-name -> id mapping,
    one row entry per feature row (row index, path, class), and every
    skipped file with the reason.

Undecodable images are skipped with a warning and recorded; they never
shift the ordering of the surviving rows.  Repeated exports of an
unchanged folder produce byte-identical outputs.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backbones import Backbone, get_backbone, validate_resolution
from .errors import DatasetError, InvalidArgumentError
from .fvec import write_fvec
from .images import load_image, scan_dataset

SIDECAR_VERSION = 1


@dataclass(frozen=True)
class ExportManifest:
    """What to export: dataset root, backbone name, output path, knobs.

    class_to_id fixes the class-name -> id mapping; None derives it from
    the sorted class-folder names.  resolution of None uses the backbone's
    default.  The recorded sidecar always carries the realized mapping,
    resolution, and feature dim (which must equal the FVEC header dim)."""

    root: str | Path
    backbone: str
    out: str | Path
    resolution: int | None = None
    class_to_id: dict | None = None
    batch_size: int = 32


@dataclass(frozen=True)
class ExportResult:
    """Summary of one export; sidecar is the dict written to disk."""

    count: int
    dim: int
    fvec_path: Path
    sidecar_path: Path
    skipped: tuple
    sidecar: dict


def _resolve_classes(entries, mapping) -> dict:
    present = sorted({cls for _, cls in entries})
    if mapping is None:
        return {name: idx for idx, name in enumerate(present)}
    unmapped = [name for name in present if name not in mapping]
    if unmapped:
        raise DatasetError(
            f"class_to_id is missing classes found on disk: {unmapped}")
    return {name: int(mapping[name]) for name in sorted(mapping)}


def _forward_batches(backbone: Backbone, images, batch_size: int):
    rows = []
    for start in range(0, len(images), batch_size):
        batch = np.stack(images[start:start + batch_size])
        rows.append(backbone.forward(batch))
    return np.concatenate(rows, axis=0)


def export_features(manifest: ExportManifest) -> ExportResult:
    """Run the export described by the manifest; returns the summary."""
    if manifest.batch_size < 1:
        raise InvalidArgumentError("batch_size must be >= 1")
    backbone = get_backbone(manifest.backbone)
    resolution = (backbone.default_resolution if manifest.resolution is None
                  else manifest.resolution)
    validate_resolution(resolution)

    root = Path(manifest.root)
    entries = scan_dataset(root)
    class_to_id = _resolve_classes(entries, manifest.class_to_id)

    images, row_meta, skipped = [], [], []
    for rel_path, class_name in entries:
        try:
            images.append(load_image(root / rel_path, resolution))
        except (OSError, ValueError) as err:
            warnings.warn(f"skipping undecodable image {rel_path}: {err}")
            skipped.append({"path": rel_path, "error": str(err)})
            continue
        row_meta.append({"row": len(row_meta), "path": rel_path,
                         "class": class_name,
                         "class_id": class_to_id[class_name]})
    if not images:
        raise DatasetError(f"every image under {root} failed to decode")

    vectors = _forward_batches(backbone, images, manifest.batch_size)
    labels = np.array([meta["class_id"] for meta in row_meta], dtype=np.uint32)

    fvec_path = Path(manifest.out)
    write_fvec(fvec_path, vectors, labels)

    sidecar = {
        "format": "fvec-sidecar",
        "version": SIDECAR_VERSION,
        "backbone": backbone.name,
        "dim": int(vectors.shape[1]),
        "count": int(vectors.shape[0]),
        "resolution": resolution,
        "root": str(manifest.root),
        "preprocessing": {
            "mode": "eval",
            "resize": [resolution, resolution],
            "interpolation": "bilinear",
            "scale": "1/255",
            "mean": list(backbone.mean),
            "std": list(backbone.std),
        },
        "classes": class_to_id,
        "rows": row_meta,
        "skipped": skipped,
    }
    sidecar_path = fvec_path.with_name(fvec_path.name + ".json")
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return ExportResult(count=len(row_meta), dim=int(vectors.shape[1]),
                        fvec_path=fvec_path, sidecar_path=sidecar_path,
                        skipped=tuple(skipped), sidecar=sidecar)
