"""Dataset scanning and image decoding.

Datasets use the class-folder layout: root/<class_name>/<image>, with
arbitrary nesting below the class folder.  Rows are ordered by the
relative POSIX path string, sorted ascending, so an export is a pure
function of the folder contents.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DatasetError

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


def scan_dataset(root) -> list[tuple[str, str]]:
    """Return (relative_posix_path, class_name) pairs sorted by path.

    The class of an image is the name of the top-level folder containing
    it.  Files directly under the root (no class folder) are ignored, as
    are extensions outside IMAGE_EXTENSIONS.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    entries: list[tuple[str, str]] = []
    for class_dir in root.iterdir():
        if not class_dir.is_dir():
            continue
        for path in class_dir.rglob("*"):
            if path.is_file() and path.suffix.lower() in IMAGE_EXTENSIONS:
                entries.append((path.relative_to(root).as_posix(),
                                class_dir.name))
    if not entries:
        raise DatasetError(
            f"no images under {root}; expected root/<class_name>/<image> "
            f"with extensions {IMAGE_EXTENSIONS}")
    entries.sort()
    return entries


def load_image(path, resolution: int) -> np.ndarray:
    """Decode one image to float32 (resolution, resolution, 3) in [0, 1].

    Decoding is eval-mode only: bilinear resize, no augmentation.  Raises
    whatever the decoder raises on undecodable input; the export loop
    turns that into a skip."""
    with Image.open(path) as img:
        rgb = img.convert("RGB").resize((resolution, resolution),
                                        Image.Resampling.BILINEAR)
        arr = np.asarray(rgb, dtype=np.float32)
    return arr / 255.0
