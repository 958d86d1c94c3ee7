"""Shared fixtures: deterministic toy image folders."""

import numpy as np
import pytest
from PIL import Image

# Per-class tints keep the toy classes linearly distinguishable even
# through a random-projection backbone.
_TINTS = {"cat": (90, 30, 30), "dog": (30, 30, 90)}


def make_toy_dataset(root, per_class=10, size=32, seed=0):
    rng = np.random.default_rng(seed)
    for cls, tint in _TINTS.items():
        class_dir = root / cls
        class_dir.mkdir(parents=True)
        for index in range(per_class):
            noise = rng.integers(0, 120, size=(size, size, 3))
            arr = np.clip(noise + np.array(tint), 0, 255).astype(np.uint8)
            Image.fromarray(arr, "RGB").save(class_dir / f"img_{index:02d}.png")
    return root


@pytest.fixture()
def toy_dataset(tmp_path):
    return make_toy_dataset(tmp_path / "toy")
