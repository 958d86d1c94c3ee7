"""
PCA reduction and the binary file formats
=========================================

Feature corpora live in FVEC files (magic RKDN), PCA models in RKPC files,
MLPs in RKML, linear scorers in RKSV.  Every writer/reader pair is a
bit-exact round trip, so re-exported artifacts are byte identical.
"""

import os
import tempfile

import numpy as np

from rankdnn import (
    SyntheticSpec,
    fit_pca,
    generate_synthetic,
    load_pca,
    pca_transform,
    read_feature_set,
    save_pca,
    write_feature_set,
)

spec = SyntheticSpec(num_classes=10, per_class=30, dim=24,
                     center_scale=3.0, noise_sigma=1.0, seed=5)
features = generate_synthetic(spec)

with tempfile.TemporaryDirectory() as tmp:
    fvec = os.path.join(tmp, "corpus.fvec")
    write_feature_set(features, fvec)
    again = read_feature_set(fvec)
    print(f"fvec round trip: {os.path.getsize(fvec)} bytes, "
          f"bit-exact = {np.array_equal(features.vectors, again.vectors)}")

    # PCA: orthonormal rows, variances sorted descending, exact match
    # between explained_variance and the projected coordinate variances.
    pca = fit_pca(features.vectors, output_dim=8)
    projected = pca_transform(pca, features.vectors)
    gram = pca.components @ pca.components.T
    print(f"components orthonormal: {np.abs(gram - np.eye(8)).max():.2e}")
    print(f"variance match: "
          f"{np.abs(projected.var(axis=0, ddof=1) - pca.explained_variance).max():.2e}")
    kept = pca.explained_variance.sum() / features.vectors.var(axis=0, ddof=1).sum()
    print(f"variance kept at rank 8: {kept:.3f}")

    # Model files hold float32, so the first save quantizes the fit; from
    # then on save -> load -> save is byte identical.
    rkpc = os.path.join(tmp, "reduce.rkpc")
    save_pca(pca, rkpc)
    loaded = load_pca(rkpc)
    print(f"float32 quantization error: "
          f"{np.abs(pca.components - loaded.components).max():.2e}")
    rkpc2 = os.path.join(tmp, "reduce2.rkpc")
    save_pca(loaded, rkpc2)
    with open(rkpc, "rb") as a, open(rkpc2, "rb") as b:
        print(f"re-saved rkpc byte-identical = {a.read() == b.read()}")
