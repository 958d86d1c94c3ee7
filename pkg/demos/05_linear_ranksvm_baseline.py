"""
Linear RankSVM baseline vs the ranking MLP
==========================================

The baseline trains a linear scorer with the pairwise hinge loss (Pegasos
subgradient steps) on the same encoded triplets the MLP sees.  On linearly
separable feature geometry it is essentially perfect; on the mirrored-scale
task the class signal lives in the magnitude bands of a bilinear form, the
sign carries nothing, and a bias-free linear scorer cannot do better than
chance while the MLP reads the bands with two hidden thresholds.
"""

import dataclasses

from rankdnn import (
    evaluate,
    fast_variant,
    meta_train,
    train_svm,
    well_separated,
    xor,
)

# Separable geometry first: the linear baseline is at home.
easy = fast_variant(well_separated(), iterations=300, episodes=80)
easy = dataclasses.replace(easy, svm_triplets=4000)
svm_easy = evaluate(train_svm(easy))
print(f"separable task, linear RankSVM: {svm_easy.mean_accuracy:.4f}")

# The mirrored-scale task: same pipeline, same encoded features.
hard = fast_variant(xor(), iterations=2500, episodes=80)
hard = dataclasses.replace(hard, svm_triplets=8000)
mlp_report = evaluate(meta_train(hard))
svm_report = evaluate(train_svm(hard))
print(f"mirrored task, ranking MLP:     {mlp_report.mean_accuracy:.4f}")
print(f"mirrored task, linear RankSVM:  {svm_report.mean_accuracy:.4f}")
print(f"margin: {100 * (mlp_report.mean_accuracy - svm_report.mean_accuracy):+.1f} points")
