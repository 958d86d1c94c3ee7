"""
Per-episode fine-tuning
=======================

With K >= 2 shots the supports of a single test episode yield labeled
triplets of their own, so a clone of the meta-trained ranker can take a few
SGD steps on them before classifying the queries.  The base model is never
mutated; every episode fine-tunes a fresh copy.
"""

import dataclasses
import numpy as np

from rankdnn import (
    build_finetune_triplets,
    fast_variant,
    evaluate,
    meta_train,
    moderate,
    resolve_data,
    sample_episode,
)

config = fast_variant(moderate(), iterations=600, episodes=60)
ranker = meta_train(config)

# A 5-way 5-shot episode enumerates 2000 positive and 2000 negative
# support-only triplets: 25 anchors x (N-1)K(K-1) = 25 x 80 positives.
_, _, test_set = resolve_data(config)
episode = sample_episode(ranker.transform_set(test_set), n_way=5, k_shot=5,
                         n_queries=5, seed=3)
triplets = build_finetune_triplets(episode)
labels = np.array([t.label for t in triplets])
print(f"fine-tune corpus: {np.sum(labels > 0)} positive, "
      f"{np.sum(labels < 0)} negative triplets")

# Same trained ranker, same episodes, with and without fine-tuning.
plain = evaluate(ranker, dataclasses.replace(config, finetune=False))
tuned = evaluate(ranker, dataclasses.replace(config, finetune=True))
print(f"no fine-tune   {plain.mean_accuracy:.4f} +- {plain.ci95:.4f}")
print(f"fine-tuned     {tuned.mean_accuracy:.4f} +- {tuned.ci95:.4f}")
print(f"delta          {tuned.mean_accuracy - plain.mean_accuracy:+.4f}")
