"""
Ranking-vote inference, one episode at a time
=============================================

A query is classified by scoring every ordered pair of class prototypes:
each time the ranker prefers prototype a over prototype b, class a gains a
point.  N prototypes give N*(N-1) ordered pairs, so a 5-way episode costs 20
ranker rows per query.
"""

import numpy as np

from rankdnn import (
    class_prototypes,
    fast_variant,
    meta_train,
    rank_vote,
    resolve_data,
    sample_episode,
    well_separated,
)

config = fast_variant(well_separated(), iterations=400, episodes=1)
ranker = meta_train(config)

# Build one 5-way 1-shot episode from the held-out test classes, in the
# ranker's PCA space.
_, _, test_set = resolve_data(config)
episode = sample_episode(ranker.transform_set(test_set), n_way=5, k_shot=1,
                         n_queries=3, seed=7)
prototypes, class_ids = class_prototypes(episode)
print("episode classes:", class_ids)

for qi in range(episode.query_features.shape[0]):
    result = rank_vote(ranker.model, ranker.scheme,
                       episode.query_features[qi], prototypes)
    true_id = int(episode.query_class_ids[qi])
    pred_id = int(class_ids[result.predicted])
    wins = {int(class_ids[a]): int(s) for a, s in enumerate(result.scores)}
    mark = "ok " if pred_id == true_id else "MISS"
    print(f"query {qi}: true {true_id:3d}  predicted {pred_id:3d}  {mark} "
          f"votes {wins}")

# The vote outcomes list every ordered-pair decision; with N candidates the
# list has exactly N*(N-1) entries and each unordered pair splits 1-0.
result = rank_vote(ranker.model, ranker.scheme,
                   episode.query_features[0], prototypes)
print(f"\nordered pairs scored: {len(result.outcomes)} "
      f"(N*(N-1) = {5 * 4}), total points {int(np.sum(result.scores))}")
