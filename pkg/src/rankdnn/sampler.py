"""Episode sampling and ranking-triplet construction.

An N-way K-shot episode holds K support vectors per class plus disjoint
query vectors.  A labeled triplet (query, support_i, support_j) gets label
+1 when support_i shares the query's class and support_j does not, and -1
for the swapped order; by default every +1 triplet is emitted together with
its mirrored -1 twin so labels stay balanced.

With anchors drawn from the support pool (the default), each anchor yields
exactly (N-1) * K * (K-1) positive triplets: (K-1) same-class positives
times (N-1)*K other-class negatives.  Query anchors are not excluded from
their own class, so there the count is (N-1) * K * K per anchor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .features import FeatureSet

ANCHOR_MODES = ("support", "query", "both")


@dataclass
class Episode:
    """Support vectors grouped by class, plus held-out queries."""

    support_features: np.ndarray   # (n_way, k_shot, dim)
    support_class_ids: np.ndarray  # (n_way,)
    query_features: np.ndarray     # (n_queries, dim)
    query_class_ids: np.ndarray    # (n_queries,)
    support_source_rows: np.ndarray  # rows in the source FeatureSet, (n_way, k_shot)
    query_source_rows: np.ndarray    # (n_queries,)

    @property
    def n_way(self) -> int:
        return self.support_features.shape[0]

    @property
    def k_shot(self) -> int:
        return self.support_features.shape[1]

    @property
    def dim(self) -> int:
        return self.support_features.shape[2]

    def support_pool(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (n_way * k_shot, dim) supports with per-row class slots."""
        flat = self.support_features.reshape(-1, self.dim)
        slots = np.repeat(np.arange(self.n_way), self.k_shot)
        return flat, slots


@dataclass
class LabeledTriplet:
    query: np.ndarray
    support_i: np.ndarray
    support_j: np.ndarray
    label: int  # +1 or -1
    # Pool indices for audits and text dumps: supports index the flattened
    # support pool; the anchor indexes that pool too, or the query list when
    # the anchor is a query (then query_anchor is True).
    query_idx: int = -1
    i_idx: int = -1
    j_idx: int = -1
    query_anchor: bool = False


def sample_episode(
    feature_set: FeatureSet,
    n_way: int,
    k_shot: int,
    n_queries: int = 0,
    seed: int | np.random.Generator = 0,
) -> Episode:
    """Uniformly choose n_way classes, then K support + disjoint query rows each.

    The n_queries total queries are spread over the chosen classes as evenly
    as possible (the first n_queries mod n_way classes get one extra).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    classes = feature_set.classes
    if n_way < 2 or n_way > len(classes):
        raise InvalidArgumentError(
            f"n_way must be in [2, {len(classes)}], got {n_way}"
        )
    if k_shot < 1 or n_queries < 0:
        raise InvalidArgumentError("k_shot must be >= 1 and n_queries >= 0")
    chosen = rng.choice(np.asarray(classes), size=n_way, replace=False)
    base, extra = divmod(n_queries, n_way)
    quotas = [base + (1 if c < extra else 0) for c in range(n_way)]
    sup_rows = np.empty((n_way, k_shot), dtype=np.int64)
    query_rows: list[np.ndarray] = []
    for slot, (class_id, quota) in enumerate(zip(chosen, quotas)):
        rows = feature_set.class_index[int(class_id)]
        need = k_shot + quota
        if len(rows) < need:
            raise InvalidArgumentError(
                f"class {int(class_id)} has {len(rows)} samples, needs {need}"
            )
        picked = rng.choice(rows, size=need, replace=False)
        sup_rows[slot] = picked[:k_shot]
        query_rows.append(picked[k_shot:])
    q_rows = np.concatenate(query_rows) if n_queries else np.empty(0, dtype=np.int64)
    return Episode(
        support_features=feature_set.vectors[sup_rows],
        support_class_ids=chosen.astype(np.int64),
        query_features=feature_set.vectors[q_rows],
        query_class_ids=feature_set.labels[q_rows],
        support_source_rows=sup_rows,
        query_source_rows=q_rows,
    )


def _anchor_views(episode: Episode, anchors: str):
    """Yields (anchor_vector, anchor_slot, anchor_idx, is_query, own_pool_idx)."""
    pool, slots = episode.support_pool()
    if anchors in ("support", "both"):
        for idx in range(pool.shape[0]):
            yield pool[idx], int(slots[idx]), idx, False, idx
    if anchors in ("query", "both"):
        slot_of_class = {int(c): s for s, c in enumerate(episode.support_class_ids)}
        for idx in range(episode.query_features.shape[0]):
            slot = slot_of_class[int(episode.query_class_ids[idx])]
            yield episode.query_features[idx], slot, idx, True, -1


def build_training_triplets(
    episode: Episode,
    seed: int | np.random.Generator | None = 0,
    balanced: bool = True,
    anchors: str = "support",
) -> list[LabeledTriplet]:
    """Enumerate every (anchor, positive, negative) triplet, then shuffle.

    Positives are same-class supports (excluding the anchor itself when it is
    a support), negatives are all other-class supports.  balanced=True also
    emits the mirrored -1 triplet for every +1 one.  Pass seed=None to keep
    enumeration order.
    """
    if anchors not in ANCHOR_MODES:
        raise InvalidArgumentError(f"anchors must be one of {ANCHOR_MODES}")
    if episode.k_shot < 2:
        raise InvalidArgumentError("triplet construction needs k_shot >= 2")
    pool, slots = episode.support_pool()
    triplets: list[LabeledTriplet] = []
    for anchor, slot, anchor_idx, is_query, own_idx in _anchor_views(episode, anchors):
        positives = np.flatnonzero(slots == slot)
        positives = positives[positives != own_idx]
        negatives = np.flatnonzero(slots != slot)
        for p in positives:
            for n in negatives:
                triplets.append(
                    LabeledTriplet(
                        anchor, pool[p], pool[n], +1,
                        anchor_idx, int(p), int(n), is_query,
                    )
                )
                if balanced:
                    triplets.append(
                        LabeledTriplet(
                            anchor, pool[n], pool[p], -1,
                            anchor_idx, int(n), int(p), is_query,
                        )
                    )
    if seed is not None:
        rng = (
            seed if isinstance(seed, np.random.Generator)
            else np.random.default_rng(seed)
        )
        order = rng.permutation(len(triplets))
        triplets = [triplets[k] for k in order]
    return triplets


def build_finetune_triplets(
    episode: Episode, seed: int | np.random.Generator | None = 0
) -> list[LabeledTriplet]:
    """Support-anchored balanced triplets for episode fine-tuning.

    Every one of the N*K supports anchors (K-1)*(N-1)*K positives plus the
    mirrored negatives; 5-way 5-shot gives 2000 + 2000.  Needs k_shot >= 2.
    """
    if episode.k_shot < 2:
        raise InvalidArgumentError("fine-tuning needs k_shot >= 2 (no 1-shot)")
    return build_training_triplets(episode, seed, balanced=True, anchors="support")


def sample_triplet_batch(
    episode: Episode,
    size: int,
    rng: np.random.Generator,
    anchors: str = "support",
    balanced: bool = True,
):
    """Draw `size` random triplets directly, without full enumeration.

    Anchors are uniform over the pool(s); each draw picks one same-class
    positive and one other-class negative uniformly.  With balanced=True the
    orientation of each triplet is randomized, so labels are +-1 balanced in
    expectation.  Returns (queries, supports_i, supports_j, labels) arrays.
    """
    if anchors not in ANCHOR_MODES:
        raise InvalidArgumentError(f"anchors must be one of {ANCHOR_MODES}")
    if size < 1:
        raise InvalidArgumentError("size must be >= 1")
    if episode.k_shot < 2:
        raise InvalidArgumentError("triplet sampling needs k_shot >= 2")
    pool, slots = episode.support_pool()
    n_support = pool.shape[0]
    n_query = episode.query_features.shape[0]
    if anchors == "support":
        anchor_count = n_support
    elif anchors == "query":
        anchor_count = n_query
    else:
        anchor_count = n_support + n_query
    if anchor_count == 0:
        raise InvalidArgumentError("episode has no anchors for this mode")

    slot_of_class = {int(c): s for s, c in enumerate(episode.support_class_ids)}
    anchor_ids = rng.integers(0, anchor_count, size=size)
    queries = np.empty((size, episode.dim))
    sup_i = np.empty((size, episode.dim))
    sup_j = np.empty((size, episode.dim))
    labels = np.ones(size, dtype=np.int64)
    flip = rng.integers(0, 2, size=size) if balanced else np.zeros(size, dtype=int)
    for t in range(size):
        a = int(anchor_ids[t])
        if anchors == "query" or (anchors == "both" and a >= n_support):
            q_idx = a - (n_support if anchors == "both" else 0)
            anchor = episode.query_features[q_idx]
            slot = slot_of_class[int(episode.query_class_ids[q_idx])]
            same = np.flatnonzero(slots == slot)
        else:
            anchor = pool[a]
            slot = int(slots[a])
            same = np.flatnonzero(slots == slot)
            same = same[same != a]
        other = np.flatnonzero(slots != slot)
        p = same[rng.integers(0, len(same))]
        n = other[rng.integers(0, len(other))]
        queries[t] = anchor
        if flip[t]:
            sup_i[t], sup_j[t], labels[t] = pool[n], pool[p], -1
        else:
            sup_i[t], sup_j[t] = pool[p], pool[n]
    return queries, sup_i, sup_j, labels


def triplets_to_arrays(triplets: list[LabeledTriplet]):
    """Stack a triplet list into (queries, supports_i, supports_j, labels)."""
    if not triplets:
        raise InvalidArgumentError("no triplets given")
    queries = np.stack([t.query for t in triplets])
    sup_i = np.stack([t.support_i for t in triplets])
    sup_j = np.stack([t.support_j for t in triplets])
    labels = np.array([t.label for t in triplets], dtype=np.int64)
    return queries, sup_i, sup_j, labels


def dump_triplets(triplets: list[LabeledTriplet], path) -> None:
    """Debug dump, one `anchor_idx i_idx j_idx label` line per triplet."""
    with open(path, "w") as fh:
        for t in triplets:
            fh.write(f"{t.query_idx} {t.i_idx} {t.j_idx} {t.label}\n")
