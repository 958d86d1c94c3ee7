"""Ranking-vote inference over class prototypes, with optional fine-tuning.

For an N-way episode the K support vectors per class are averaged into one
prototype each (default).  A query is classified by scoring every ordered
prototype pair (a, b), a != b: when the ranker says "a is more relevant than
b" with probability strictly above 0.5, class a gains one point.  The
predicted class is the argmax of the points, ties broken toward the lowest
index.  That is N*(N-1) ranker rows per query (20 for 5-way) instead of the
N*K*(N*K-1) rows (600 for 5-way 5-shot) needed without averaging.

The scorer can be an MlpModel, an SvmModel, or any callable mapping a matrix
of encoded triplets to per-row probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import EncodingScheme, encode_triplet_batch
from .errors import InvalidArgumentError
from .mlp import MlpModel, clone_mlp, forward, train_step
from .ranksvm import SvmModel, svm_decide
from .sampler import Episode, build_finetune_triplets, triplets_to_arrays


@dataclass
class FinetuneConfig:
    """Episode fine-tuning: a fresh clone trains on support-only triplets."""

    iterations: int = 100
    batch_size: int = 100
    learning_rate: float = 0.01
    seed: int = 0


@dataclass
class VoteResult:
    scores: np.ndarray   # points per candidate
    predicted: int       # argmax index, lowest index wins ties
    outcomes: list[tuple[int, int, bool]]  # (a, b, decision) per ordered pair


def class_prototypes(episode: Episode) -> tuple[np.ndarray, np.ndarray]:
    """Mean of the K supports per class; returns (prototypes, class_ids)."""
    return episode.support_features.mean(axis=1), episode.support_class_ids


def _decision_probs(model, scheme: EncodingScheme, encoded: np.ndarray) -> np.ndarray:
    if isinstance(model, MlpModel):
        return forward(model, encoded)
    if isinstance(model, SvmModel):
        # Map the signed decision onto the probability convention: +1 -> 1.0.
        return (svm_decide(model, encoded) > 0).astype(np.float64)
    if callable(model):
        return np.asarray(model(encoded), dtype=np.float64)
    raise InvalidArgumentError(f"unsupported scorer type {type(model)!r}")


def _ordered_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = a != b
    return a[keep], b[keep]


def rank_vote(model, scheme: EncodingScheme, query, candidates) -> VoteResult:
    """Score one query against every ordered candidate pair."""
    query = np.asarray(query, dtype=np.float64)
    candidates = np.asarray(candidates, dtype=np.float64)
    if candidates.ndim != 2 or candidates.shape[0] < 2:
        raise InvalidArgumentError("need at least two candidates")
    if query.ndim != 1 or query.shape[0] != candidates.shape[1]:
        raise InvalidArgumentError("query dim must match candidate dim")
    a_idx, b_idx = _ordered_pairs(candidates.shape[0])
    queries = np.broadcast_to(query, (a_idx.size, query.shape[0]))
    encoded = encode_triplet_batch(
        scheme, queries, candidates[a_idx], candidates[b_idx]
    )
    positive = _decision_probs(model, scheme, encoded) > 0.5
    scores = np.bincount(a_idx[positive], minlength=candidates.shape[0])
    outcomes = [
        (int(a), int(b), bool(p)) for a, b, p in zip(a_idx, b_idx, positive)
    ]
    return VoteResult(scores, int(np.argmax(scores)), outcomes)


def _finetuned_clone(model: MlpModel, episode: Episode, cfg: FinetuneConfig):
    if episode.k_shot < 2:
        raise InvalidArgumentError("fine-tuning needs k_shot >= 2 (no 1-shot)")
    if not isinstance(model, MlpModel):
        raise InvalidArgumentError("fine-tuning requires an MlpModel scorer")
    rng = np.random.default_rng(cfg.seed)
    work = clone_mlp(model, learning_rate=cfg.learning_rate)
    triplets = build_finetune_triplets(episode, seed=None)
    q, si, sj, labels = triplets_to_arrays(triplets)
    y01 = (labels + 1) // 2  # ranking labels +-1 -> BCE targets {1, 0}
    return work, (q, si, sj, y01), rng


def finetune_episode(model: MlpModel, scheme: EncodingScheme, episode: Episode,
                     cfg: FinetuneConfig) -> MlpModel:
    """Return a fine-tuned clone; the input model is never touched."""
    work, (q, si, sj, y01), rng = _finetuned_clone(model, episode, cfg)
    total = q.shape[0]
    for _ in range(cfg.iterations):
        take = min(cfg.batch_size, total)
        rows = rng.choice(total, size=take, replace=False)
        batch = encode_triplet_batch(scheme, q[rows], si[rows], sj[rows])
        train_step(work, batch, y01[rows])
    return work


def classify_episode(
    model,
    scheme: EncodingScheme,
    episode: Episode,
    finetune: FinetuneConfig | None = None,
    average: bool = True,
    return_votes: bool = False,
):
    """Classify every query in the episode; returns (predictions, accuracy).

    With average=True candidates are the N class prototypes; otherwise all
    N*K supports vote individually and each class sums its members' points.
    With a FinetuneConfig the scorer is a fine-tuned clone (k_shot >= 2);
    the base model is never mutated.
    """
    if episode.query_features.shape[0] == 0:
        raise InvalidArgumentError("episode has no queries to classify")
    scorer = model
    if finetune is not None:
        scorer = finetune_episode(model, scheme, episode, finetune)

    if average:
        candidates, _ = class_prototypes(episode)
        candidate_slot = np.arange(episode.n_way)
    else:
        candidates, candidate_slot = episode.support_pool()

    n_cand = candidates.shape[0]
    a_idx, b_idx = _ordered_pairs(n_cand)
    n_queries = episode.query_features.shape[0]
    # One batched pass: every query against every ordered candidate pair.
    queries = np.repeat(episode.query_features, a_idx.size, axis=0)
    cand_a = np.tile(candidates[a_idx], (n_queries, 1))
    cand_b = np.tile(candidates[b_idx], (n_queries, 1))
    encoded = encode_triplet_batch(scheme, queries, cand_a, cand_b)
    positive = (_decision_probs(scorer, scheme, encoded) > 0.5).reshape(
        n_queries, a_idx.size
    )

    predictions = np.empty(n_queries, dtype=np.int64)
    vote_results = []
    for qi in range(n_queries):
        cand_scores = np.bincount(a_idx[positive[qi]], minlength=n_cand)
        class_scores = np.bincount(
            candidate_slot, weights=cand_scores, minlength=episode.n_way
        ).astype(np.int64)
        predictions[qi] = episode.support_class_ids[int(np.argmax(class_scores))]
        if return_votes:
            outcomes = [
                (int(a), int(b), bool(p))
                for a, b, p in zip(a_idx, b_idx, positive[qi])
            ]
            vote_results.append(
                VoteResult(class_scores, int(np.argmax(class_scores)), outcomes)
            )
    accuracy = float(np.mean(predictions == episode.query_class_ids))
    if return_votes:
        return predictions, accuracy, vote_results
    return predictions, accuracy
