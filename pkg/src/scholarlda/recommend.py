"""Topic-overlap scoring of entities (authors or venues) against a target.

An entity's profile counts how often each topic appears among its
documents' member topics. Against a target topic set the entity scores

    score = (sum over target topics of count(t) / item_count)
            * |target intersect entity topics|

so an entity is rewarded both for how much of its output touches the target
topics and for how broadly it covers them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .corpus import Corpus
from .errors import UnknownEntityError
from .lda import TopicModel

MembershipRule = Callable[[np.ndarray], Iterable[int]]


def top_m_rule(m: int) -> MembershipRule:
    """A document's member topics are its m most probable ones (ties to the
    lower topic id)."""
    if m < 1:
        raise ValueError("m must be >= 1")

    def rule(theta_row: np.ndarray):
        order = np.lexsort((np.arange(theta_row.shape[0]), -theta_row))
        return [int(k) for k in order[: min(m, theta_row.shape[0])]]

    return rule


def threshold_rule(threshold: float) -> MembershipRule:
    """A document's member topics are all with probability >= threshold."""

    def rule(theta_row: np.ndarray):
        return [int(k) for k in np.flatnonzero(theta_row >= threshold)]

    return rule


@dataclass(frozen=True)
class EntityProfile:
    """Aggregated topic occurrences over an entity's documents."""

    entity_id: str
    item_topics: Mapping[int, int]
    item_count: int
    topic_set: frozenset[int]

    def __post_init__(self):
        if self.item_count < 1:
            raise ValueError("item_count must be >= 1")
        if self.topic_set != frozenset(t for t, c in self.item_topics.items() if c >= 1):
            raise ValueError("topic_set must be the support of item_topics")

    @classmethod
    def from_counts(cls, entity_id: str, counts: Mapping[int, int], item_count: int) -> "EntityProfile":
        counts = {int(t): int(c) for t, c in counts.items() if c >= 1}
        return cls(
            entity_id=entity_id,
            item_topics=counts,
            item_count=item_count,
            topic_set=frozenset(counts),
        )


@dataclass(frozen=True)
class TargetTopics:
    topic_ids: frozenset[int]

    @classmethod
    def of(cls, ids: Iterable[int]) -> "TargetTopics":
        return cls(topic_ids=frozenset(int(i) for i in ids))


@dataclass(frozen=True)
class RankedRecommendation:
    """Entities ordered by score, ties broken by ascending entity id."""

    entries: tuple[tuple[str, float], ...]


def entity_profile(
    model: TopicModel,
    corpus: Corpus,
    entity_id: str,
    membership_rule: MembershipRule,
    *,
    entity_kind: str = "author",
) -> EntityProfile:
    """Build the profile of one entity from its documents' theta rows.

    ``entity_kind`` selects how documents attach to the entity: "author"
    matches ``entity_id`` against the documents' author references, "venue"
    against the venue field.
    """
    if entity_kind == "author":
        docs = [doc for doc in corpus.docs if entity_id in doc.entity_refs]
    elif entity_kind == "venue":
        docs = [doc for doc in corpus.docs if doc.venue == entity_id]
    else:
        raise ValueError(f"unknown entity_kind {entity_kind!r}")
    if not docs:
        raise UnknownEntityError(f"no documents for {entity_kind} {entity_id!r}")

    counts: dict[int, int] = {}
    for doc in docs:
        for topic in membership_rule(model.theta[doc.doc_index]):
            counts[topic] = counts.get(topic, 0) + 1
    return EntityProfile.from_counts(entity_id, counts, item_count=len(docs))


def score_entity(target: TargetTopics, profile: EntityProfile) -> float:
    """Overlap-weighted frequency score of one profile against the target."""
    hits = sum(profile.item_topics.get(t, 0) for t in target.topic_ids)
    overlap = len(target.topic_ids & profile.topic_set)
    return (hits / profile.item_count) * overlap


def rank_entities(target: TargetTopics, profiles: Iterable[EntityProfile]) -> RankedRecommendation:
    """Score every profile and rank; zero-score entities are kept so callers
    can tell "scored zero" from "absent"."""
    if not target.topic_ids:
        raise ValueError("target topic set is empty")
    scored = [(profile.entity_id, score_entity(target, profile)) for profile in profiles]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return RankedRecommendation(entries=tuple(scored))


def ranking_to_csv(ranking: RankedRecommendation) -> str:
    """CSV with columns entity_id, score, rank (rank is 1-based)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["entity_id", "score", "rank"])
    for rank, (entity_id, score) in enumerate(ranking.entries, start=1):
        writer.writerow([entity_id, repr(score), rank])
    return buf.getvalue()
