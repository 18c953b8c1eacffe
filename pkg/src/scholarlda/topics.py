"""Ranked topic-word summaries and prevalence over document subsets."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .corpus import Corpus, EncodedDoc
from .errors import EmptySelectionError
from .lda import TopicModel


@dataclass(frozen=True)
class TopicSummary:
    """Top words of one topic. ``label`` is a user-supplied annotation."""

    topic_id: int
    top_words: tuple[tuple[str, float], ...]
    mass_covered: float
    label: str | None = None


@dataclass(frozen=True)
class PrevalenceRanking:
    """All K topics ranked by token-weighted share within a scope."""

    entries: tuple[tuple[int, float], ...]
    scope: str

    def score_of(self, topic_id: int) -> float:
        for tid, score in self.entries:
            if tid == topic_id:
                return score
        raise KeyError(topic_id)


def top_words(model: TopicModel, topic: int, n: int) -> TopicSummary:
    """The n highest-probability terms of a topic, ties broken by term."""
    if not 0 <= topic < model.K:
        raise IndexError(f"topic {topic} out of range for K={model.K}")
    if not 1 <= n <= model.V:
        raise ValueError(f"n must be in [1, {model.V}], got {n}")
    row = model.phi[topic]
    terms = np.array(model.vocab.id_to_term)
    order = np.lexsort((terms, -row))[:n]
    pairs = tuple((str(terms[i]), float(row[i])) for i in order)
    # fsum keeps the reported mass independent of summation order; clamp the
    # last-ulp overshoot that an (almost) full row can produce
    mass = min(1.0, math.fsum(p for _, p in pairs))
    return TopicSummary(topic_id=topic, top_words=pairs, mass_covered=mass)


def prevalence_vector(model: TopicModel, corpus: Corpus, doc_indexes) -> np.ndarray:
    """Token-weighted mean of theta rows over the given documents.

    Uses exact (correctly rounded) summation so the result does not depend
    on document order.
    """
    doc_indexes = list(doc_indexes)
    weights = [len(corpus.docs[d].tokens) for d in doc_indexes]
    total = sum(weights)
    scores = np.empty(model.K, dtype=np.float64)
    for k in range(model.K):
        scores[k] = math.fsum(
            w * model.theta[d, k] for w, d in zip(weights, doc_indexes)
        ) / total
    return scores


def topic_prevalence(
    model: TopicModel,
    corpus: Corpus,
    doc_filter: Callable[[EncodedDoc], bool],
    scope: str = "custom",
) -> PrevalenceRanking:
    """Rank all topics by their token share among the documents matching
    ``doc_filter``. Ties are broken by ascending topic id."""
    selected = [doc.doc_index for doc in corpus.docs if doc_filter(doc)]
    if not selected:
        raise EmptySelectionError(f"no documents match filter ({scope})")
    scores = prevalence_vector(model, corpus, selected)
    order = np.lexsort((np.arange(model.K), -scores))
    entries = tuple((int(k), float(scores[k])) for k in order)
    return PrevalenceRanking(entries=entries, scope=scope)


def recommend_fields(
    model: TopicModel,
    corpus: Corpus,
    doc_filter: Callable[[EncodedDoc], bool],
    n: int,
    *,
    words_per_topic: int = 20,
    scope: str = "custom",
) -> list[TopicSummary]:
    """Top-n topics of the scope, each expanded into a word summary."""
    ranking = topic_prevalence(model, corpus, doc_filter, scope=scope)
    count = min(words_per_topic, model.V)
    return [top_words(model, tid, count) for tid, _ in ranking.entries[:n]]


def summaries_to_csv(summaries) -> str:
    """CSV with columns topic_id, rank, term, probability (rank is 1-based)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["topic_id", "rank", "term", "probability"])
    for summary in summaries:
        for rank, (term, prob) in enumerate(summary.top_words, start=1):
            writer.writerow([summary.topic_id, rank, term, repr(prob)])
    return buf.getvalue()
