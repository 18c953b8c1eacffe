"""Per-venue, per-year topic probability series and trend direction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .corpus import Corpus
from .errors import EmptySelectionError, UnknownVenueError, YearNotInSeriesError
from .lda import TopicModel
from .topics import prevalence_vector

# absolute probability change below which a topic counts as flat
DEFAULT_EPSILON = 0.001

Direction = Literal["rising", "falling", "flat"]


@dataclass(frozen=True, eq=False)
class TrendSeries:
    """Year-by-topic probability matrix for one venue.

    Each row is the topic prevalence over that venue-year's documents and
    sums to 1; years are strictly increasing and only years with at least
    one dated document appear.
    """

    venue: str
    years: tuple[int, ...]
    values: np.ndarray  # len(years) x K

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def year_row(self, year: int) -> np.ndarray:
        try:
            return self.values[self.years.index(year)]
        except ValueError:
            raise YearNotInSeriesError(f"{self.venue}: no data for year {year}") from None


@dataclass(frozen=True)
class TrendVerdict:
    topic_id: int
    from_year: int
    to_year: int
    direction: Direction
    delta: float


def topic_year_series(model: TopicModel, corpus: Corpus, venue: str) -> TrendSeries:
    """Prevalence-per-year matrix for one venue.

    Documents without a year are ignored; years with no documents are
    omitted from the series rather than interpolated.
    """
    venue_docs = [doc for doc in corpus.docs if doc.venue == venue]
    if not venue_docs:
        raise UnknownVenueError(f"no documents for venue {venue!r}")
    by_year: dict[int, list[int]] = {}
    for doc in venue_docs:
        if doc.year is not None:
            by_year.setdefault(doc.year, []).append(doc.doc_index)
    if not by_year:
        raise EmptySelectionError(f"venue {venue!r} has no documents with a year")

    years = tuple(sorted(by_year))
    values = np.vstack([prevalence_vector(model, corpus, by_year[y]) for y in years])
    return TrendSeries(venue=venue, years=years, values=values)


def trend_direction(
    series: TrendSeries,
    topic: int,
    from_year: int,
    to_year: int,
    *,
    epsilon: float = DEFAULT_EPSILON,
) -> TrendVerdict:
    """Classify the probability change of a topic between two years."""
    if not 0 <= topic < series.K:
        raise IndexError(f"topic {topic} out of range for K={series.K}")
    delta = float(series.year_row(to_year)[topic] - series.year_row(from_year)[topic])
    if delta > epsilon:
        direction: Direction = "rising"
    elif delta < -epsilon:
        direction = "falling"
    else:
        direction = "flat"
    return TrendVerdict(
        topic_id=topic, from_year=from_year, to_year=to_year, direction=direction, delta=delta
    )


def top_topics_per_year(series: TrendSeries, year: int, n: int) -> tuple[tuple[int, float], ...]:
    """The n most probable topics of one year, ties to the lower topic id."""
    row = series.year_row(year)
    order = np.lexsort((np.arange(series.K), -row))[:n]
    return tuple((int(k), float(row[k])) for k in order)


def series_to_csv(series: TrendSeries) -> str:
    """CSV with columns venue, year, topic_id, probability."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["venue", "year", "topic_id", "probability"])
    for row_index, year in enumerate(series.years):
        for k in range(series.K):
            writer.writerow([series.venue, year, k, repr(float(series.values[row_index, k]))])
    return buf.getvalue()
