"""Topic mining for scholarly corpora.

Train LDA by collapsed Gibbs sampling on publication titles+abstracts,
summarize topics as ranked word lists, compute per-venue temporal topic
trends, and rank entities against a target topic set by overlap-weighted
frequency.
"""

from .corpus import (
    Corpus,
    EncodedDoc,
    RawRecord,
    Stoplist,
    Vocabulary,
    apply_stoplist,
    build_corpus,
    corpus_fingerprint,
    encode_records,
    load_corpus,
    load_records,
    metadata_filter,
    save_corpus,
    tokenize,
)
from .errors import (
    CountInvariantError,
    EmptyCorpusError,
    EmptySelectionError,
    FileFormatError,
    FingerprintMismatchError,
    IncompatibleVocabularyError,
    RecordLoadError,
    ScholarLdaError,
    UnknownEntityError,
    UnknownVenueError,
    YearNotInSeriesError,
)
from .lda import (
    Hyperparams,
    ProgressRecord,
    SamplerState,
    TopicModel,
    conditional_weights,
    gibbs_sweep,
    init_state,
    load_model,
    log_likelihood,
    perplexity,
    save_model,
    train,
    train_chains,
    uniform_model,
)
from .recommend import (
    EntityProfile,
    RankedRecommendation,
    TargetTopics,
    entity_profile,
    rank_entities,
    score_entity,
    threshold_rule,
    top_m_rule,
)
from .topics import (
    PrevalenceRanking,
    TopicSummary,
    recommend_fields,
    top_words,
    topic_prevalence,
)
from .trends import (
    TrendSeries,
    TrendVerdict,
    top_topics_per_year,
    topic_year_series,
    trend_direction,
)

__version__ = "0.1.0"
