"""Load scholarly records, normalize text, and build encoded corpora.

The pipeline is: raw records (jsonl or csv) -> tokenize title+abstract ->
drop stopwords -> drop rare terms -> assign dense vocabulary ids. Everything
here is deterministic: the same records, stoplist, and pruning threshold
always produce the same corpus, including id assignment and document order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

from .errors import EmptyCorpusError, FileFormatError, RecordLoadError
from ._fileio import atomic_write_text

logger = logging.getLogger(__name__)

CORPUS_SCHEMA_VERSION = 1

YEAR_MIN = 1900
YEAR_MAX = 2100

# Maximal runs of word characters excluding underscore, i.e. letters and
# digits in any script. Runs with any non-letter are filtered out afterwards.
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class RawRecord:
    """One scholarly publication as found in an input file."""

    id: str
    title: str
    abstract: str = ""
    venue: str = ""
    year: int | None = None
    author_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class Stoplist:
    """Set of lowercase function words removed before encoding."""

    terms: frozenset[str]

    def __post_init__(self):
        for term in self.terms:
            if any(ch.isspace() for ch in term):
                raise ValueError(f"stoplist entry contains whitespace: {term!r}")
            if term != term.lower():
                raise ValueError(f"stoplist entry is not lowercase: {term!r}")

    def __contains__(self, term):
        return term in self.terms

    def __len__(self):
        return len(self.terms)

    @classmethod
    def empty(cls) -> "Stoplist":
        return cls(frozenset())

    @classmethod
    def from_file(cls, path) -> "Stoplist":
        """Parse a plain-text stoplist: one term per line, ``#`` comments.

        Entries are lowercased on load; a line with internal whitespace is
        rejected because it cannot match any single token.
        """
        terms = set()
        with open(path, encoding="utf-8") as fh:
            for line_num, line in enumerate(fh, start=1):
                entry = line.strip()
                if not entry or entry.startswith("#"):
                    continue
                if any(ch.isspace() for ch in entry):
                    raise ValueError(
                        f"{path}: line {line_num}: stoplist entry {entry!r} contains whitespace"
                    )
                terms.add(entry.lower())
        return cls(frozenset(terms))

    @classmethod
    def default(cls) -> "Stoplist":
        """The bundled standard English stoplist."""
        ref = resources.files("scholarlda").joinpath("data/english_stopwords.txt")
        with resources.as_file(ref) as path:
            return cls.from_file(path)


@dataclass(frozen=True)
class Vocabulary:
    """Dense bidirectional term <-> id mapping. Ids run 0..V-1."""

    id_to_term: tuple[str, ...]
    term_to_id: dict[str, int] = field(repr=False)

    @classmethod
    def from_terms(cls, terms) -> "Vocabulary":
        id_to_term = tuple(terms)
        term_to_id = {term: i for i, term in enumerate(id_to_term)}
        if len(term_to_id) != len(id_to_term):
            raise ValueError("vocabulary terms are not unique")
        return cls(id_to_term=id_to_term, term_to_id=term_to_id)

    @property
    def V(self) -> int:
        return len(self.id_to_term)

    def __len__(self):
        return len(self.id_to_term)


@dataclass(frozen=True)
class EncodedDoc:
    """One document as a sequence of vocabulary ids plus its metadata."""

    doc_index: int
    tokens: tuple[int, ...]
    venue: str = ""
    year: int | None = None
    entity_refs: tuple[str, ...] = ()
    record_id: str = ""


@dataclass(frozen=True)
class Corpus:
    """Immutable encoded corpus; safe to share read-only across threads."""

    docs: tuple[EncodedDoc, ...]
    vocab: Vocabulary
    dropped_record_ids: tuple[str, ...] = ()

    @property
    def M(self) -> int:
        return len(self.docs)

    @cached_property
    def total_tokens(self) -> int:
        return sum(len(doc.tokens) for doc in self.docs)

    def doc_by_record_id(self, record_id: str) -> EncodedDoc:
        for doc in self.docs:
            if doc.record_id == record_id:
                return doc
        raise KeyError(record_id)

    def venues(self) -> tuple[str, ...]:
        seen = []
        for doc in self.docs:
            if doc.venue and doc.venue not in seen:
                seen.append(doc.venue)
        return tuple(seen)

    def author_ids(self) -> tuple[str, ...]:
        seen = []
        for doc in self.docs:
            for author in doc.entity_refs:
                if author not in seen:
                    seen.append(author)
        return tuple(seen)


def metadata_filter(venue: str | None = None, years: tuple[int, int] | None = None):
    """Build a document predicate plus a human-readable scope label.

    ``years`` is an inclusive (first, last) range; documents without a year
    never match a year-constrained filter.
    """
    parts = []
    if venue is not None:
        parts.append(f"venue={venue}")
    if years is not None:
        parts.append(f"years={years[0]}..{years[1]}")
    scope = ",".join(parts) if parts else "all"

    def predicate(doc: EncodedDoc) -> bool:
        if venue is not None and doc.venue != venue:
            return False
        if years is not None:
            if doc.year is None or not years[0] <= doc.year <= years[1]:
                return False
        return True

    return predicate, scope


# ---------------------------------------------------------------------------
# record loading


def load_records(path, fmt: str | None = None) -> list[RawRecord]:
    """Read raw records from a jsonl or csv file.

    ``fmt`` is "jsonl" or "csv"; when omitted it is inferred from the file
    suffix. Malformed rows are collected and raised together as a
    RecordLoadError naming each offending line; nothing is skipped silently.
    """
    path = Path(path)
    if fmt is None:
        suffix = path.suffix.lower().lstrip(".")
        fmt = {"jsonl": "jsonl", "csv": "csv", "json": "jsonl"}.get(suffix)
        if fmt is None:
            raise ValueError(f"cannot infer format from {path.name!r}; pass fmt='jsonl' or 'csv'")
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unsupported format {fmt!r}")

    if fmt == "jsonl":
        records, problems = _read_jsonl(path)
    else:
        records, problems = _read_csv(path)

    seen: dict[str, int] = {}
    for line_num, record in records:
        if record.id in seen:
            problems.append((line_num, f"duplicate id {record.id!r} (first seen on line {seen[record.id]})"))
        else:
            seen[record.id] = line_num

    if problems:
        problems.sort()
        raise RecordLoadError(path, problems)
    return [record for _, record in records]


def _read_jsonl(path):
    records, problems = [], []
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append((line_num, f"invalid JSON ({exc.msg})"))
                continue
            if not isinstance(obj, dict):
                problems.append((line_num, "expected a JSON object"))
                continue
            record, errs = _record_from_mapping(obj, authors_key="authors")
            if errs:
                problems.extend((line_num, err) for err in errs)
            else:
                records.append((line_num, record))
    return records, problems


def _read_csv(path):
    records, problems = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in ("id", "title") if col not in header]
        if missing:
            raise RecordLoadError(path, [(1, f"header is missing column(s): {', '.join(missing)}")])
        for row in reader:
            line_num = reader.line_num
            mapping = {k: v for k, v in row.items() if k is not None and v not in (None, "")}
            if "authors" in mapping:
                mapping["authors"] = [a.strip() for a in mapping["authors"].split(";") if a.strip()]
            record, errs = _record_from_mapping(mapping, authors_key="authors")
            if errs:
                problems.extend((line_num, err) for err in errs)
            else:
                records.append((line_num, record))
    return records, problems


def _record_from_mapping(obj, authors_key):
    errs = []
    rec_id = obj.get("id")
    if rec_id is None or str(rec_id) == "":
        errs.append("missing required field 'id'")
    title = obj.get("title")
    if title is None:
        errs.append("missing required field 'title'")

    year = obj.get("year")
    if year is not None:
        try:
            year = int(year)
        except (TypeError, ValueError):
            errs.append(f"year {year!r} is not an integer")
            year = None
        else:
            if not YEAR_MIN <= year <= YEAR_MAX:
                errs.append(f"year {year} outside [{YEAR_MIN}, {YEAR_MAX}]")

    authors = obj.get(authors_key) or ()
    if isinstance(authors, str) or not all(isinstance(a, str) for a in authors):
        errs.append(f"field {authors_key!r} must be a list of strings")
        authors = ()

    if errs:
        return None, errs
    record = RawRecord(
        id=str(rec_id),
        title=str(title),
        abstract=str(obj.get("abstract") or ""),
        venue=str(obj.get("venue") or ""),
        year=year,
        author_ids=tuple(authors),
    )
    return record, errs


# ---------------------------------------------------------------------------
# text normalization


def tokenize(text: str) -> list[str]:
    """Split text into lowercase alphabetic terms.

    Terms are maximal runs of letters; a run containing any digit is
    discarded whole (so "lda2vec" yields nothing), as is any term shorter
    than two characters. Non-ASCII letters are kept and case-folded.
    """
    terms = []
    for run in _TOKEN_RE.findall(text):
        term = run.casefold()
        # the alphabetic check runs after case folding because folding can
        # introduce combining marks (e.g. dotted capital I)
        if term.isalpha() and len(term) >= 2:
            terms.append(term)
    return terms


def apply_stoplist(terms: list[str], stoplist: Stoplist) -> list[str]:
    """Drop stoplist members, preserving the order of the survivors."""
    return [term for term in terms if term not in stoplist]


# ---------------------------------------------------------------------------
# corpus construction


def build_corpus(records, stoplist: Stoplist, min_term_count: int = 1) -> Corpus:
    """Encode records into a corpus with a frozen vocabulary.

    Per record the title and abstract are concatenated (title first),
    tokenized, and stoplisted. Terms occurring fewer than ``min_term_count``
    times across the whole batch are dropped, then documents left empty are
    dropped with a warning and listed in ``Corpus.dropped_record_ids``.
    Vocabulary ids are assigned in first-occurrence order over the retained
    terms, scanning documents in input order.
    """
    if min_term_count < 1:
        raise ValueError("min_term_count must be >= 1")
    seen_ids = set()
    for record in records:
        if not record.id:
            raise ValueError("record with empty id")
        if record.id in seen_ids:
            raise ValueError(f"duplicate record id {record.id!r}")
        seen_ids.add(record.id)

    term_lists = [apply_stoplist(tokenize(f"{rec.title} {rec.abstract}"), stoplist) for rec in records]

    freq: dict[str, int] = {}
    for terms in term_lists:
        for term in terms:
            freq[term] = freq.get(term, 0) + 1

    term_to_id: dict[str, int] = {}
    id_to_term: list[str] = []
    docs: list[EncodedDoc] = []
    dropped: list[str] = []
    for record, terms in zip(records, term_lists):
        token_ids = []
        for term in terms:
            if freq[term] < min_term_count:
                continue
            tid = term_to_id.get(term)
            if tid is None:
                tid = len(id_to_term)
                term_to_id[term] = tid
                id_to_term.append(term)
            token_ids.append(tid)
        if not token_ids:
            dropped.append(record.id)
            logger.warning("dropping record %r: no tokens survive preprocessing", record.id)
            continue
        docs.append(
            EncodedDoc(
                doc_index=len(docs),
                tokens=tuple(token_ids),
                venue=record.venue,
                year=record.year,
                entity_refs=record.author_ids,
                record_id=record.id,
            )
        )

    if not docs:
        raise EmptyCorpusError("all documents were dropped during preprocessing")
    vocab = Vocabulary(id_to_term=tuple(id_to_term), term_to_id=term_to_id)
    return Corpus(docs=tuple(docs), vocab=vocab, dropped_record_ids=tuple(dropped))


def encode_records(records, vocab: Vocabulary, stoplist: Stoplist) -> Corpus:
    """Encode records against an existing vocabulary (for held-out data).

    Out-of-vocabulary terms are silently dropped; documents left empty are
    dropped with a warning, exactly as in ``build_corpus``.
    """
    docs: list[EncodedDoc] = []
    dropped: list[str] = []
    for record in records:
        terms = apply_stoplist(tokenize(f"{record.title} {record.abstract}"), stoplist)
        token_ids = [vocab.term_to_id[t] for t in terms if t in vocab.term_to_id]
        if not token_ids:
            dropped.append(record.id)
            logger.warning("dropping record %r: no tokens survive preprocessing", record.id)
            continue
        docs.append(
            EncodedDoc(
                doc_index=len(docs),
                tokens=tuple(token_ids),
                venue=record.venue,
                year=record.year,
                entity_refs=record.author_ids,
                record_id=record.id,
            )
        )
    if not docs:
        raise EmptyCorpusError("all documents were dropped during preprocessing")
    return Corpus(docs=tuple(docs), vocab=vocab, dropped_record_ids=tuple(dropped))


# ---------------------------------------------------------------------------
# corpus file format


def corpus_fingerprint(corpus: Corpus) -> str:
    """Content hash over the canonical corpus payload (vocab + documents)."""
    payload = _corpus_payload(corpus)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _corpus_payload(corpus: Corpus) -> dict:
    return {
        "vocabulary": list(corpus.vocab.id_to_term),
        "documents": [
            {
                "record_id": doc.record_id,
                "venue": doc.venue,
                "year": doc.year,
                "authors": list(doc.entity_refs),
                "tokens": list(doc.tokens),
            }
            for doc in corpus.docs
        ],
    }


def save_corpus(corpus: Corpus, path) -> None:
    document = {"schema_version": CORPUS_SCHEMA_VERSION, "kind": "scholarlda-corpus"}
    document.update(_corpus_payload(corpus))
    document["dropped_record_ids"] = list(corpus.dropped_record_ids)
    atomic_write_text(path, json.dumps(document, ensure_ascii=False) + "\n")


def load_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: not valid JSON ({exc.msg})") from exc

    if not isinstance(document, dict) or document.get("kind") != "scholarlda-corpus":
        raise FileFormatError(f"{path}: not a scholarlda corpus file")
    if document.get("schema_version") != CORPUS_SCHEMA_VERSION:
        raise FileFormatError(f"{path}: unsupported schema_version {document.get('schema_version')!r}")

    terms = document.get("vocabulary")
    raw_docs = document.get("documents")
    if not isinstance(terms, list) or not isinstance(raw_docs, list):
        raise FileFormatError(f"{path}: missing vocabulary or documents")
    try:
        vocab = Vocabulary.from_terms(terms)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc

    docs = []
    for index, raw in enumerate(raw_docs):
        tokens = raw.get("tokens")
        if not tokens:
            raise FileFormatError(f"{path}: document {index} has no tokens")
        if not all(isinstance(t, int) and 0 <= t < vocab.V for t in tokens):
            raise FileFormatError(f"{path}: document {index} has token ids outside the vocabulary")
        docs.append(
            EncodedDoc(
                doc_index=index,
                tokens=tuple(tokens),
                venue=raw.get("venue") or "",
                year=raw.get("year"),
                entity_refs=tuple(raw.get("authors") or ()),
                record_id=raw.get("record_id") or "",
            )
        )
    if not docs:
        raise FileFormatError(f"{path}: corpus contains no documents")
    return Corpus(
        docs=tuple(docs),
        vocab=vocab,
        dropped_record_ids=tuple(document.get("dropped_record_ids") or ()),
    )
