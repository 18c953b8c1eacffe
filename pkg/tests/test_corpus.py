import json
import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scholarlda.corpus import (
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
from scholarlda.errors import EmptyCorpusError, FileFormatError, RecordLoadError

from conftest import write_jsonl


# ---------------------------------------------------------------------------
# load_records


def test_load_single_jsonl_record(tmp_path):
    path = write_jsonl(
        tmp_path / "one.jsonl",
        [{"id": "p1", "title": "Deep Search", "abstract": "", "venue": "SIGIR", "year": 2017}],
    )
    records = load_records(path, "jsonl")
    assert records == [
        RawRecord(id="p1", title="Deep Search", abstract="", venue="SIGIR", year=2017)
    ]


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load_records(path, "jsonl") == []


def test_missing_id_names_line_number(tmp_path):
    path = write_jsonl(
        tmp_path / "bad.jsonl",
        [
            {"id": "p1", "title": "ok"},
            {"title": "no id here"},
            {"id": "p3", "title": "ok again"},
        ],
    )
    with pytest.raises(RecordLoadError) as excinfo:
        load_records(path, "jsonl")
    assert excinfo.value.problems == [(2, "missing required field 'id'")]
    assert "line 2" in str(excinfo.value)


def test_missing_title_is_schema_error(tmp_path):
    path = write_jsonl(tmp_path / "bad.jsonl", [{"id": "p1"}])
    with pytest.raises(RecordLoadError, match="title"):
        load_records(path, "jsonl")


def test_duplicate_id_rejected(tmp_path):
    path = write_jsonl(
        tmp_path / "dup.jsonl",
        [{"id": "p1", "title": "a"}, {"id": "p1", "title": "b"}],
    )
    with pytest.raises(RecordLoadError, match="duplicate id 'p1'"):
        load_records(path, "jsonl")


def test_invalid_json_line_reported(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"id": "p1", "title": "ok"}\nnot json at all\n')
    with pytest.raises(RecordLoadError) as excinfo:
        load_records(path, "jsonl")
    assert excinfo.value.problems[0][0] == 2


def test_year_out_of_range_rejected(tmp_path):
    path = write_jsonl(tmp_path / "y.jsonl", [{"id": "p1", "title": "t", "year": 1492}])
    with pytest.raises(RecordLoadError, match="1492"):
        load_records(path, "jsonl")


def test_year_optional(tmp_path):
    path = write_jsonl(tmp_path / "y.jsonl", [{"id": "p1", "title": "t"}])
    assert load_records(path, "jsonl")[0].year is None


def test_file_not_found():
    with pytest.raises(FileNotFoundError):
        load_records("/nonexistent/records.jsonl", "jsonl")


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "recs.csv"
    path.write_text(
        "id,title,abstract,venue,year,authors\n"
        'p1,Deep Search,some abstract,SIGIR,2017,alice;bob\n'
        "p2,Graph Mining,,KDD,,\n"
    )
    records = load_records(path, "csv")
    assert records[0] == RawRecord(
        id="p1",
        title="Deep Search",
        abstract="some abstract",
        venue="SIGIR",
        year=2017,
        author_ids=("alice", "bob"),
    )
    assert records[1].year is None
    assert records[1].author_ids == ()


def test_csv_missing_required_column(tmp_path):
    path = tmp_path / "recs.csv"
    path.write_text("title,venue\nonly a title,SIGIR\n")
    with pytest.raises(RecordLoadError, match="missing column"):
        load_records(path, "csv")


def test_format_inference(tmp_path):
    path = write_jsonl(tmp_path / "x.jsonl", [{"id": "p1", "title": "t"}])
    assert len(load_records(path)) == 1
    with pytest.raises(ValueError, match="cannot infer"):
        load_records(tmp_path / "x.unknown")


# ---------------------------------------------------------------------------
# tokenize / apply_stoplist


def test_tokenize_handles_punctuation_and_numbers():
    assert tokenize("Ad-hoc IR, 2017!") == ["ad", "hoc", "ir"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_drops_digit_runs_and_short_terms():
    assert tokenize("LDA2vec b") == []


def test_tokenize_keeps_non_ascii_letters():
    assert tokenize("Schrödinger Modèle") == ["schrödinger", "modèle"]


@given(st.text(max_size=200))
def test_tokenize_output_is_normalized(text):
    terms = tokenize(text)
    for term in terms:
        assert term == term.casefold()
        assert len(term) >= 2
        assert not any(ch.isdigit() for ch in term)
        assert term.isalpha()
    # tokens are already separator-free, so they re-tokenize to themselves
    assert tokenize(" ".join(terms)) == terms


def test_apply_stoplist_standard_english():
    assert apply_stoplist(["the", "query", "a"], Stoplist.default()) == ["query"]


def test_apply_stoplist_empty_input():
    assert apply_stoplist([], Stoplist.default()) == []


def test_apply_stoplist_empty_stoplist_is_identity():
    terms = ["query", "retrieval"]
    assert apply_stoplist(terms, Stoplist.empty()) == terms


def test_apply_stoplist_preserves_order():
    stop = Stoplist(frozenset({"xx"}))
    assert apply_stoplist(["b", "xx", "a", "c", "xx"], stop) == ["b", "a", "c"]


# ---------------------------------------------------------------------------
# Stoplist parsing


def test_stoplist_file_comments_and_case(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# a comment\nThe\n\nand\n")
    stop = Stoplist.from_file(path)
    assert stop.terms == frozenset({"the", "and"})


def test_stoplist_rejects_internal_whitespace(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("new york\n")
    with pytest.raises(ValueError, match="line 1"):
        Stoplist.from_file(path)


def test_stoplist_constructor_validates():
    with pytest.raises(ValueError):
        Stoplist(frozenset({"Upper"}))


def test_default_stoplist_is_normalized():
    stop = Stoplist.default()
    assert len(stop) > 300
    for term in stop.terms:
        assert term == term.lower()
        assert not any(ch.isspace() for ch in term)


# ---------------------------------------------------------------------------
# build_corpus


def _records(*texts, venue="", year=None):
    return [
        RawRecord(id=f"r{i}", title=text, abstract="", venue=venue, year=year)
        for i, text in enumerate(texts)
    ]


def test_min_term_count_prunes_rare_terms():
    records = _records("query alpha", "query beta")
    corpus = build_corpus(records, Stoplist.empty(), min_term_count=2)
    assert corpus.vocab.V == 1
    assert corpus.vocab.id_to_term == ("query",)
    assert all(doc.tokens == (0,) for doc in corpus.docs)


def test_no_pruning_keeps_everything():
    corpus = build_corpus(_records("query retrieval"), Stoplist.empty(), 1)
    assert corpus.vocab.V == 2
    assert len(corpus.docs[0].tokens) == 2


def test_all_stopwords_is_empty_corpus():
    records = _records("the of and", "a an the")
    with pytest.raises(EmptyCorpusError):
        build_corpus(records, Stoplist.default(), 1)


def test_title_comes_before_abstract():
    record = RawRecord(id="r0", title="zebra", abstract="aardvark")
    corpus = build_corpus([record], Stoplist.empty(), 1)
    # first-occurrence id assignment proves the title was scanned first
    assert corpus.vocab.id_to_term == ("zebra", "aardvark")


def test_vocabulary_ids_in_first_occurrence_order():
    corpus = build_corpus(_records("bb aa", "aa cc"), Stoplist.empty(), 1)
    assert corpus.vocab.id_to_term == ("bb", "aa", "cc")


def test_empty_docs_dropped_and_reported(caplog):
    records = _records("query retrieval", "the of", "graph mining")
    with caplog.at_level(logging.WARNING):
        corpus = build_corpus(records, Stoplist.default(), 1)
    assert corpus.M == 2
    assert corpus.dropped_record_ids == ("r1",)
    assert "r1" in caplog.text
    # doc_index stays dense after the drop
    assert [doc.doc_index for doc in corpus.docs] == [0, 1]


def test_min_term_count_requires_positive():
    with pytest.raises(ValueError):
        build_corpus(_records("query"), Stoplist.empty(), 0)


def test_duplicate_record_ids_rejected():
    records = [RawRecord(id="same", title="a"), RawRecord(id="same", title="b")]
    with pytest.raises(ValueError, match="duplicate"):
        build_corpus(records, Stoplist.empty(), 1)


def test_roundtrip_token_ids(two_field_corpus):
    vocab = two_field_corpus.vocab
    for doc in two_field_corpus.docs:
        for t in doc.tokens:
            term = vocab.id_to_term[t]
            assert vocab.term_to_id[term] == t


def test_no_stoplist_term_survives(two_field_corpus):
    stop = Stoplist.default()
    for term in two_field_corpus.vocab.id_to_term:
        assert term not in stop


def test_build_is_deterministic(two_field_records):
    a = build_corpus(two_field_records, Stoplist.default(), 1)
    b = build_corpus(two_field_records, Stoplist.default(), 1)
    assert a == b


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=12).map(
            lambda chars: " ".join(ch * 2 for ch in chars)
        ),
        min_size=1,
        max_size=8,
    ),
    st.integers(min_value=1, max_value=4),
)
def test_raising_min_term_count_never_grows_corpus(texts, mtc):
    records = [RawRecord(id=f"r{i}", title=text) for i, text in enumerate(texts)]
    try:
        lower = build_corpus(records, Stoplist.empty(), mtc)
    except EmptyCorpusError:
        return
    try:
        higher = build_corpus(records, Stoplist.empty(), mtc + 1)
    except EmptyCorpusError:
        return
    assert higher.vocab.V <= lower.vocab.V
    assert higher.total_tokens <= lower.total_tokens


# ---------------------------------------------------------------------------
# encode_records (held-out encoding against a fixed vocabulary)


def test_encode_records_drops_oov():
    base = build_corpus(_records("query retrieval"), Stoplist.empty(), 1)
    heldout = encode_records(
        _records("query zzzunseen"), base.vocab, Stoplist.empty()
    )
    assert heldout.vocab is base.vocab
    assert heldout.docs[0].tokens == (base.vocab.term_to_id["query"],)


def test_encode_records_all_oov_is_empty():
    base = build_corpus(_records("query retrieval"), Stoplist.empty(), 1)
    with pytest.raises(EmptyCorpusError):
        encode_records(_records("zzz yyy"), base.vocab, Stoplist.empty())


# ---------------------------------------------------------------------------
# corpus file + fingerprint


def test_save_load_roundtrip(tmp_path, two_field_corpus):
    path = tmp_path / "corpus.json"
    save_corpus(two_field_corpus, path)
    loaded = load_corpus(path)
    assert loaded.docs == two_field_corpus.docs
    assert loaded.vocab.id_to_term == two_field_corpus.vocab.id_to_term
    assert corpus_fingerprint(loaded) == corpus_fingerprint(two_field_corpus)


def test_fingerprint_changes_with_content(two_field_corpus):
    fp = corpus_fingerprint(two_field_corpus)
    docs = list(two_field_corpus.docs)
    tampered_doc = docs[0]
    docs[0] = type(tampered_doc)(
        doc_index=tampered_doc.doc_index,
        tokens=tampered_doc.tokens[:-1] + (0,),
        venue=tampered_doc.venue,
        year=tampered_doc.year,
        entity_refs=tampered_doc.entity_refs,
        record_id=tampered_doc.record_id,
    )
    tampered = Corpus(docs=tuple(docs), vocab=two_field_corpus.vocab)
    assert corpus_fingerprint(tampered) != fp


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text("{not json")
    with pytest.raises(FileFormatError):
        load_corpus(path)


def test_load_rejects_wrong_kind(tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps({"kind": "something-else", "schema_version": 1}))
    with pytest.raises(FileFormatError, match="not a scholarlda corpus"):
        load_corpus(path)


def test_load_rejects_out_of_range_token(tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text(
        json.dumps(
            {
                "kind": "scholarlda-corpus",
                "schema_version": 1,
                "vocabulary": ["only"],
                "documents": [{"record_id": "r0", "tokens": [0, 5]}],
            }
        )
    )
    with pytest.raises(FileFormatError, match="outside the vocabulary"):
        load_corpus(path)


# ---------------------------------------------------------------------------
# metadata_filter


def test_metadata_filter_scopes(two_field_corpus):
    predicate, scope = metadata_filter(venue="SIGIR")
    assert scope == "venue=SIGIR"
    assert all(doc.venue == "SIGIR" for doc in two_field_corpus.docs if predicate(doc))
    assert sum(predicate(d) for d in two_field_corpus.docs) == 8

    predicate, scope = metadata_filter(venue="SIGIR", years=(2017, 2017))
    assert scope == "venue=SIGIR,years=2017..2017"
    assert sum(predicate(d) for d in two_field_corpus.docs) == 4

    predicate, scope = metadata_filter()
    assert scope == "all"
    assert sum(predicate(d) for d in two_field_corpus.docs) == 16


def test_metadata_filter_excludes_undated_docs():
    predicate, _ = metadata_filter(years=(2000, 2100))
    doc = EncodedDoc(doc_index=0, tokens=(0,), venue="X", year=None)
    assert not predicate(doc)
