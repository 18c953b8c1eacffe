import json

import numpy as np
import pytest

from scholarlda._kernels import fold_in_sweep_kernel, gibbs_sweep_kernel
from scholarlda.corpus import RawRecord, Stoplist, build_corpus


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timed tests measure the algorithm,
    not the JIT."""
    word_ids = np.zeros(1, dtype=np.int32)
    doc_ids = np.zeros(1, dtype=np.int32)
    z = np.zeros(1, dtype=np.int32)
    n_wk = np.ones((1, 1), dtype=np.int64)
    n_dk = np.ones((1, 1), dtype=np.int64)
    n_k = np.ones(1, dtype=np.int64)
    gibbs_sweep_kernel(word_ids, doc_ids, z, n_wk, n_dk, n_k, 0.1, 0.1, np.array([0.5]))
    fold_in_sweep_kernel(word_ids, doc_ids, z, n_dk, np.ones((1, 1)), 0.1, np.array([0.5]))


@pytest.fixture
def two_field_records():
    """Records from two clearly separable fields, two venues, two years."""
    records = []
    for i in range(8):
        records.append(
            RawRecord(
                id=f"ir-{i}",
                title="query retrieval search ranking",
                abstract="relevance documents query search engine retrieval corpus",
                venue="SIGIR",
                year=2016 + i % 2,
                author_ids=("alice", "bob"),
            )
        )
    for i in range(8):
        records.append(
            RawRecord(
                id=f"kdd-{i}",
                title="graph mining network patterns",
                abstract="graph nodes edges mining discovery networks clustering",
                venue="KDD",
                year=2016 + i % 2,
                author_ids=("carol",),
            )
        )
    return records


@pytest.fixture
def two_field_corpus(two_field_records):
    return build_corpus(two_field_records, Stoplist.default(), 1)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path
