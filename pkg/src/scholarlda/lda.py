"""Collapsed Gibbs sampling for LDA and the trained-model artifact.

The sampler keeps the four count aggregates (n_wk, n_dk, n_k, n_d) in sync
with the per-token topic assignments z. A token's topic is resampled from

    weight[k] = (n_wk[w,k] + beta) / (n_k[k] + V*beta) * (n_dk[d,k] + alpha)

with the token itself excluded from all counts, using one uniform draw per
token from a seeded PCG64 generator. Point estimates come from the final
state:

    phi[k,w]   = (n_wk[w,k] + beta)  / (n_k[k] + V*beta)
    theta[d,k] = (n_dk[d,k] + alpha) / (n_d[d] + K*alpha)
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammaln

from . import corpus as corpus_mod
from ._fileio import atomic_write_text
from ._kernels import fold_in_sweep_kernel, gibbs_sweep_kernel
from .corpus import Corpus, Vocabulary
from .errors import (
    CountInvariantError,
    EmptyCorpusError,
    FileFormatError,
    IncompatibleVocabularyError,
)

logger = logging.getLogger(__name__)

MODEL_SCHEMA_VERSION = 1

# The one sampling generator this package uses. numpy guarantees PCG64's
# stream for a given seed, which is what makes model files reproducible
# across releases.
RNG_ALGORITHM = "numpy-pcg64"


@dataclass(frozen=True)
class Hyperparams:
    """Sampler settings. alpha and beta are symmetric scalar priors."""

    K: int = 100
    alpha: float = 0.01
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 200
    seed: int = 42

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SamplerState:
    """Mutable sampler state: assignments, count aggregates, generator.

    z is flat in (doc, position) order; token i of document d lives at
    z[doc_ptrs[d] + i]. Single writer only: never run two sweeps on the
    same state concurrently.
    """

    z: np.ndarray          # int32[N]
    n_wk: np.ndarray       # int64[V, K]
    n_dk: np.ndarray       # int64[M, K]
    n_k: np.ndarray        # int64[K]
    n_d: np.ndarray        # int64[M]
    word_ids: np.ndarray   # int32[N], flattened corpus tokens
    doc_ids: np.ndarray    # int32[N]
    doc_ptrs: np.ndarray   # int64[M + 1]
    rng: np.random.Generator

    @property
    def rng_state(self) -> dict:
        return self.rng.bit_generator.state

    @property
    def n_tokens(self) -> int:
        return int(self.word_ids.shape[0])

    def token_index(self, doc: int, pos: int) -> int:
        if not 0 <= doc < self.n_d.shape[0]:
            raise IndexError(f"doc index {doc} out of range")
        if not 0 <= pos < self.n_d[doc]:
            raise IndexError(f"position {pos} out of range for doc {doc}")
        return int(self.doc_ptrs[doc]) + pos

    def validate_counts(self) -> None:
        """Recount everything from z and fail loudly on any mismatch."""
        K = self.n_k.shape[0]
        V = self.n_wk.shape[0]
        if (self.n_wk < 0).any() or (self.n_dk < 0).any() or (self.n_k < 0).any():
            raise CountInvariantError("negative count in aggregates")
        if not np.array_equal(self.n_dk.sum(axis=1), self.n_d):
            raise CountInvariantError("sum_k n_dk[d,k] != n_d[d]")
        if not np.array_equal(self.n_wk.sum(axis=0), self.n_k):
            raise CountInvariantError("sum_w n_wk[w,k] != n_k[k]")
        if self.n_k.sum() != self.n_d.sum() or self.n_d.sum() != self.n_tokens:
            raise CountInvariantError("grand totals disagree with token count")
        flat = self.word_ids.astype(np.int64) * K + self.z
        if not np.array_equal(
            np.bincount(flat, minlength=V * K).reshape(V, K), self.n_wk
        ):
            raise CountInvariantError("n_wk disagrees with a recount from z")
        flat = self.doc_ids.astype(np.int64) * K + self.z
        if not np.array_equal(
            np.bincount(flat, minlength=self.n_d.shape[0] * K).reshape(-1, K), self.n_dk
        ):
            raise CountInvariantError("n_dk disagrees with a recount from z")


class ProgressRecord(NamedTuple):
    iteration: int
    log_likelihood: float


class ChainOutcome(NamedTuple):
    chain: int
    seed: int
    final_log_likelihood: float


@dataclass(frozen=True, eq=False)
class TopicModel:
    """Immutable point estimates from a finished training run."""

    phi: np.ndarray    # K x V, row-stochastic
    theta: np.ndarray  # M x K, row-stochastic
    hyperparams: Hyperparams
    vocab: Vocabulary
    corpus_fingerprint: str = ""

    def __post_init__(self):
        self.phi.setflags(write=False)
        self.theta.setflags(write=False)

    @property
    def K(self) -> int:
        return self.phi.shape[0]

    @property
    def V(self) -> int:
        return self.phi.shape[1]

    @property
    def M(self) -> int:
        return self.theta.shape[0]


# ---------------------------------------------------------------------------
# sampler operations


def _flatten(corpus: Corpus):
    lengths = np.array([len(doc.tokens) for doc in corpus.docs], dtype=np.int64)
    word_ids = np.fromiter(
        (t for doc in corpus.docs for t in doc.tokens), dtype=np.int32, count=int(lengths.sum())
    )
    doc_ids = np.repeat(np.arange(corpus.M, dtype=np.int32), lengths)
    doc_ptrs = np.zeros(corpus.M + 1, dtype=np.int64)
    np.cumsum(lengths, out=doc_ptrs[1:])
    return word_ids, doc_ids, doc_ptrs, lengths


def init_state(corpus: Corpus, hp: Hyperparams) -> SamplerState:
    """Assign every token a uniformly random topic and build the counts."""
    if corpus.M == 0 or corpus.total_tokens == 0:
        raise EmptyCorpusError("cannot initialize a sampler on an empty corpus")
    word_ids, doc_ids, doc_ptrs, lengths = _flatten(corpus)
    V = corpus.vocab.V
    K = hp.K

    rng = np.random.default_rng(hp.seed)
    z = rng.integers(0, K, size=word_ids.shape[0], dtype=np.int32)

    n_wk = np.zeros((V, K), dtype=np.int64)
    np.add.at(n_wk, (word_ids, z), 1)
    n_dk = np.zeros((corpus.M, K), dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    n_k = np.bincount(z, minlength=K).astype(np.int64)

    return SamplerState(
        z=z,
        n_wk=n_wk,
        n_dk=n_dk,
        n_k=n_k,
        n_d=lengths,
        word_ids=word_ids,
        doc_ids=doc_ids,
        doc_ptrs=doc_ptrs,
        rng=rng,
    )


def conditional_weights(state: SamplerState, hp: Hyperparams, doc: int, pos: int) -> np.ndarray:
    """Unnormalized resampling weights for the token at (doc, pos).

    The caller must already have excluded that token from all counts; the
    weights are then a pure read of the aggregates.
    """
    i = state.token_index(doc, pos)
    w = state.word_ids[i]
    v_beta = state.n_wk.shape[0] * hp.beta
    return (state.n_wk[w] + hp.beta) / (state.n_k + v_beta) * (state.n_dk[doc] + hp.alpha)


def gibbs_sweep(state: SamplerState, hp: Hyperparams, corpus: Corpus) -> SamplerState:
    """Resample every token once, in (doc, position) order. Mutates state."""
    if state.n_tokens != corpus.total_tokens:
        raise ValueError("state does not match corpus (token count differs)")
    if state.n_wk.shape != (corpus.vocab.V, hp.K):
        raise ValueError("state does not match hyperparams/vocabulary shape")
    uniforms = state.rng.random(state.n_tokens)
    gibbs_sweep_kernel(
        state.word_ids,
        state.doc_ids,
        state.z,
        state.n_wk,
        state.n_dk,
        state.n_k,
        hp.alpha,
        hp.beta,
        uniforms,
    )
    return state


def log_likelihood(state: SamplerState, hp: Hyperparams) -> float:
    """Collapsed log-joint log p(w, z | alpha, beta) from the count aggregates.

    Standard Dirichlet-multinomial form: a product of Polya urn terms per
    topic (words) and per document (assignments). Finite for any state with
    positive priors, including empty topics.
    """
    V, K = state.n_wk.shape
    M = state.n_dk.shape[0]
    a, b = hp.alpha, hp.beta
    word_side = (
        K * (gammaln(V * b) - V * gammaln(b))
        + gammaln(state.n_wk + b).sum()
        - gammaln(state.n_k + V * b).sum()
    )
    doc_side = (
        M * (gammaln(K * a) - K * gammaln(a))
        + gammaln(state.n_dk + a).sum()
        - gammaln(state.n_d + K * a).sum()
    )
    return float(word_side + doc_side)


def estimate_phi(state: SamplerState, hp: Hyperparams) -> np.ndarray:
    V = state.n_wk.shape[0]
    return (state.n_wk.T + hp.beta) / (state.n_k[:, None] + V * hp.beta)


def estimate_theta(state: SamplerState, hp: Hyperparams) -> np.ndarray:
    return (state.n_dk + hp.alpha) / (state.n_d[:, None] + hp.K * hp.alpha)


def _run_chain(
    corpus: Corpus,
    hp: Hyperparams,
    log_interval: int,
    on_progress: Callable[[ProgressRecord], None] | None,
) -> SamplerState:
    state = init_state(corpus, hp)
    for iteration in range(1, hp.iterations + 1):
        gibbs_sweep(state, hp, corpus)
        if log_interval and (iteration % log_interval == 0 or iteration == hp.iterations):
            record = ProgressRecord(iteration, log_likelihood(state, hp))
            if on_progress is not None:
                on_progress(record)
            else:
                logger.info("iteration=%d log_likelihood=%.6f", record.iteration, record.log_likelihood)
    return state


def train(
    corpus: Corpus,
    hp: Hyperparams,
    *,
    log_interval: int = 10,
    on_progress: Callable[[ProgressRecord], None] | None = None,
) -> TopicModel:
    """Run the full sampler and return point estimates from the final state.

    Emits a (iteration, log_likelihood) progress record every
    ``log_interval`` sweeps (and at the final sweep); pass ``log_interval=0``
    to silence progress entirely.
    """
    state = _run_chain(corpus, hp, log_interval, on_progress)
    return TopicModel(
        phi=estimate_phi(state, hp),
        theta=estimate_theta(state, hp),
        hyperparams=hp,
        vocab=corpus.vocab,
        corpus_fingerprint=corpus_mod.corpus_fingerprint(corpus),
    )


def train_chains(
    corpus: Corpus, hp: Hyperparams, n_chains: int, *, max_workers: int | None = None
) -> tuple[TopicModel, tuple[ChainOutcome, ...]]:
    """Train ``n_chains`` independent chains and keep the best one.

    Chain i runs with seed ``hp.seed + i``; chains share nothing mutable, so
    they run concurrently (the sweep kernel releases the GIL). The winner is
    the chain with the highest final collapsed log-likelihood, ties broken
    by the lowest chain index, and its seed is what the returned model
    records, so a single-chain rerun reproduces it.
    """
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    hps = [replace(hp, seed=hp.seed + i) for i in range(n_chains)]
    with ThreadPoolExecutor(max_workers=max_workers or n_chains) as pool:
        states = list(pool.map(lambda h: _run_chain(corpus, h, 0, None), hps))
    outcomes = tuple(
        ChainOutcome(i, hps[i].seed, log_likelihood(states[i], hps[i])) for i in range(n_chains)
    )
    best = max(range(n_chains), key=lambda i: (outcomes[i].final_log_likelihood, -i))
    model = TopicModel(
        phi=estimate_phi(states[best], hps[best]),
        theta=estimate_theta(states[best], hps[best]),
        hyperparams=hps[best],
        vocab=corpus.vocab,
        corpus_fingerprint=corpus_mod.corpus_fingerprint(corpus),
    )
    return model, outcomes


# ---------------------------------------------------------------------------
# held-out evaluation


def perplexity(
    model: TopicModel,
    heldout: Corpus,
    *,
    fold_in_sweeps: int = 50,
    seed: int | None = None,
) -> float:
    """Per-token perplexity of held-out documents under the model.

    Document-topic mixtures for the held-out docs are estimated by folding
    in: ``fold_in_sweeps`` Gibbs sweeps with phi frozen, seeded from the
    model's seed unless overridden. Lower is better; a uniform model scores
    exactly V.
    """
    if heldout.M == 0 or heldout.total_tokens == 0:
        raise EmptyCorpusError("held-out corpus is empty")
    if heldout.vocab.id_to_term != model.vocab.id_to_term:
        raise IncompatibleVocabularyError(
            "held-out corpus vocabulary differs from the model's vocabulary"
        )
    if fold_in_sweeps < 1:
        raise ValueError("fold_in_sweeps must be >= 1")

    hp = model.hyperparams
    word_ids, doc_ids, _, lengths = _flatten(heldout)
    rng = np.random.default_rng(hp.seed if seed is None else seed)
    z = rng.integers(0, model.K, size=word_ids.shape[0], dtype=np.int32)
    n_dk = np.zeros((heldout.M, model.K), dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)

    phi_t = np.ascontiguousarray(model.phi.T)
    for _ in range(fold_in_sweeps):
        fold_in_sweep_kernel(word_ids, doc_ids, z, n_dk, phi_t, hp.alpha, rng.random(word_ids.shape[0]))

    theta_bar = (n_dk + hp.alpha) / (lengths[:, None] + model.K * hp.alpha)

    log_probs = np.empty(word_ids.shape[0], dtype=np.float64)
    chunk = 65536
    for start in range(0, word_ids.shape[0], chunk):
        stop = min(start + chunk, word_ids.shape[0])
        token_probs = np.einsum(
            "nk,nk->n", theta_bar[doc_ids[start:stop]], phi_t[word_ids[start:stop]]
        )
        log_probs[start:stop] = np.log(token_probs)
    return float(np.exp(-log_probs.sum() / word_ids.shape[0]))


# ---------------------------------------------------------------------------
# model file format


def save_model(model: TopicModel, path) -> None:
    """Write the model as one self-describing JSON document.

    Field values are plain JSON numbers (shortest round-trip repr), so the
    same model always serializes to the same bytes.
    """
    hp = model.hyperparams
    document = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kind": "scholarlda-topic-model",
        "hyperparams": {
            "topics": hp.K,
            "alpha": hp.alpha,
            "beta": hp.beta,
            "iterations": hp.iterations,
            "burn_in": hp.burn_in,
            "seed": hp.seed,
        },
        "rng": {"algorithm": RNG_ALGORITHM, "seed": hp.seed},
        "corpus_fingerprint": model.corpus_fingerprint,
        "vocabulary": list(model.vocab.id_to_term),
        "phi": [[float(x) for x in row] for row in model.phi],
        "theta": [[float(x) for x in row] for row in model.theta],
    }
    atomic_write_text(path, json.dumps(document, ensure_ascii=False) + "\n")


def load_model(path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: not valid JSON ({exc.msg})") from exc

    if not isinstance(document, dict) or document.get("kind") != "scholarlda-topic-model":
        raise FileFormatError(f"{path}: not a scholarlda model file")
    if document.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise FileFormatError(f"{path}: unsupported schema_version {document.get('schema_version')!r}")
    rng_info = document.get("rng") or {}
    if rng_info.get("algorithm") != RNG_ALGORITHM:
        raise FileFormatError(f"{path}: unsupported rng algorithm {rng_info.get('algorithm')!r}")

    try:
        raw_hp = document["hyperparams"]
        hp = Hyperparams(
            K=raw_hp["topics"],
            alpha=raw_hp["alpha"],
            beta=raw_hp["beta"],
            iterations=raw_hp["iterations"],
            burn_in=raw_hp["burn_in"],
            seed=raw_hp["seed"],
        )
        vocab = Vocabulary.from_terms(document["vocabulary"])
        phi = np.array(document["phi"], dtype=np.float64)
        theta = np.array(document["theta"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc

    if phi.ndim != 2 or phi.shape != (hp.K, vocab.V):
        raise FileFormatError(f"{path}: phi shape {phi.shape} does not match K={hp.K}, V={vocab.V}")
    if theta.ndim != 2 or theta.shape[1] != hp.K:
        raise FileFormatError(f"{path}: theta shape {theta.shape} does not match K={hp.K}")
    for name, matrix in (("phi", phi), ("theta", theta)):
        if not (matrix > 0).all():
            raise FileFormatError(f"{path}: {name} has non-positive entries")
        if np.abs(matrix.sum(axis=1) - 1.0).max() > 1e-9:
            raise FileFormatError(f"{path}: {name} rows do not sum to 1")

    return TopicModel(
        phi=phi,
        theta=theta,
        hyperparams=hp,
        vocab=vocab,
        corpus_fingerprint=document.get("corpus_fingerprint") or "",
    )


def uniform_model(vocab: Vocabulary, M: int, hp: Hyperparams) -> TopicModel:
    """Baseline model with uniform phi and theta (perplexity exactly V)."""
    phi = np.full((hp.K, vocab.V), 1.0 / vocab.V)
    theta = np.full((M, hp.K), 1.0 / hp.K)
    return TopicModel(phi=phi, theta=theta, hyperparams=hp, vocab=vocab)
