"""Numba-compiled inner loops for the collapsed Gibbs sampler.

Both kernels consume exactly one pre-drawn uniform per token, so the random
stream is owned entirely by the caller's generator. Topic selection is
inverse-transform over the unnormalized cumulative weights: the new topic is
the smallest k whose cumulative weight reaches u * total. Any pure-Python
re-implementation used for cross-checking must reproduce that rule exactly.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def gibbs_sweep_kernel(word_ids, doc_ids, z, n_wk, n_dk, n_k, alpha, beta, uniforms):
    """One full sweep: visit every token in (doc, position) order.

    Counts are decremented before the weight computation (the token under
    resampling is excluded) and restored for the drawn topic, so all count
    invariants hold again on exit.
    """
    n_tokens = word_ids.shape[0]
    K = n_k.shape[0]
    v_beta = n_wk.shape[0] * beta
    cum = np.empty(K, dtype=np.float64)
    for i in range(n_tokens):
        w = word_ids[i]
        d = doc_ids[i]
        k_old = z[i]
        n_wk[w, k_old] -= 1
        n_dk[d, k_old] -= 1
        n_k[k_old] -= 1

        total = 0.0
        for k in range(K):
            total += (n_wk[w, k] + beta) / (n_k[k] + v_beta) * (n_dk[d, k] + alpha)
            cum[k] = total

        u = uniforms[i] * total
        k_new = 0
        while k_new < K - 1 and cum[k_new] < u:
            k_new += 1

        z[i] = k_new
        n_wk[w, k_new] += 1
        n_dk[d, k_new] += 1
        n_k[k_new] += 1


@njit(cache=True, nogil=True)
def fold_in_sweep_kernel(word_ids, doc_ids, z, n_dk, phi_t, alpha, uniforms):
    """One sweep over held-out tokens with the topic-word matrix frozen.

    ``phi_t`` is the V x K transpose of phi so the per-word row is
    contiguous. Only document-topic counts change.
    """
    n_tokens = word_ids.shape[0]
    K = n_dk.shape[1]
    cum = np.empty(K, dtype=np.float64)
    for i in range(n_tokens):
        w = word_ids[i]
        d = doc_ids[i]
        k_old = z[i]
        n_dk[d, k_old] -= 1

        total = 0.0
        for k in range(K):
            total += phi_t[w, k] * (n_dk[d, k] + alpha)
            cum[k] = total

        u = uniforms[i] * total
        k_new = 0
        while k_new < K - 1 and cum[k_new] < u:
            k_new += 1

        z[i] = k_new
        n_dk[d, k_new] += 1
