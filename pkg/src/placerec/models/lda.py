"""Latent Dirichlet allocation with mean-field variational EM.

One model per place class.  Per-document inference uses the standard
(gamma, phi) coordinate ascent; the M-step smooths topic rows with a small
pseudo-count, which corresponds to a Dirichlet prior on the rows.  The
recorded fit objective is therefore the evidence bound plus that prior
kernel, which makes the trace provably non-decreasing: document factors
are warm-started between outer iterations instead of being re-initialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, logsumexp, xlogy

from ..errors import NoData
from ..util import subseed

DEFAULT_BETA_SMOOTH = 1e-3


@dataclass
class LdaModel:
    topics: np.ndarray  # (n_topics, Z), rows on the simplex
    alpha: np.ndarray  # (n_topics,) Dirichlet prior over topic proportions
    vi_iters: int = 100
    vi_tol: float = 1e-6
    objective_trace: list[float] | None = field(default=None, repr=False)

    @property
    def n_topics(self) -> int:
        return self.topics.shape[0]

    @property
    def n_words(self) -> int:
        return self.topics.shape[1]


def _doc_inference(
    counts_nz: np.ndarray,
    log_beta_nz: np.ndarray,
    alpha: np.ndarray,
    gamma0: np.ndarray,
    max_iters: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate ascent on one document's variational factors.

    ``counts_nz``: counts at the document's nonzero words; ``log_beta_nz``:
    (n_topics, nz) log topic probabilities at those words.  Returns the
    converged (gamma, phi).
    """
    gamma = gamma0.copy()
    phi = None
    for _ in range(max_iters):
        e_log_theta = digamma(gamma) - digamma(gamma.sum())
        log_phi = log_beta_nz.T + e_log_theta[None, :]  # (nz, n_topics)
        log_phi -= logsumexp(log_phi, axis=1, keepdims=True)
        phi = np.exp(log_phi)
        gamma_new = alpha + counts_nz @ phi
        delta = np.abs(gamma_new - gamma).mean()
        gamma = gamma_new
        if delta < tol:
            break
    return gamma, phi


def _doc_bound(
    counts_nz: np.ndarray,
    log_beta_nz: np.ndarray,
    alpha: np.ndarray,
    gamma: np.ndarray,
    phi: np.ndarray,
) -> float:
    """Evidence lower bound of one document given its factors."""
    e_log_theta = digamma(gamma) - digamma(gamma.sum())
    bound = gammaln(alpha.sum()) - gammaln(alpha).sum()
    bound += (alpha - 1.0) @ e_log_theta
    word_terms = phi * (e_log_theta[None, :] + log_beta_nz.T) - xlogy(phi, phi)
    bound += counts_nz @ word_terms.sum(axis=1)
    bound -= gammaln(gamma.sum()) - gammaln(gamma).sum()
    bound -= (gamma - 1.0) @ e_log_theta
    return float(bound)


def fit_lda(
    hists: np.ndarray,
    n_topics: int,
    em_iters: int = 100,
    tol: float = 1e-7,
    seed: int = 0,
    alpha: float | np.ndarray | None = None,
    vi_iters: int = 100,
    vi_tol: float = 1e-6,
    beta_smooth: float = DEFAULT_BETA_SMOOTH,
) -> LdaModel:
    """Variational EM over a corpus of count histograms.

    ``alpha`` defaults to the symmetric 50 / n_topics.  The topic matrix is
    smoothed with ``beta_smooth`` pseudo-counts in every M-step.
    """
    counts = np.atleast_2d(np.asarray(hists, dtype=np.float64))
    n_docs, z = counts.shape
    if n_docs == 0 or counts.size == 0:
        raise NoData("no histograms to fit")
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")

    if alpha is None:
        alpha_vec = np.full(n_topics, 50.0 / n_topics)
    else:
        alpha_vec = np.broadcast_to(np.asarray(alpha, dtype=np.float64), (n_topics,)).copy()

    rng = np.random.default_rng(subseed(seed, "lda"))
    beta = rng.random((n_topics, z)) + 1.0 / z
    beta /= beta.sum(axis=1, keepdims=True)

    nz_idx = [np.flatnonzero(counts[d]) for d in range(n_docs)]
    nz_counts = [counts[d, idx] for d, idx in enumerate(nz_idx)]
    doc_totals = counts.sum(axis=1)

    # Warm-started document factors keep the penalized bound monotone.
    gammas = alpha_vec[None, :] + (doc_totals / n_topics)[:, None]
    gammas = np.ascontiguousarray(gammas)

    trace: list[float] = []
    prev = -np.inf
    final_beta = beta
    for _ in range(em_iters):
        log_beta = np.log(beta)
        beta_stat = np.zeros_like(beta)
        bound = 0.0
        for d in range(n_docs):
            idx = nz_idx[d]
            if idx.size == 0:
                continue
            lb_nz = log_beta[:, idx]
            gamma, phi = _doc_inference(
                nz_counts[d], lb_nz, alpha_vec, gammas[d], vi_iters, vi_tol
            )
            gammas[d] = gamma
            bound += _doc_bound(nz_counts[d], lb_nz, alpha_vec, gamma, phi)
            beta_stat[:, idx] += (nz_counts[d][:, None] * phi).T

        objective = bound + beta_smooth * float(np.log(beta).sum())
        trace.append(objective)
        final_beta = beta
        if objective - prev <= tol * max(1.0, abs(prev)):
            break
        prev = objective

        beta = beta_stat + beta_smooth
        beta /= beta.sum(axis=1, keepdims=True)

    return LdaModel(
        topics=final_beta,
        alpha=alpha_vec,
        vi_iters=vi_iters,
        vi_tol=vi_tol,
        objective_trace=trace,
    )


def lda_free_energy(model: LdaModel, hist: np.ndarray) -> float:
    """Variational lower bound on the log-likelihood of one histogram.

    Runs single-document inference to convergence.  An empty histogram has
    likelihood one (no words), so the bound is exactly 0.
    """
    counts = np.asarray(hist, dtype=np.float64)
    idx = np.flatnonzero(counts)
    if idx.size == 0:
        return 0.0
    counts_nz = counts[idx]
    log_beta_nz = np.log(model.topics[:, idx])
    gamma0 = model.alpha + counts_nz.sum() / model.n_topics
    gamma, phi = _doc_inference(
        counts_nz, log_beta_nz, model.alpha, gamma0, model.vi_iters, model.vi_tol
    )
    return _doc_bound(counts_nz, log_beta_nz, model.alpha, gamma, phi)
