"""Mixture of Dirichlet densities over smoothed count histograms.

Histograms are mapped to interior simplex points with additive smoothing,
then modeled by a weighted mixture of Dirichlet densities.  Component
parameters are estimated with the classic digamma fixed-point iteration,
which is itself a bound optimization, so every EM step (even with a
truncated inner loop) keeps the mixture log-likelihood non-decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, logsumexp, polygamma

from ..errors import DegenerateComponent, EmptyHistogram, TooFewHistograms
from ..util import subseed

_MLE_MAX_ITERS = 1000
_MLE_TOL = 1e-10


@dataclass
class DirichletMixture:
    weights: np.ndarray  # (M,) on the simplex
    alphas: np.ndarray  # (M, Z) positive
    eps_smooth: float
    objective_trace: list[float] | None = field(default=None, repr=False)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def n_words(self) -> int:
        return self.alphas.shape[1]


def histograms_to_simplex(hists: np.ndarray, eps_smooth: float) -> np.ndarray:
    """Map count rows to interior simplex points: (c + eps) / (n + Z*eps)."""
    counts = np.asarray(hists, dtype=np.float64)
    if counts.ndim == 1:
        counts = counts[None, :]
    z = counts.shape[1]
    totals = counts.sum(axis=1, keepdims=True)
    return (counts + eps_smooth) / (totals + z * eps_smooth)


def dirichlet_log_pdf(points: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Log density of Dirichlet(alpha) at interior simplex points (n, Z)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    alpha = np.asarray(alpha, dtype=np.float64)
    lognorm = gammaln(alpha.sum()) - gammaln(alpha).sum()
    return lognorm + np.log(points) @ (alpha - 1.0)


def _digamma_inverse(y: np.ndarray) -> np.ndarray:
    """Invert the digamma function (Newton on Minka's starting point)."""
    y = np.asarray(y, dtype=np.float64)
    x = np.where(y >= -2.22, np.exp(y) + 0.5, -1.0 / (y - digamma(1.0)))
    for _ in range(6):
        x = x - (digamma(x) - y) / polygamma(1, x)
    return x


def _moment_match_alpha(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """First/second-moment initializer for the fixed point iteration."""
    w = weights / weights.sum()
    m1 = w @ points
    m2 = w @ (points * points)
    var = np.maximum(m2 - m1**2, 1e-12)
    s_candidates = (m1 - m2) / var
    s = float(np.median(s_candidates))
    if not np.isfinite(s) or s <= 0:
        s = 1.0
    return np.maximum(m1 * s, 1e-8)


def fit_dirichlet_mle(
    points: np.ndarray,
    weights: np.ndarray | None = None,
    max_iters: int = _MLE_MAX_ITERS,
    tol: float = _MLE_TOL,
    alpha_init: np.ndarray | None = None,
) -> np.ndarray:
    """Weighted maximum-likelihood Dirichlet parameters.

    Fixed point: alpha_k <- psi_inv(psi(sum alpha) + mean log p_k).
    Raises :class:`DegenerateComponent` if the iteration diverges.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    if weights is None:
        weights = np.ones(n)
    total = weights.sum()
    log_pbar = (weights @ np.log(points)) / total

    alpha = (
        np.asarray(alpha_init, dtype=np.float64).copy()
        if alpha_init is not None
        else _moment_match_alpha(points, weights)
    )
    for _ in range(max_iters):
        alpha_new = _digamma_inverse(digamma(alpha.sum()) + log_pbar)
        if not (np.isfinite(alpha_new).all() and (alpha_new > 0).all()):
            raise DegenerateComponent("Dirichlet fixed point diverged")
        delta = np.abs(alpha_new - alpha).max()
        alpha = alpha_new
        if delta <= tol * max(1.0, float(np.abs(alpha).max())):
            break
    return alpha


def fit_dirichlet_mixture(
    hists: np.ndarray,
    n_components: int,
    max_iters: int = 200,
    tol: float = 1e-8,
    seed: int = 0,
    eps_smooth: float | None = None,
) -> DirichletMixture:
    """EM fit of a Dirichlet mixture to count histograms.

    The recorded ``objective_trace`` holds the mixture log-likelihood after
    every E-step; it is non-decreasing.
    """
    counts = np.atleast_2d(np.asarray(hists, dtype=np.float64))
    n, z = counts.shape
    if n < n_components:
        raise TooFewHistograms(f"{n} histograms for {n_components} components")
    if (counts.sum(axis=1) == 0).any():
        raise EmptyHistogram("training histograms must be non-empty")
    if eps_smooth is None:
        eps_smooth = 0.5 / z

    points = histograms_to_simplex(counts, eps_smooth)
    model = _fit_mixture_points(points, n_components, max_iters, tol, seed)
    model.eps_smooth = eps_smooth
    return model


def _fit_mixture_points(
    points: np.ndarray, m: int, max_iters: int, tol: float, seed: int
) -> DirichletMixture:
    n, z = points.shape
    rng = np.random.default_rng(subseed(seed, "dirmix"))

    # Random soft assignment, then a first M-step to get parameters.  The
    # effective-sample check only applies to EM-proper responsibilities.
    resp = rng.dirichlet(np.ones(m), size=n)
    weights, alphas = _m_step(points, resp, None, check=False)

    trace: list[float] = []
    prev = -np.inf
    for _ in range(max_iters):
        log_joint = np.log(weights)[None, :] + _component_log_pdfs(points, alphas)
        log_marginal = logsumexp(log_joint, axis=1)
        objective = float(log_marginal.sum())
        trace.append(objective)
        if objective - prev <= tol * max(1.0, abs(prev)):
            break
        prev = objective
        resp = np.exp(log_joint - log_marginal[:, None])
        weights, alphas = _m_step(points, resp, alphas)

    return DirichletMixture(
        weights=weights, alphas=alphas, eps_smooth=0.0, objective_trace=trace
    )


def _component_log_pdfs(points: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    log_points = np.log(points)
    lognorm = gammaln(alphas.sum(axis=1)) - gammaln(alphas).sum(axis=1)
    return lognorm[None, :] + log_points @ (alphas - 1.0).T


def _m_step(
    points: np.ndarray,
    resp: np.ndarray,
    alphas_prev: np.ndarray | None,
    check: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    n, m = resp.shape
    n_eff = resp.sum(axis=0)
    if check and (n_eff < 1.0).any():
        raise DegenerateComponent(
            f"component effective sample sizes {n_eff.round(3)} dropped below 1"
        )
    weights = n_eff / n
    alphas = np.empty((m, points.shape[1]))
    for j in range(m):
        init = alphas_prev[j] if alphas_prev is not None else None
        # Warm-started inner loop: 50 bound-increasing steps per EM round
        # are enough and keep the M-step monotone.
        alphas[j] = fit_dirichlet_mle(
            points, weights=resp[:, j], max_iters=50, alpha_init=init
        )
    return weights, alphas


def dirichlet_mixture_score(model: DirichletMixture, hist: np.ndarray) -> float:
    """Exact mixture log density of one histogram's smoothed simplex point."""
    counts = np.asarray(hist, dtype=np.float64)
    if counts.sum() == 0:
        raise EmptyHistogram("cannot score an empty histogram")
    point = histograms_to_simplex(counts, model.eps_smooth)
    comp = _component_log_pdfs(point, model.alphas)[0]
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    return float(logsumexp(log_w + comp))
