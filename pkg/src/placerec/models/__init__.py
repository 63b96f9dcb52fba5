"""Per-class generative models over word-count histograms."""

from .bank import (
    ClassModelBank,
    classify,
    default_config,
    load_bank,
    save_bank,
    score_histogram,
    train_bank,
)
from .counting_grid import CountingGrid, counting_grid_score, fit_counting_grid
from .dirichlet import (
    DirichletMixture,
    dirichlet_log_pdf,
    dirichlet_mixture_score,
    fit_dirichlet_mixture,
    fit_dirichlet_mle,
    histograms_to_simplex,
)
from .lda import LdaModel, fit_lda, lda_free_energy

__all__ = [
    "ClassModelBank",
    "CountingGrid",
    "DirichletMixture",
    "LdaModel",
    "classify",
    "counting_grid_score",
    "default_config",
    "dirichlet_log_pdf",
    "dirichlet_mixture_score",
    "fit_counting_grid",
    "fit_dirichlet_mixture",
    "fit_dirichlet_mle",
    "fit_lda",
    "histograms_to_simplex",
    "lda_free_energy",
    "load_bank",
    "save_bank",
    "score_histogram",
    "train_bank",
]
