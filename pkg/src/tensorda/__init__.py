"""Supervised tensor decomposition toolkit.

Higher-order discriminant analysis (HODA) and its block-term generalization
(BTTDA, with the all-rank-1 PARAFACDA special case), a least-squares forward
model for reconstruction and interpretation, a whitening/selection/LDA
feature pipeline, and a cross-validated evaluation harness with synthetic
data generation.
"""

from .bttda import BTTDA, PARAFACDA, Block, nmse, select_block_ranks
from .evaluation import (
    MetricsRecord,
    TuningResult,
    run_evaluation,
    score_metric,
    stratified_kfold,
    tune_hyperparameters,
)
from .forward import ActivationPatterns, fit_activation_patterns, reconstruct
from .hoda import HODA, SingularFitError, fisher_ratio, init_projections
from .pipeline import (
    BTTDAClassifier,
    FisherScoreSelector,
    ShrinkageLDA,
    WhiteningPCA,
    class_contrast,
    fisher_scores,
    select_discriminant,
)
from .scatter import (
    ClassStats,
    EigenResult,
    class_statistics,
    leading_eigenvectors,
    ledoit_wolf_shrinkage,
    partial_scatters,
    shrink_scatter,
    total_scatter,
)
from .synthetic import EffectTerm, SyntheticConfig, generate_synthetic
from .tensor_ops import (
    devectorize,
    fold,
    frobenius_norm,
    mode_product,
    multi_mode_product,
    unfold,
    vectorize,
)

__version__ = "0.1.0"

__all__ = [
    "BTTDA",
    "PARAFACDA",
    "Block",
    "BTTDAClassifier",
    "HODA",
    "SingularFitError",
    "ActivationPatterns",
    "ClassStats",
    "EigenResult",
    "EffectTerm",
    "FisherScoreSelector",
    "MetricsRecord",
    "ShrinkageLDA",
    "SyntheticConfig",
    "TuningResult",
    "WhiteningPCA",
    "class_contrast",
    "class_statistics",
    "devectorize",
    "fisher_ratio",
    "fisher_scores",
    "fit_activation_patterns",
    "fold",
    "frobenius_norm",
    "generate_synthetic",
    "init_projections",
    "leading_eigenvectors",
    "ledoit_wolf_shrinkage",
    "mode_product",
    "multi_mode_product",
    "nmse",
    "partial_scatters",
    "reconstruct",
    "run_evaluation",
    "score_metric",
    "select_block_ranks",
    "select_discriminant",
    "shrink_scatter",
    "stratified_kfold",
    "total_scatter",
    "tune_hyperparameters",
    "unfold",
    "vectorize",
]
