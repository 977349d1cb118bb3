"""Mixture proportion estimation and classification for positive-unlabeled data."""

from .classifier import (
    ClassifierConfig,
    ForestModel,
    LogisticModel,
    cross_fit_scores,
    fit_forest,
    fit_logistic,
    oob_scores,
    train_forest,
)
from .dataset import (
    PcaModel,
    PuDataset,
    load_csv,
    pca_fit,
    pca_transform,
    simulate_gaussian,
    simulate_waveform,
    write_csv,
)
from .empirical import ScoreSet, StepCdf, d_n, ecdf, quantile, remainder
from .errors import ContractError, DataError, DomainError, NumericError, PumixError, SchemaError
from .isotonic import pava, pava_project
from .oracle import alpha0_discrete, alpha0_gspace_discrete
from .patra_sen import (
    AlphaEstimate,
    DistanceCurve,
    distance_curve,
    elbow_select,
    patra_sen_estimate,
    threshold_select,
)
from .pipeline import EstimateConfig, run_pipeline
from .posterior import classify_unlabeled, metrics, posterior_upper_bound
from .roc import roc_sup_estimate, storey_cutoff_estimate, storey_k
from .spy import spy_estimate

__version__ = "0.1.0"
