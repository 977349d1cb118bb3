"""End-to-end workflow: pseudo-label, score with a classifier, estimate, classify."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .classifier import (
    ClassifierConfig,
    ForestModel,
    cross_fit_scores,
    oob_scores,
    split_scores,
    train_forest,
)
from .dataset import PuDataset
from .empirical import ScoreSet
from .errors import DomainError
from .patra_sen import AlphaEstimate, DistanceCurve, distance_curve, elbow_select, threshold_select
from .posterior import classify_unlabeled, metrics
from .roc import roc_sup_estimate, storey_cutoff_estimate
from .spy import spy_estimate

__all__ = [
    "METHOD_NAMES",
    "EstimateConfig",
    "MethodResult",
    "PipelineResult",
    "parse_methods",
    "run_pipeline",
    "score_dataset",
]

# CLI name -> AlphaEstimate tag
METHOD_NAMES = {
    "c-patra-sen": "patra_sen_elbow",
    "c-patra-sen-cn": "patra_sen_cn",
    "c-roc": "roc_sup",
    "storey": "storey_cutoff",
    "roc": "roc_split",
    "spy": "spy",
}


def parse_methods(spec) -> tuple[str, ...]:
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    names = [s.strip().lower() for s in names if s.strip()]
    if not names:
        raise DomainError("no method given")
    for s in names:
        if s not in METHOD_NAMES:
            raise DomainError(f"unknown method {s!r}; choose from {', '.join(METHOD_NAMES)}")
    return tuple(dict.fromkeys(names))


@dataclass(frozen=True)
class EstimateConfig:
    methods: tuple[str, ...] = ("c-patra-sen", "c-roc")
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    grid_step: float = 0.005
    q: float = 0.2
    denom_floor: int | None = None
    c0: float = 0.1
    beta_eta: float = 0.25
    spy_fraction: float = 0.1
    noise_level: float = 0.15
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", parse_methods(self.methods))

    def with_methods(self, methods) -> "EstimateConfig":
        return replace(self, methods=parse_methods(methods))


@dataclass
class MethodResult:
    name: str
    estimate: AlphaEstimate
    labels: np.ndarray
    wall_time: float
    metrics: dict | None = None


@dataclass
class PipelineResult:
    scores: ScoreSet | None
    results: dict[str, MethodResult]
    curve: DistanceCurve | None = None
    forest: ForestModel | None = None
    score_time: float = 0.0

    def alpha(self, name: str) -> float:
        return self.results[name].estimate.alpha0_hat


def score_dataset(data: PuDataset, classifier: ClassifierConfig, seed: int = 0, folds: int = 5):
    """Out-of-bag forest scores, or cross-fitted scores for non-bagged classifiers."""
    if classifier.kind == "forest":
        forest = train_forest(
            data, classifier.n_trees, classifier.mtry, classifier.min_leaf, seed, classifier.n_jobs
        )
        return oob_scores(forest, data), forest
    return cross_fit_scores(data, classifier, folds, seed), None


def run_pipeline(data: PuDataset, config: EstimateConfig | None = None) -> PipelineResult:
    config = config or EstimateConfig()
    needs_scores = any(name not in ("roc", "spy") for name in config.methods)
    scores = forest = curve = None
    score_time = 0.0
    if needs_scores:
        t0 = time.perf_counter()
        scores, forest = score_dataset(data, config.classifier, config.seed, config.folds)
        score_time = time.perf_counter() - t0

    results: dict[str, MethodResult] = {}
    for name in config.methods:
        t0 = time.perf_counter()
        if name in ("c-patra-sen", "c-patra-sen-cn"):
            if curve is None:
                curve = distance_curve(scores, config.grid_step)
            if name == "c-patra-sen":
                est = elbow_select(curve)
            else:
                est = threshold_select(scores, config.c0, config.beta_eta, curve=curve)
            labels = classify_unlabeled(scores, est.alpha0_hat)
        elif name == "c-roc":
            est = roc_sup_estimate(scores, config.denom_floor, q=config.q)
            labels = classify_unlabeled(scores, est.alpha0_hat)
        elif name == "storey":
            est = storey_cutoff_estimate(scores, config.q)
            labels = classify_unlabeled(scores, est.alpha0_hat)
        elif name == "roc":
            split_cfg = replace(config.classifier, kind="logistic")
            held, model = split_scores(data, split_cfg, config.seed)
            est = roc_sup_estimate(held, config.denom_floor, method="roc_split", q=config.q)
            full = ScoreSet(
                np.clip(model.score(data.positives), 0, 1),
                np.clip(model.score(data.unlabeled), 0, 1),
                data.pi,
            )
            labels = classify_unlabeled(full, est.alpha0_hat)
        else:
            est, labels = spy_estimate(
                data, config.spy_fraction, config.noise_level, config.classifier, config.seed
            )
        elapsed = time.perf_counter() - t0
        if name not in ("roc", "spy"):
            elapsed += score_time
        res = MethodResult(name, est, labels, elapsed)
        if data.truth is not None:
            res.metrics = metrics(labels, data.truth)
        results[name] = res
    return PipelineResult(scores, results, curve, forest, score_time)
