"""SPY baseline: planted positives calibrate a reliable-negative threshold."""

from __future__ import annotations

import math

import numpy as np

from .classifier import ClassifierConfig, ForestModel, fit_classifier
from .dataset import PuDataset
from .errors import DomainError
from .patra_sen import AlphaEstimate

__all__ = ["spy_estimate"]


def spy_estimate(
    data: PuDataset,
    spy_fraction: float = 0.1,
    noise_level: float = 0.15,
    config: ClassifierConfig | None = None,
    seed: int = 0,
) -> tuple[AlphaEstimate, np.ndarray]:
    """Estimate alpha_0 as the fraction of U scoring below the spy threshold.

    ``ceil(spy_fraction * m)`` random positives are moved into U, a classifier
    is fitted on the remaining P versus the augmented U, and the threshold is
    the ``noise_level`` quantile of the spies' scores. Returns the estimate and
    the 0/1 label (1 = positive) of each original unlabeled row.
    """
    if not 0 < spy_fraction <= 0.5:
        raise DomainError("spy_fraction must lie in (0, 0.5]")
    if not 0 < noise_level < 0.5:
        raise DomainError("noise_level must lie in (0, 0.5)")
    config = config or ClassifierConfig()
    rng = np.random.default_rng(seed)
    m, n = data.m, data.n
    n_spies = math.ceil(spy_fraction * m)
    if n_spies >= m:
        raise DomainError("spy_fraction leaves no labeled positives")
    spies = np.zeros(m, dtype=bool)
    spies[rng.choice(m, n_spies, replace=False)] = True

    X = np.vstack([data.positives[~spies], data.positives[spies], data.unlabeled])
    y = np.concatenate([np.ones(m - n_spies), np.zeros(n_spies + n)]).astype(np.int8)
    model = fit_classifier(config, X, y, int(rng.integers(2**31 - 1)))
    if isinstance(model, ForestModel):
        total, count = model.oob_predict(X)
        scores = np.where(count > 0, total / np.maximum(count, 1), model.score(X))
    else:
        scores = model.score(X)
    spy_scores = scores[m - n_spies : m]
    u_scores = scores[m:]
    threshold = float(np.quantile(spy_scores, noise_level, method="inverted_cdf"))
    labels = (u_scores >= threshold).astype(np.int8)
    diag = {"n_spies": n_spies, "threshold": threshold, "noise_level": noise_level}
    if np.ptp(spy_scores) == 0:
        diag["degenerate_threshold"] = True
    alpha = float(np.mean(labels == 0))
    return AlphaEstimate(alpha, "spy", diag), labels
