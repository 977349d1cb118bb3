"""Plug-in posterior bound, classification of U and evaluation metrics."""

from __future__ import annotations

import numpy as np

from .empirical import ScoreSet
from .errors import ContractError, DomainError

__all__ = ["posterior_upper_bound", "classify_unlabeled", "metrics"]


def posterior_upper_bound(score, pi: float, alpha0_hat: float):
    """((1 - pi) / pi) * s / (1 - s) * (1 - alpha0_hat), clamped to [0, 1].

    A score of exactly 1 maps to 1 unless alpha0_hat == 1, which zeroes every row.
    """
    if not 0 < pi < 1:
        raise DomainError("pi must lie in (0, 1)")
    if not 0 <= alpha0_hat <= 1:
        raise DomainError("alpha0_hat must lie in [0, 1]")
    s = np.asarray(score, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise DomainError("scores must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        odds = np.where(s < 1, s / np.where(s < 1, 1 - s, 1.0), np.inf)
        val = (1 - pi) / pi * odds * (1 - alpha0_hat)
    val = np.where(s >= 1, 1.0, val)
    if alpha0_hat >= 1:
        val = np.zeros_like(s)
    out = np.clip(val, 0.0, 1.0)
    return out if out.ndim else float(out)


def classify_unlabeled(scores: ScoreSet, alpha0_hat: float) -> np.ndarray:
    """1 (positive class) where the posterior bound exceeds 1/2, else 0."""
    post = posterior_upper_bound(scores.p0, scores.pi, alpha0_hat)
    return (np.asarray(post) > 0.5).astype(np.int8)


def metrics(predicted, truth) -> dict:
    pred = np.asarray(predicted).ravel()
    true = np.asarray(truth).ravel()
    if pred.size == 0:
        raise DomainError("empty input")
    if pred.shape != true.shape:
        raise ContractError("predicted and truth differ in length")
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "accuracy": float(np.mean(pred == true)),
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }
