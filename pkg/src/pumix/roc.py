"""Storey-type estimators built on k(t) = (G(t) - G_L(t)) / (1 - G_L(t)).

k is non-decreasing below the right edge of the labeled score law and its
limit there is alpha_0, which is also its supremum: the ROC estimator is the
sup of k over admissible cutoffs, the cutoff estimator evaluates k at a
data-driven t close to the edge.
"""

from __future__ import annotations

import math

import numpy as np

from .empirical import ScoreSet, StepCdf, ecdf, quantile
from .errors import DomainError
from .patra_sen import AlphaEstimate

__all__ = [
    "storey_k",
    "storey_cutoff_estimate",
    "roc_sup_estimate",
    "roc_curve_points",
    "default_denom_floor",
]


def default_denom_floor(m: int, q: float = 0.2) -> int:
    """max(10, ceil(m**(1 - q))): labeled scores required above a cutoff.

    Same rate as the cutoff estimator's ``1 - m**-q`` quantile, so the
    denominator of k_n cannot shrink faster than the CDF noise.
    """
    return max(10, math.ceil(m ** (1.0 - q)))


def storey_k(G_n: StepCdf, G_Ln: StepCdf, t: float) -> float:
    gl = G_Ln(t)
    if gl >= 1.0:
        raise DomainError(f"G_Ln(t) = 1 at t={t}; k(t) is undefined at or beyond the labeled edge")
    return float(np.clip((G_n(t) - gl) / (1.0 - gl), 0.0, 1.0))


def storey_cutoff_estimate(scores: ScoreSet, q: float = 0.2) -> AlphaEstimate:
    """k_n at ``t_hat = Q_L(1 - m**-q) - 1/n`` (Q_L the labeled quantile function)."""
    if not 0 < q < 0.5:
        raise DomainError(f"q must lie in (0, 1/2), got {q}")
    G_n = ecdf(scores.p0)
    G_Ln = ecdf(scores.p1)
    m, n = scores.m, scores.n
    t_hat = quantile(G_Ln, 1.0 - m ** (-q)) - 1.0 / n
    gn, gl = G_n(t_hat), G_Ln(t_hat)
    diag = {"t_hat": t_hat, "G_n": gn, "G_Ln": gl, "q": q}
    if gn == 0.0:
        return AlphaEstimate(0.0, "storey_cutoff", {**diag, "raw": 0.0, "t_hat_below_unlabeled": True})
    raw = (gn - gl) / (1.0 - gl)
    return AlphaEstimate(float(np.clip(raw, 0.0, 1.0)), "storey_cutoff", {**diag, "raw": float(raw)})


def _k_on_support(scores: ScoreSet):
    t = np.unique(np.concatenate([scores.p0, scores.p1]))
    G_n = ecdf(scores.p0)
    G_Ln = ecdf(scores.p1)
    return t, G_n(t), G_Ln(t)


def roc_sup_estimate(
    scores: ScoreSet, denom_floor: int | None = None, method: str = "roc_sup", q: float = 0.2
) -> AlphaEstimate:
    """Supremum of k_n over score cutoffs with at least ``denom_floor`` labeled scores above.

    ``denom_floor=None`` uses :func:`default_denom_floor`.
    """
    if denom_floor is None:
        denom_floor = default_denom_floor(scores.m, q)
    if denom_floor < 1:
        raise DomainError("denom_floor must be at least 1")
    t, gn, gl = _k_on_support(scores)
    m = scores.m
    # count of labeled scores strictly above t, kept in integer arithmetic
    above = m - np.rint(gl * m)
    ok = above >= denom_floor
    diag = {"denom_floor": int(denom_floor)}
    if not ok.any():
        return AlphaEstimate(0.0, method, {**diag, "no_admissible_t": True})
    k = (gn[ok] - gl[ok]) / (1.0 - gl[ok])
    i = int(np.argmax(k))
    raw = float(k[i])
    return AlphaEstimate(
        float(np.clip(raw, 0.0, 1.0)), method, {**diag, "t_max": float(t[ok][i]), "raw": raw}
    )


def roc_curve_points(scores: ScoreSet) -> np.ndarray:
    """Rows ``(t, G_Ln(t), G_n(t))`` at every distinct score."""
    t, gn, gl = _k_on_support(scores)
    return np.column_stack([t, gl, gn])
