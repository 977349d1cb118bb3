"""Isotonic-projection mixture proportion estimator on classifier scores.

For each gamma the remainder ``(G_n - (1 - gamma) G_Ln) / gamma`` is projected
onto the set of CDFs under the dG_n-weighted L2 norm; the scaled distance
``gamma * d_n`` is convex and non-increasing in gamma and vanishes (up to
noise) once gamma reaches the identifiable lower bound alpha_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .empirical import ScoreSet, ecdf
from .errors import DomainError
from .isotonic import pava_project

__all__ = [
    "AlphaEstimate",
    "DistanceCurve",
    "distance_at_gamma",
    "distance_curve",
    "elbow_select",
    "threshold_select",
    "patra_sen_estimate",
]

METHODS = ("patra_sen_elbow", "patra_sen_cn", "storey_cutoff", "roc_sup", "roc_split", "spy")
FLAT_TOL = 1e-12


@dataclass(frozen=True)
class AlphaEstimate:
    alpha0_hat: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method tag {self.method!r}")
        if not 0.0 <= self.alpha0_hat <= 1.0:
            raise DomainError(f"alpha0_hat={self.alpha0_hat} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"method": self.method, "alpha0_hat": self.alpha0_hat, "diagnostics": self.diagnostics}


@dataclass(frozen=True)
class DistanceCurve:
    gammas: np.ndarray
    values: np.ndarray
    step: float

    def second_difference(self) -> np.ndarray:
        """Central second differences; NaN at the two end points."""
        v = self.values
        out = np.full(v.shape, np.nan)
        out[1:-1] = v[:-2] - 2.0 * v[1:-1] + v[2:]
        return out


class _Reduced:
    """G_n and G_Ln evaluated once on the dG_n support."""

    def __init__(self, scores: ScoreSet):
        G_n = ecdf(scores.p0)
        G_Ln = ecdf(scores.p1)
        self.weights = G_n.masses
        self.g = G_n.cum
        self.gl = G_Ln(G_n.support)

    def scaled_distance(self, gamma: float) -> float:
        r = (self.g - (1.0 - gamma) * self.gl) / gamma
        proj = pava_project(r, self.weights)
        return gamma * math.sqrt(float(np.sum(self.weights * (r - proj) ** 2)))


def distance_at_gamma(scores: ScoreSet, gamma: float) -> float:
    """d_n between the remainder at ``gamma`` and its projection onto CDFs (unscaled)."""
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    return _Reduced(scores).scaled_distance(gamma) / gamma


def _grid(step: float) -> np.ndarray:
    k = int(round(1.0 / step))
    if abs(k * step - 1.0) > 1e-9:
        raise DomainError(f"grid_step={step} must divide 1")
    return np.arange(1, k + 1) / k


def distance_curve(scores: ScoreSet, grid_step: float = 0.005) -> DistanceCurve:
    """``gamma * d_n`` on the grid ``{step, 2 step, ..., 1}``."""
    if not 0 < grid_step <= 0.5:
        raise DomainError(f"grid_step must lie in (0, 0.5], got {grid_step}")
    gammas = _grid(grid_step)
    red = _Reduced(scores)
    values = np.array([red.scaled_distance(g) for g in gammas])
    # rounding noise around an exact zero would break the suffix structure
    values[values < FLAT_TOL] = 0.0
    return DistanceCurve(gammas, values, float(grid_step))


def elbow_select(curve: DistanceCurve) -> AlphaEstimate:
    """Grid gamma maximizing the central second difference of the curve."""
    if curve.values.size < 5:
        raise DomainError("elbow selection needs at least 5 grid points")
    diag = {"grid_step": curve.step}
    if np.max(np.abs(curve.values)) <= FLAT_TOL:
        return AlphaEstimate(0.0, "patra_sen_elbow", {**diag, "flat_curve": True})
    d2 = curve.second_difference()[1:-1]
    i = int(np.argmax(d2)) + 1
    gamma = float(curve.gammas[i])
    return AlphaEstimate(
        gamma, "patra_sen_elbow", {**diag, "elbow_gamma": gamma, "max_second_difference": float(d2[i - 1])}
    )


def threshold_select(
    scores: ScoreSet,
    c0: float = 0.1,
    beta_eta: float = 0.25,
    grid_step: float = 0.005,
    curve: DistanceCurve | None = None,
) -> AlphaEstimate:
    """Smallest grid gamma with ``gamma * d_n <= c0 log(n) / n**beta_eta``."""
    if not c0 > 0:
        raise DomainError("c0 must be positive")
    if not 0 < beta_eta < 0.5:
        raise DomainError("beta_eta must lie in (0, 1/2)")
    if curve is None:
        curve = distance_curve(scores, grid_step)
    n = scores.n
    c_n = c0 * math.log(n) if n > 1 else c0
    thr = c_n / n**beta_eta
    feasible = curve.values <= thr
    diag = {"c_n": c_n, "threshold": thr, "grid_step": curve.step}
    if not feasible[-1]:
        return AlphaEstimate(1.0, "patra_sen_cn", {**diag, "no_feasible_gamma": True})
    # Feasible set is a suffix of the grid; take the start of the trailing run.
    infeasible = np.flatnonzero(~feasible)
    i = int(infeasible[-1]) + 1 if infeasible.size else 0
    return AlphaEstimate(float(curve.gammas[i]), "patra_sen_cn", diag)


def patra_sen_estimate(scores: ScoreSet, grid_step: float = 0.005) -> tuple[AlphaEstimate, DistanceCurve]:
    curve = distance_curve(scores, grid_step)
    return elbow_select(curve), curve
