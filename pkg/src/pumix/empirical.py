"""Empirical score CDFs and the dG_n-weighted L2 distance.

Everything here works on the one-dimensional reduced problem: classifier
scores of the labeled rows (``p1``) and of the unlabeled rows (``p0``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError

__all__ = ["ScoreSet", "StepCdf", "RemainderFn", "ecdf", "quantile", "remainder", "d_n"]

_EPS = 1e-12


@dataclass(frozen=True)
class ScoreSet:
    """Scores of labeled rows (``p1``) and unlabeled rows (``p0``), all in [0, 1]."""

    p1: np.ndarray
    p0: np.ndarray
    pi: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=float).ravel()
        p0 = np.asarray(self.p0, dtype=float).ravel()
        for name, v in (("p1", p1), ("p0", p0)):
            if v.size == 0:
                raise DomainError(f"{name} is empty")
            if not np.all(np.isfinite(v)) or v.min() < 0 or v.max() > 1:
                raise DomainError(f"{name} scores must be finite and lie in [0, 1]")
        if not 0 < self.pi < 1:
            raise DomainError(f"pi must lie in (0, 1), got {self.pi}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p0", p0)

    @property
    def m(self) -> int:
        return self.p1.size

    @property
    def n(self) -> int:
        return self.p0.size


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous empirical CDF stored by its jump points."""

    support: np.ndarray
    cum: np.ndarray
    n_obs: int

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self.cum, prepend=0.0)

    def __call__(self, t):
        idx = np.searchsorted(self.support, t, side="right")
        vals = np.concatenate([[0.0], self.cum])[idx]
        return vals if np.ndim(t) else float(vals)


@dataclass(frozen=True)
class RemainderFn:
    """(G_n - (1 - gamma) G_Ln) / gamma on the jump points of G_n."""

    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    gamma: float


def ecdf(scores) -> StepCdf:
    x = np.asarray(scores, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("cannot build an empirical CDF from an empty sample")
    if not np.all(np.isfinite(x)):
        raise DomainError("scores must be finite")
    support, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts) / x.size
    cum[-1] = 1.0
    return StepCdf(support, cum, x.size)


def quantile(cdf: StepCdf, p: float) -> float:
    """Generalized inverse ``inf{t : F(t) >= p}``; p <= 0 gives the smallest jump point."""
    idx = int(np.searchsorted(cdf.cum, p - _EPS, side="left"))
    return float(cdf.support[min(idx, cdf.support.size - 1)])


def remainder(G_n: StepCdf, G_Ln: StepCdf, gamma: float) -> RemainderFn:
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    grid = G_n.support
    values = (G_n.cum - (1.0 - gamma) * G_Ln(grid)) / gamma
    return RemainderFn(grid, values, G_n.masses, float(gamma))


def d_n(f, h, weights) -> float:
    """sqrt(sum_i w_i (f_i - h_i)^2) for grid functions sharing one grid."""
    f = np.asarray(f, dtype=float)
    h = np.asarray(h, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (f.shape == h.shape == w.shape) or f.ndim != 1:
        raise ContractError(f"grid mismatch: shapes {f.shape}, {h.shape}, {w.shape}")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ContractError("weights must be non-negative and sum to 1")
    return float(np.sqrt(np.sum(w * (f - h) ** 2)))
