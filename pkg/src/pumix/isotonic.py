"""Weighted isotonic regression onto [0, 1]-valued non-decreasing vectors."""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DomainError

__all__ = ["pava", "pava_project", "project_with_zero_weights"]


def pava(y, w) -> np.ndarray:
    """Weighted least-squares non-decreasing fit by pooling adjacent violators."""
    y = np.asarray(y, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if y.size != w.size:
        raise ContractError(f"y has {y.size} entries but w has {w.size}")
    if y.size == 0:
        raise DomainError("empty input")
    if np.any(~(w > 0)):
        raise DomainError("weights must be strictly positive")

    # Block stack: weighted mean, total weight, length.
    means: list[float] = []
    weights: list[float] = []
    sizes: list[int] = []
    for yi, wi in zip(y.tolist(), w.tolist()):
        mu, wt, sz = yi, wi, 1
        while means and means[-1] > mu:
            pw = weights.pop()
            wt_new = wt + pw
            mu = (means.pop() * pw + mu * wt) / wt_new
            wt = wt_new
            sz += sizes.pop()
        means.append(mu)
        weights.append(wt)
        sizes.append(sz)
    return np.repeat(np.asarray(means), sizes)


def pava_project(y, w) -> np.ndarray:
    """Projection onto non-decreasing vectors in [0, 1] under the w-weighted L2 norm.

    Clamping the unconstrained isotonic fit gives the box-constrained optimum.
    """
    return np.clip(pava(y, w), 0.0, 1.0)


def project_with_zero_weights(y, w) -> np.ndarray:
    """Like :func:`pava_project` but allows zero weights.

    Zero-weight points carry no mass, so they are fitted from the positive
    ones and filled piecewise-constant from the left (leading ones take the
    first fitted value).
    """
    y = np.asarray(y, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if y.size != w.size:
        raise ContractError(f"y has {y.size} entries but w has {w.size}")
    if np.any(w < 0):
        raise DomainError("weights must be non-negative")
    pos = w > 0
    if not pos.any():
        raise DomainError("at least one weight must be positive")
    fitted = pava_project(y[pos], w[pos])
    idx = np.cumsum(pos) - 1
    return fitted[np.maximum(idx, 0)]
