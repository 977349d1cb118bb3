"""Population alpha_0 on finite supports, by brute force.

Two independent routes: directly in feature space from the atom masses, and
through the distributions of the Bayes P-vs-U classifier score. They must
agree for every instance.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["alpha0_discrete", "alpha0_gspace_discrete", "gamma_scan"]

SCAN_RESOLUTION = 1e-4
_TOL = 1e-12


def _check_pmfs(f, f1):
    f = np.asarray(f, dtype=float).ravel()
    f1 = np.asarray(f1, dtype=float).ravel()
    if f.shape != f1.shape:
        raise DomainError("f and f1 must have the same support size")
    if np.any(f < 0) or np.any(f1 < 0):
        raise DomainError("probabilities must be non-negative")
    if abs(f.sum() - 1) > _TOL or abs(f1.sum() - 1) > _TOL:
        raise DomainError("f and f1 must each sum to 1")
    if not np.any(f1 > 0):
        raise DomainError("f1 is identically zero")
    return f, f1


def gamma_scan(increments_g, increments_gl, resolution: float = SCAN_RESOLUTION) -> float:
    """Smallest grid gamma with every jump of ``G - (1 - gamma) G_L`` non-negative.

    Returns 0 when ``G - G_L`` itself is non-decreasing (the gamma -> 0 limit).
    """
    g = np.asarray(increments_g, dtype=float)
    gl = np.asarray(increments_gl, dtype=float)
    if np.all(g - gl >= -_TOL):
        return 0.0
    k = int(round(1.0 / resolution))
    gammas = np.arange(1, k + 1) / k
    chunk = max(1, 2**22 // max(g.size, 1))
    for start in range(0, k, chunk):
        block = gammas[start : start + chunk]
        feasible = np.all(g[None, :] - (1.0 - block[:, None]) * gl[None, :] >= -_TOL, axis=1)
        if feasible.any():
            return float(block[np.argmax(feasible)])
    return 1.0


def alpha0_discrete(f, f1, cross_check: bool = True) -> float:
    """alpha_0 = 1 - min over atoms with f1 > 0 of f / f1."""
    f, f1 = _check_pmfs(f, f1)
    on = f1 > 0
    exact = float(np.clip(1.0 - np.min(f[on] / f1[on]), 0.0, 1.0))
    if cross_check:
        scanned = gamma_scan(f, f1)
        if abs(scanned - exact) > SCAN_RESOLUTION + 1e-9:
            raise AssertionError(f"closed form {exact} disagrees with grid scan {scanned}")
    return exact


def alpha0_gspace_discrete(f, f1, pi: float) -> float:
    """alpha_0 computed from the score laws G and G_L of the Bayes classifier.

    The score is ``C(x) = pi f1 / (pi f1 + (1 - pi) f)``; atoms sharing a score
    value are merged into one jump before the gamma scan.
    """
    f, f1 = _check_pmfs(f, f1)
    if not 0 < pi < 1:
        raise DomainError("pi must lie in (0, 1)")
    live = (f > 0) | (f1 > 0)
    f, f1 = f[live], f1[live]
    c = pi * f1 / (pi * f1 + (1.0 - pi) * f)
    values, inverse = np.unique(c, return_inverse=True)
    jump_g = np.bincount(inverse, weights=f, minlength=values.size)
    jump_gl = np.bincount(inverse, weights=f1, minlength=values.size)
    return gamma_scan(jump_g, jump_gl)
