"""PU data containers, CSV ingestion, PCA and synthetic generators."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError, SchemaError

__all__ = [
    "PuDataset",
    "PcaModel",
    "as_feature_matrix",
    "load_csv",
    "write_csv",
    "simulate_gaussian",
    "simulate_waveform",
    "waveform_bases",
    "waveform_rows",
    "pca_fit",
    "pca_transform",
    "pca_reconstruct",
]


def as_feature_matrix(values, name: str = "features") -> np.ndarray:
    """Validate and return a 2-D float array with no NaN/Inf and at least one row and column."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise SchemaError(f"{name}: expected a 2-D matrix, got {arr.ndim} dimensions")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError(f"{name}: empty dataset")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name}: contains NaN or Inf entries")
    return arr


@dataclass(frozen=True)
class PuDataset:
    """Positive sample ``P`` (m x p) and unlabeled sample ``U`` (n x p).

    ``truth`` holds the hidden class of each unlabeled row when known
    (1 = drawn from the positive law, 0 = drawn from the novel component).
    """

    positives: np.ndarray
    unlabeled: np.ndarray
    truth: np.ndarray | None = None
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        pos = as_feature_matrix(self.positives, "positives")
        unl = as_feature_matrix(self.unlabeled, "unlabeled")
        if pos.shape[1] != unl.shape[1]:
            raise SchemaError(
                f"column count mismatch: positives have {pos.shape[1]}, unlabeled have {unl.shape[1]}"
            )
        object.__setattr__(self, "positives", pos)
        object.__setattr__(self, "unlabeled", unl)
        if self.truth is not None:
            truth = np.asarray(self.truth)
            if truth.shape != (unl.shape[0],):
                raise SchemaError(f"truth has length {truth.size}, expected {unl.shape[0]}")
            if not np.all((truth == 0) | (truth == 1)):
                raise DataError("truth labels must be 0 or 1")
            object.__setattr__(self, "truth", truth.astype(np.int8))
        if self.feature_names is not None and len(self.feature_names) != pos.shape[1]:
            raise SchemaError("feature_names length does not match the column count")

    @property
    def m(self) -> int:
        return self.positives.shape[0]

    @property
    def n(self) -> int:
        return self.unlabeled.shape[0]

    @property
    def dim(self) -> int:
        return self.positives.shape[1]

    @property
    def pi(self) -> float:
        return self.m / (self.m + self.n)

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows of P then U, with pseudo-labels 1 for P and 0 for U."""
        X = np.vstack([self.positives, self.unlabeled])
        y = np.concatenate([np.ones(self.m, dtype=np.int8), np.zeros(self.n, dtype=np.int8)])
        return X, y

    def swapped(self) -> "PuDataset":
        return PuDataset(self.unlabeled, self.positives, None, self.feature_names)

    def select_features(self, columns) -> "PuDataset":
        columns = list(columns)
        names = None
        if self.feature_names is not None:
            names = tuple(self.feature_names[c] for c in columns)
        return PuDataset(self.positives[:, columns], self.unlabeled[:, columns], self.truth, names)

    def with_features(self, positives, unlabeled, feature_names=None) -> "PuDataset":
        return PuDataset(positives, unlabeled, self.truth, feature_names)


# --------------------------------------------------------------------------- CSV


def _read_rows(path: Path) -> tuple[list[str] | None, list[tuple[int, list[str]]]]:
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if any(c.strip() for c in row)]
    if not rows:
        raise DataError(f"{path}: empty dataset")
    header = None
    first = rows[0][1]
    try:
        [float(c) for c in first]
    except ValueError:
        header = [c.strip() for c in first]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: empty dataset")
    return header, rows


def _parse_matrix(path: Path, header, rows) -> np.ndarray:
    ncol = len(header) if header is not None else len(rows[0][1])
    out = np.empty((len(rows), ncol))
    for r, (lineno, row) in enumerate(rows):
        if len(row) != ncol:
            raise SchemaError(f"{path}: row {lineno} has {len(row)} columns, expected {ncol}")
        for c, cell in enumerate(row):
            try:
                out[r, c] = float(cell)
            except ValueError:
                raise DataError(f"{path}: cannot parse {cell!r} at row {lineno}, column {c + 1}") from None
    if not np.all(np.isfinite(out)):
        raise DataError(f"{path}: non-finite value")
    return out


def _column_index(path: Path, header, name: str | None) -> int | None:
    if name is None:
        return None
    if header is None:
        raise SchemaError(f"{path}: column {name!r} requested but the file has no header")
    if name not in header:
        raise SchemaError(f"{path}: no column named {name!r}")
    return header.index(name)


def load_csv(
    path,
    label_column: str | None = None,
    *,
    unlabeled=None,
    truth_column: str | None = None,
) -> PuDataset:
    """Load a PU dataset from CSV.

    Two layouts are accepted. With ``unlabeled`` given, ``path`` holds the
    positive rows and ``unlabeled`` the unlabeled rows. Otherwise ``path`` is
    a single file whose ``label_column`` marks positive rows with 1 and
    unlabeled rows with 0.

    Files are comma delimited with an optional header; a header is assumed
    when the first non-blank line contains a non-numeric cell. ``truth_column``
    names the hidden ground-truth class of unlabeled rows (1 = positive).
    """
    path = Path(path)
    if unlabeled is not None:
        hp, rp = _read_rows(path)
        upath = Path(unlabeled)
        hu, ru = _read_rows(upath)
        P = _parse_matrix(path, hp, rp)
        U = _parse_matrix(upath, hu, ru)
        truth = None
        names_u = hu
        tcol = _column_index(upath, hu, truth_column)
        if tcol is not None:
            truth = U[:, tcol]
            U = np.delete(U, tcol, axis=1)
            names_u = [h for i, h in enumerate(hu) if i != tcol]
            if hp is not None and truth_column in hp:
                P = np.delete(P, hp.index(truth_column), axis=1)
        if P.shape[1] != U.shape[1]:
            raise SchemaError(
                f"column count mismatch: {path} has {P.shape[1]} features, {upath} has {U.shape[1]}"
            )
        names = tuple(names_u) if names_u is not None else None
        return PuDataset(P, U, truth, names)

    if label_column is None:
        raise DomainError("a single-file dataset needs label_column (or pass unlabeled=...)")
    header, rows = _read_rows(path)
    data = _parse_matrix(path, header, rows)
    lcol = _column_index(path, header, label_column)
    tcol = _column_index(path, header, truth_column)
    labels = data[:, lcol]
    if not np.all((labels == 0) | (labels == 1)):
        raise DataError(f"{path}: column {label_column!r} must contain only 0 (unlabeled) or 1 (positive)")
    drop = [lcol] + ([tcol] if tcol is not None else [])
    keep = [i for i in range(data.shape[1]) if i not in drop]
    feats = data[:, keep]
    is_pos = labels == 1
    if not is_pos.any() or is_pos.all():
        raise DataError(f"{path}: need at least one positive and one unlabeled row")
    truth = data[~is_pos, tcol] if tcol is not None else None
    return PuDataset(feats[is_pos], feats[~is_pos], truth, tuple(header[i] for i in keep))


def write_csv(data: PuDataset, positives_path, unlabeled_path, truth_column: str = "truth") -> None:
    """Write the two-file layout read back by :func:`load_csv`."""
    names = list(data.feature_names or [f"x{j + 1}" for j in range(data.dim)])
    with Path(positives_path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        w.writerows([[repr(float(v)) for v in row] for row in data.positives])
    with Path(unlabeled_path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ([truth_column] if data.truth is not None else []))
        for i, row in enumerate(data.unlabeled):
            cells = [repr(float(v)) for v in row]
            if data.truth is not None:
                cells.append(str(int(data.truth[i])))
            w.writerow(cells)


# --------------------------------------------------------------------- simulators


def _check_sizes(m, n, alpha):
    if m < 1 or n < 1:
        raise DomainError("m and n must be at least 1")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")


def simulate_gaussian(
    alpha: float, m: int, n: int, dim: int = 2, separation: float = 4.0, seed: int = 0
) -> PuDataset:
    """Isotropic Gaussian PU sample.

    P ~ N(0, I); each unlabeled row comes from N(separation * e1, I) with
    probability ``alpha`` and from N(0, I) otherwise.
    """
    _check_sizes(m, n, alpha)
    if dim < 1:
        raise DomainError("dim must be at least 1")
    if separation < 0:
        raise DomainError("separation must be non-negative")
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((m, dim))
    truth = (rng.random(n) >= alpha).astype(np.int8)
    U = rng.standard_normal((n, dim))
    U[truth == 0, 0] += separation
    return PuDataset(P, U, truth)


def waveform_bases() -> np.ndarray:
    """The three triangular base waves (rows h1, h2, h3) on j = 1..21."""
    j = np.arange(1, 22)
    h1 = np.maximum(6 - np.abs(j - 11), 0).astype(float)
    h2 = np.maximum(6 - np.abs(j - 4 - 11), 0).astype(float)
    h3 = np.maximum(6 - np.abs(j + 4 - 11), 0).astype(float)
    return np.vstack([h1, h2, h3])


def waveform_rows(u: np.ndarray, positive: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Blend base waves: positive rows use h1/h2, the others h1/h3."""
    h1, h2, h3 = waveform_bases()
    u = np.asarray(u, dtype=float)[:, None]
    other = np.where(np.asarray(positive, dtype=bool)[:, None], h2, h3)
    return u * h1 + (1 - u) * other + noise


def simulate_waveform(alpha: float, m: int, n: int, seed: int = 0, noise_scale: float = 1.0) -> PuDataset:
    """21-feature waveform PU sample (positive class = h1/h2 blend)."""
    _check_sizes(m, n, alpha)
    rng = np.random.default_rng(seed)
    truth = (rng.random(n) >= alpha).astype(np.int8)
    positive = np.concatenate([np.ones(m, dtype=bool), truth == 1])
    N = m + n
    u = rng.random(N)
    noise = noise_scale * rng.standard_normal((N, 21))
    X = waveform_rows(u, positive, noise)
    names = tuple(f"x{j}" for j in range(1, 22))
    return PuDataset(X[:m], X[m:], truth, names)


# ---------------------------------------------------------------------------- PCA


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[0]


def pca_fit(data, k: int) -> PcaModel:
    """Top-``k`` eigenvectors of the sample covariance.

    Each component is signed so its first non-negligible loading is positive.
    """
    X = as_feature_matrix(data)
    rows, cols = X.shape
    if k < 1 or k > min(rows - 1, cols):
        raise DomainError(f"k={k} must be between 1 and min(rows-1, cols)={min(rows - 1, cols)}")
    mean = X.mean(axis=0)
    cov = np.cov(X - mean, rowvar=False, ddof=1).reshape(cols, cols)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    comps = evecs[:, :k].T.copy()
    for row in comps:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1
    total = evals.sum()
    ratio = evals[:k] / total if total > 0 else np.zeros(k)
    return PcaModel(mean, comps, ratio)


def pca_transform(model: PcaModel, data) -> np.ndarray:
    X = as_feature_matrix(data)
    if X.shape[1] != model.mean.size:
        raise SchemaError(f"expected {model.mean.size} columns, got {X.shape[1]}")
    return (X - model.mean) @ model.components.T


def pca_reconstruct(model: PcaModel, scores) -> np.ndarray:
    return np.asarray(scores) @ model.components + model.mean
