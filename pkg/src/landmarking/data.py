"""Datasets: synthetic manifolds, CSV ingestion, noise injection and PCA.

Samples are stored column-wise, ``samples`` has shape ``(D, N)`` and
``labels`` (when present) has shape ``(d, N)``.  Rows of the CSV format are
samples, so readers and writers transpose at the boundary.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidArgumentError, ParseError

SYNTHETIC_KINDS = ("swiss_roll", "s_curve", "plane_patch", "grid2d")

# 17 significant digits round-trip every IEEE double exactly.
FLOAT_FORMAT = "%.17g"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Point cloud with optional regression labels.

    Parameters
    ----------
    samples : ndarray of shape (D, N)
        Ambient coordinates, one column per sample.
    labels : ndarray of shape (d, N), optional
        Regression targets (for synthetic data, the latent coordinates).
    name : str
        Free-form provenance tag.
    seed : int, optional
        Generation seed; ``None`` for data read from disk.
    """

    samples: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = ""
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidArgumentError(
                f"samples must be a non-empty 2-D array (D, N), got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidArgumentError("samples contain non-finite values")
        object.__setattr__(self, "samples", _frozen(x))
        if self.labels is not None:
            z = np.asarray(self.labels, dtype=float)
            if z.ndim == 1:
                z = z[None, :]
            if z.ndim != 2 or z.shape[1] != x.shape[1]:
                raise InvalidArgumentError(
                    f"labels must have shape (d, {x.shape[1]}), got {z.shape}")
            if not np.all(np.isfinite(z)):
                raise InvalidArgumentError("labels contain non-finite values")
            object.__setattr__(self, "labels", _frozen(z))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.samples.shape[0]

    @property
    def label_dim(self) -> int:
        return 0 if self.labels is None else self.labels.shape[0]

    def with_samples(self, samples: np.ndarray, name: Optional[str] = None) -> "Dataset":
        return Dataset(samples, self.labels, self.name if name is None else name,
                       self.seed, dict(self.meta))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if (self.labels is None) != (other.labels is None):
            return False
        same_labels = self.labels is None or np.array_equal(self.labels, other.labels)
        return np.array_equal(self.samples, other.samples) and same_labels

    __hash__ = None


@dataclass(frozen=True)
class NoiseSpec:
    """Per-entry i.i.d. Gaussian noise of the given variance."""

    variance: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.variance) or self.variance < 0:
            raise InvalidArgumentError(f"noise variance must be >= 0, got {self.variance}")


def generate_synthetic(kind: str, n: int, seed: int = 0,
                       ambient_noise: float = 0.0) -> Dataset:
    """Sample a synthetic manifold whose latent coordinates serve as labels.

    ``swiss_roll``, ``s_curve`` and ``plane_patch`` live in R^3 with 2-D
    latent labels.  ``grid2d`` is a unit-spaced lattice in R^2 filled row by
    row (``ceil(sqrt(n))`` points per row); its labels equal its samples.
    ``ambient_noise`` is the standard deviation of Gaussian noise added to the
    samples only.
    """
    if kind not in SYNTHETIC_KINDS:
        raise InvalidArgumentError(f"unknown synthetic kind {kind!r}; choose from {SYNTHETIC_KINDS}")
    n = int(n)
    if n < 4:
        raise InvalidArgumentError(f"n must be >= 4, got {n}")
    if ambient_noise < 0:
        raise InvalidArgumentError(f"ambient_noise must be >= 0, got {ambient_noise}")
    rng = np.random.default_rng(seed)

    if kind == "swiss_roll":
        t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
        h = 21.0 * rng.random(n)
        x = np.vstack([t * np.cos(t), h, t * np.sin(t)])
        z = np.vstack([t, h])
    elif kind == "s_curve":
        t = 3.0 * np.pi * (rng.random(n) - 0.5)
        h = 2.0 * rng.random(n)
        x = np.vstack([np.sin(t), h, np.sign(t) * (np.cos(t) - 1.0)])
        z = np.vstack([t, h])
    elif kind == "plane_patch":
        z = rng.random((2, n))
        basis, _ = np.linalg.qr(rng.standard_normal((3, 2)))
        offset = rng.standard_normal((3, 1))
        x = basis @ z + offset
    else:
        side = int(np.ceil(np.sqrt(n)))
        idx = np.arange(n)
        x = np.vstack([idx % side, idx // side]).astype(float)
        z = x.copy()

    if ambient_noise > 0:
        x = x + ambient_noise * rng.standard_normal(x.shape)
    return Dataset(x, z, name=kind, seed=seed,
                   meta={"kind": kind, "n": n, "ambient_noise": ambient_noise})


def add_noise(ds: Dataset, spec: NoiseSpec) -> Dataset:
    """Return a copy of ``ds`` with Gaussian noise of variance ``spec.variance`` added."""
    if spec.variance == 0:
        return ds.with_samples(ds.samples)
    rng = np.random.default_rng(spec.seed)
    noise = np.sqrt(spec.variance) * rng.standard_normal(ds.samples.shape)
    return ds.with_samples(ds.samples + noise)


def principal_directions(ds: Dataset, target_dim: int) -> np.ndarray:
    """Top ``target_dim`` eigenvectors of the sample covariance, shape (D, target_dim).

    Each direction is sign-fixed so that its largest-magnitude entry is
    positive.
    """
    D, N = ds.samples.shape
    if not 1 <= target_dim <= min(D, N):
        raise InvalidArgumentError(
            f"target_dim must lie in [1, {min(D, N)}], got {target_dim}")
    xc = ds.samples - ds.samples.mean(axis=1, keepdims=True)
    cov = xc @ xc.T / N
    w, v = np.linalg.eigh(cov)
    v = v[:, ::-1][:, :target_dim]
    return fix_signs(v)


def fix_signs(v: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    v = np.array(v, dtype=float, copy=True)
    rows = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[rows, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def pca(ds: Dataset, target_dim: int) -> Dataset:
    """Project centered samples onto the top principal directions (no whitening)."""
    v = principal_directions(ds, target_dim)
    xc = ds.samples - ds.samples.mean(axis=1, keepdims=True)
    return ds.with_samples(v.T @ xc, name=f"{ds.name}+pca{target_dim}")


def save_dataset(ds: Dataset, path: str | os.PathLike, labels: Optional[np.ndarray] = None) -> None:
    """Write ``ds`` as CSV, one sample per row, label columns last.

    ``labels`` overrides ``ds.labels`` (used to emit predictions).
    """
    z = ds.labels if labels is None else np.asarray(labels, dtype=float)
    rows = ds.samples.T
    with open(path, "w") as fh:
        if z is not None:
            fh.write(f"# d={z.shape[0]}\n")
            rows = np.hstack([rows, z.T])
        for row in rows:
            fh.write(",".join(FLOAT_FORMAT % v for v in row))
            fh.write("\n")


def load_dataset(path: str | os.PathLike, has_labels: Optional[bool] = None,
                 label_dim: Optional[int] = None) -> Dataset:
    """Read a CSV dataset.

    When ``has_labels`` is None it is inferred from a ``# d=<label_dim>``
    header; an explicit ``label_dim`` wins over the header.
    """
    if not os.path.exists(path):
        raise ParseError(f"{path}: no such file")
    header_d = None
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("d="):
                    try:
                        header_d = int(body[2:])
                    except ValueError:
                        raise ParseError(f"{path}:{lineno}: malformed header {line!r}") from None
                continue
            cells = line.split(",")
            if rows and len(cells) != len(rows[0]):
                raise ParseError(
                    f"{path}: row {lineno}, column {len(cells)}: ragged row, expected "
                    f"{len(rows[0])} columns, got {len(cells)}")
            values = []
            for col, cell in enumerate(cells, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {lineno}, column {col}: non-numeric cell {cell!r}") from None
                if not np.isfinite(v):
                    raise ParseError(f"{path}: row {lineno}, column {col}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")

    table = np.array(rows)
    ncol = table.shape[1]
    if has_labels is None:
        has_labels = header_d is not None and header_d > 0
    if has_labels:
        d = header_d if label_dim is None else label_dim
        if d is None or d < 1 or d >= ncol:
            raise InvalidArgumentError(
                f"label_dim must lie in [1, {ncol - 1}] for {ncol} columns, got {d}")
        return Dataset(table[:, :ncol - d].T, table[:, ncol - d:].T,
                       name=os.path.basename(str(path)))
    return Dataset(table.T, None, name=os.path.basename(str(path)))
