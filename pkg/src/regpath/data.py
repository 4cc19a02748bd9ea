"""Dataset loading (Iris CSV, MNIST IDX), splitting and minibatch streaming."""
from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .nn import Batch

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049

MNIST_FILES = (
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
)


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str
    normalization_tag: str | None = None
    n_classes: int | None = None

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"features {self.features.shape} and labels {self.labels.shape} disagree on row count"
            )
        k = self.n_classes if self.n_classes is not None else int(self.labels.max(initial=-1)) + 1
        object.__setattr__(self, "n_classes", k)
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= k):
            raise ValueError(f"labels must lie in [0, {k})")

    def __len__(self) -> int:
        return self.labels.shape[0]

    def as_batch(self) -> Batch:
        return Batch(self.features, self.labels)

    def take(self, rows) -> Dataset:
        rows = np.asarray(rows)
        return replace(self, features=self.features[rows], labels=self.labels[rows])

    def head(self, count: int) -> Dataset:
        return self.take(np.arange(min(count, len(self))))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _open(path: Path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def zscore(ds: Dataset) -> Dataset:
    """Standardize each column to mean 0 / population std 1 over the whole set."""
    if ds.normalization_tag is not None:
        raise ValueError(f"dataset {ds.name!r} is already normalized ({ds.normalization_tag})")
    mu = ds.features.mean(axis=0)
    sd = ds.features.std(axis=0)
    sd[sd == 0] = 1.0
    return replace(ds, features=(ds.features - mu) / sd, normalization_tag="zscore")


def scale_pixels(ds: Dataset) -> Dataset:
    if ds.normalization_tag is not None:
        raise ValueError(f"dataset {ds.name!r} is already normalized ({ds.normalization_tag})")
    return replace(ds, features=ds.features / 255.0, normalization_tag="div255")


def load_iris(path) -> Dataset:
    """Read an Iris-style CSV: 4 numeric feature columns, class name last.

    A non-numeric first row is treated as a header. Class names map to ids in
    order of first appearance; features are z-scored.
    """
    features, labels, classes = [], [], {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise DataFormatError(f"{path}:{lineno}: expected 5 columns, found {len(row)}")
            if lineno == 1 and not _is_number(row[0]):
                continue
            try:
                features.append([float(c) for c in row[:4]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed feature value ({exc})") from None
            labels.append(classes.setdefault(row[4].strip(), len(classes)))
    if not features:
        raise DataFormatError(f"{path}: no data rows")
    ds = Dataset(
        np.array(features, dtype=np.float64),
        np.array(labels, dtype=np.int64),
        name="iris",
        n_classes=len(classes),
    )
    return zscore(ds)


def _read_idx(path, magic: int, header_ints: int) -> tuple[tuple[int, ...], bytes]:
    with _open(path) as fh:
        raw = fh.read()
    if len(raw) < 4 * (1 + header_ints):
        raise DataFormatError(f"{path}: truncated IDX header")
    found, *dims = struct.unpack(f">{1 + header_ints}i", raw[: 4 * (1 + header_ints)])
    if found != magic:
        raise DataFormatError(f"{path}: bad IDX magic number, expected {magic}, found {found}")
    payload = raw[4 * (1 + header_ints) :]
    need = int(np.prod(dims))
    if len(payload) < need:
        raise DataFormatError(f"{path}: truncated payload, expected {need} bytes, found {len(payload)}")
    return tuple(dims), payload[:need]


def read_idx_images(path) -> np.ndarray:
    (count, rows, cols), payload = _read_idx(path, IDX_IMAGES_MAGIC, 3)
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)


def read_idx_labels(path) -> np.ndarray:
    (count,), payload = _read_idx(path, IDX_LABELS_MAGIC, 1)
    return np.frombuffer(payload, dtype=np.uint8)


def load_mnist(images_path, labels_path) -> Dataset:
    """Load one IDX image/label file pair; pixels are scaled to [0, 1]."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    ds = Dataset(images.astype(np.float64), labels.astype(np.int64), name="mnist", n_classes=10)
    return scale_pixels(ds)


def _find(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"{stem}[.gz] not found in {directory}")


def load_mnist_dir(directory) -> Dataset:
    """Concatenate the canonical training and test IDX files found in ``directory``."""
    directory = Path(directory)
    parts = [load_mnist(_find(directory, img), _find(directory, lab)) for img, lab in MNIST_FILES]
    return Dataset(
        np.concatenate([p.features for p in parts]),
        np.concatenate([p.labels for p in parts]),
        name="mnist",
        normalization_tag="div255",
        n_classes=10,
    )


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded shuffle followed by a prefix split of floor(N * train_fraction) rows."""
    perm = np.random.default_rng(spec.seed).permutation(len(ds))
    cut = int(np.floor(len(ds) * spec.train_fraction))
    return ds.take(perm[:cut]), ds.take(perm[cut:])


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([seed, epoch]).permutation(n)


def batch_stream(ds: Dataset, batch_size: int, seed: int, epoch: int) -> list[Batch]:
    """All minibatches of one epoch; the last one may be short."""
    if not 1 <= batch_size <= len(ds):
        raise ValueError(f"batch_size must lie in [1, {len(ds)}], got {batch_size}")
    perm = epoch_permutation(len(ds), seed, epoch)
    return [
        Batch(ds.features[idx], ds.labels[idx])
        for idx in (perm[i : i + batch_size] for i in range(0, len(ds), batch_size))
    ]


def minibatches(ds: Dataset, batch_size: int, seed: int) -> Iterator[Batch]:
    """Endless stream of minibatches, reshuffled every epoch."""
    epoch = 0
    while True:
        yield from batch_stream(ds, batch_size, seed, epoch)
        epoch += 1
