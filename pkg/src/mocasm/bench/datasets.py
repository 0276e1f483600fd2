"""Synthetic Gaussian blob datasets and the bundled real-world ones."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, ParameterError


@dataclass(frozen=True)
class BlobSpec:
    count: int
    center: tuple
    spread: float


# 4 x 100 points in 3-D, one blob at the origin and one on each axis
SPHERICAL_3_4 = (
    BlobSpec(100, (0.0, 0.0, 0.0), 0.5),
    BlobSpec(100, (10.0, 0.0, 0.0), 0.5),
    BlobSpec(100, (0.0, 10.0, 0.0), 0.5),
    BlobSpec(100, (0.0, 0.0, 10.0), 0.5),
)

# 76 points in 2-D, uneven blob sizes
DATASET_3_2 = (
    BlobSpec(13, (0.0, 0.0), 0.5),
    BlobSpec(43, (10.0, 0.0), 0.5),
    BlobSpec(20, (5.0, 8.0), 0.5),
)

PRESETS = {"spherical_3_4": SPHERICAL_3_4, "dataset_3_2": DATASET_3_2}
BUILTINS = ("iris", "wine")


def generate_gaussian_blobs(blobs, seed: int = 0) -> Dataset:
    """Isotropic Gaussian blobs; labels are blob indices."""
    blobs = tuple(blobs)
    if not blobs:
        raise ParameterError("at least one blob is required")
    d = len(blobs[0].center)
    for b in blobs:
        if b.count < 1:
            raise ParameterError(f"blob count must be positive, got {b.count}")
        if not b.spread > 0:
            raise ParameterError(f"blob spread must be positive, got {b.spread}")
        if len(b.center) != d:
            raise ParameterError("all blob centres must have the same dimension")
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(b.center, b.spread, size=(b.count, d)) for b in blobs])
    y = np.repeat(np.arange(len(blobs)), [b.count for b in blobs])
    return Dataset(X, y)


def parse_blob_spec(text: str) -> tuple:
    """Parse ``"count:x,y,...:spread;..."`` into blob specs."""
    blobs = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        try:
            count, center, spread = part.split(":")
            blobs.append(
                BlobSpec(int(count), tuple(float(c) for c in center.split(",")), float(spread))
            )
        except ValueError:
            raise ParameterError(f"bad blob spec {part!r}; expected count:x,y,...:spread") from None
    return tuple(blobs)


def load_builtin(name: str) -> Dataset:
    """Iris or Wine from the copies shipped with scikit-learn."""
    from sklearn import datasets

    loaders = {"iris": datasets.load_iris, "wine": datasets.load_wine}
    if name not in loaders:
        raise ParameterError(f"unknown builtin dataset {name!r}; choose from {BUILTINS}")
    X, y = loaders[name](return_X_y=True)
    return Dataset(X, y)


def load_named(name: str, seed: int = 0) -> Dataset:
    if name in PRESETS:
        return generate_gaussian_blobs(PRESETS[name], seed)
    return load_builtin(name)
