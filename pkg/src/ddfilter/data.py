"""Labeled sample collections and per-task class splits."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, EmptyClassError


class Task(Enum):
    """The two binary labeling tasks attached to every dataset."""

    A = "a"
    B = "b"


def _as_labels(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (n,):
        raise DimensionMismatchError(
            f"{name} must have shape ({n},), got {arr.shape}"
        )
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 values")
    return arr.astype(np.int64)


@dataclass
class Dataset:
    """A d-by-N sample matrix with two binary label vectors.

    Each column of ``samples`` is one data vector.  ``labels_a`` and
    ``labels_b`` assign every column a class for tasks A and B, and
    ``global_mean`` caches the arithmetic mean over all columns.
    """

    samples: np.ndarray
    labels_a: np.ndarray
    labels_b: np.ndarray
    global_mean: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise DimensionMismatchError("samples must be a d-by-N matrix")
        d, n = self.samples.shape
        if n < 2:
            raise ValueError("a dataset needs at least two samples")
        self.labels_a = _as_labels(self.labels_a, n, "labels_a")
        self.labels_b = _as_labels(self.labels_b, n, "labels_b")
        self.global_mean = np.asarray(self.global_mean, dtype=np.float64)
        if self.global_mean.shape != (d,):
            raise DimensionMismatchError(
                f"global_mean must have shape ({d},), got {self.global_mean.shape}"
            )

    @classmethod
    def from_arrays(cls, samples, labels_a, labels_b, meta=None) -> "Dataset":
        """Build a dataset, computing the global mean from the columns."""
        samples = np.ascontiguousarray(samples, dtype=np.float64)
        if samples.ndim != 2:
            raise DimensionMismatchError("samples must be a d-by-N matrix")
        return cls(samples, labels_a, labels_b, samples.mean(axis=1),
                   meta if meta is not None else {})

    @property
    def dim(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def labels(self, task: Task) -> np.ndarray:
        return self.labels_a if task is Task.A else self.labels_b

    def swap_tasks(self) -> "Dataset":
        """The same data with the roles of tasks A and B exchanged."""
        return Dataset(self.samples, self.labels_b, self.labels_a,
                       self.global_mean, dict(self.meta))

    def mean_consistent(self, rtol: float = 1e-12) -> bool:
        """Whether the cached global mean matches the actual column mean."""
        actual = self.samples.mean(axis=1)
        scale = max(float(np.abs(actual).max()), 1e-300)
        return bool(np.abs(self.global_mean - actual).max() <= rtol * scale)


@dataclass
class ClassSplit:
    """Samples of one task partitioned by class, with per-class means."""

    x0: np.ndarray
    x1: np.ndarray
    mean0: np.ndarray
    mean1: np.ndarray

    @classmethod
    def from_matrices(cls, x0, x1) -> "ClassSplit":
        x0 = np.ascontiguousarray(x0, dtype=np.float64)
        x1 = np.ascontiguousarray(x1, dtype=np.float64)
        if x0.ndim != 2 or x1.ndim != 2 or x0.shape[0] != x1.shape[0]:
            raise DimensionMismatchError("class matrices must share the same row dimension")
        if x0.shape[1] == 0 or x1.shape[1] == 0:
            raise EmptyClassError("both classes need at least one sample")
        return cls(x0, x1, x0.mean(axis=1), x1.mean(axis=1))

    @property
    def n0(self) -> int:
        return self.x0.shape[1]

    @property
    def n1(self) -> int:
        return self.x1.shape[1]


def split_by_task(ds: Dataset, task: Task) -> ClassSplit:
    """Partition the dataset's columns by the given task's labels.

    Column order within each class follows dataset order.  Raises
    :class:`EmptyClassError` when either class is empty.
    """
    y = ds.labels(task)
    x0 = ds.samples[:, y == 0]
    x1 = ds.samples[:, y == 1]
    if x0.shape[1] == 0 or x1.shape[1] == 0:
        raise EmptyClassError(f"task {task.value.upper()} has an empty class")
    return ClassSplit(x0, x1, x0.mean(axis=1), x1.mean(axis=1))
