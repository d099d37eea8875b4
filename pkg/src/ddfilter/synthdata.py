"""Synthetic datasets: four-cluster point sets and random line images.

All generators draw from a single seeded stream, so a spec plus seed pins the
dataset exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InvalidCorrelationError


def _check_side(side: int):
    if side < 4 or side % 2 != 0:
        raise ValueError("image side must be even and at least 4")


@dataclass
class LineImageSpec:
    """Images with one random vertical and one random horizontal line.

    The vertical line's half (left/right) labels task A, the horizontal
    line's half (top/bottom) labels task B; uniform noise in
    [0, noise_high) is added to every pixel afterwards.
    """

    n_images: int
    side: int = 16
    noise_high: float = 0.5
    line_intensity: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_images < 2:
            raise ValueError("need at least two images")
        _check_side(self.side)
        if self.noise_high < 0.0:
            raise ValueError("noise_high must be nonnegative")


@dataclass
class CorrelationSpec:
    """Line images whose two labels follow a target Pearson correlation."""

    n_images: int
    side: int = 16
    target_corr: float = 0.0
    noise_high: float = 0.5
    line_intensity: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_images < 2:
            raise ValueError("need at least two images")
        _check_side(self.side)
        if abs(self.target_corr) > 1.0:
            raise InvalidCorrelationError(
                f"target correlation {self.target_corr} outside [-1, 1]"
            )
        if self.noise_high < 0.0:
            raise ValueError("noise_high must be nonnegative")


def gen_two_task_points(n_per_cell: int, seed: int, sigma: float = 0.25) -> Dataset:
    """Four isotropic Gaussian clusters in the plane, one per label pair.

    Cluster centers sit at (+-1, +-1); task A is the sign of the first
    center coordinate, task B the sign of the second.
    """
    if n_per_cell < 1:
        raise ValueError("n_per_cell must be at least 1")
    rng = np.random.default_rng(seed)
    blocks, la, lb = [], [], []
    for a in (0, 1):
        for b in (0, 1):
            center = np.array([2.0 * a - 1.0, 2.0 * b - 1.0])
            pts = center[:, None] + sigma * rng.standard_normal((2, n_per_cell))
            blocks.append(pts)
            la.extend([a] * n_per_cell)
            lb.extend([b] * n_per_cell)
    return Dataset.from_arrays(np.hstack(blocks), la, lb,
                               meta={"sigma": sigma, "n_per_cell": n_per_cell})


def _line_images(rng: np.random.Generator, cols: np.ndarray, rows: np.ndarray,
                 side: int, intensity: float, noise_high: float) -> np.ndarray:
    n = cols.shape[0]
    imgs = np.zeros((n, side, side))
    imgs[np.arange(n), :, cols] += intensity   # vertical line per image
    imgs[np.arange(n), rows, :] += intensity   # horizontal line per image
    imgs += rng.random((n, side, side)) * noise_high
    return imgs.reshape(n, side * side).T.copy()


def gen_line_images(spec: LineImageSpec) -> Dataset:
    """Random-position line images with half-based labels.

    Label A is 0 when the vertical line's column is below side/2, else 1;
    label B likewise for the horizontal line's row.  The drawn positions are
    kept in the dataset metadata.
    """
    rng = np.random.default_rng(spec.seed)
    cols = rng.integers(0, spec.side, spec.n_images)
    rows = rng.integers(0, spec.side, spec.n_images)
    samples = _line_images(rng, cols, rows, spec.side,
                           spec.line_intensity, spec.noise_high)
    half = spec.side // 2
    return Dataset.from_arrays(
        samples,
        (cols >= half).astype(int),
        (rows >= half).astype(int),
        meta={"side": spec.side, "line_cols": cols, "line_rows": rows},
    )


def gen_correlated_lines(spec: CorrelationSpec) -> Dataset:
    """Line images whose labels share a target correlation.

    Both marginals stay at 1/2; the labels agree with probability
    (1 + target_corr) / 2, which realizes the requested Pearson correlation
    in expectation.  Line positions are drawn uniformly from the half each
    label dictates.
    """
    rng = np.random.default_rng(spec.seed)
    n, half = spec.n_images, spec.side // 2
    ya = rng.integers(0, 2, n)
    agree = rng.random(n) < (1.0 + spec.target_corr) / 2.0
    yb = np.where(agree, ya, 1 - ya)
    cols = rng.integers(0, half, n) + ya * half
    rows = rng.integers(0, half, n) + yb * half
    samples = _line_images(rng, cols, rows, spec.side,
                           spec.line_intensity, spec.noise_high)
    return Dataset.from_arrays(
        samples, ya, yb,
        meta={"side": spec.side, "line_cols": cols, "line_rows": rows,
              "target_corr": spec.target_corr},
    )
