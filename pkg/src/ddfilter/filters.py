"""Differentiable linear filter families and their parameter Jacobians.

Three families, all linear in the data vector:

* clipped 2-D convolution of a square kernel with a square image,
* pixel-wise mask (elementwise multiply),
* general linear map (dense matrix, row-major parameter layout).

The convolution computes the full zero-padded product and crops it back to
the input size.  The crop keeps indices ``[k//2, k//2 + n)`` of the
``k + n - 1`` full output per axis, i.e. a leading offset of ceil((k-1)/2),
which pins the behavior for even kernel sizes as well as odd ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import Dataset
from .errors import DimensionMismatchError, IndexOutOfRangeError


class FilterKind(Enum):
    CONVOLUTION = "conv"
    MASK = "mask"
    LINEAR = "linear"


@dataclass
class FilterParams:
    """A tagged filter parameter vector.

    ``size`` is the kernel side for convolutions and the data dimension for
    masks and linear maps.  ``theta`` is flat: length size**2 for convolution
    and linear (row-major), length size for mask.
    """

    kind: FilterKind
    size: int
    theta: np.ndarray

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("filter size must be positive")
        self.theta = np.ascontiguousarray(self.theta, dtype=np.float64).ravel()
        if self.theta.shape != (self.n_params,):
            raise DimensionMismatchError(
                f"{self.kind.value} filter of size {self.size} needs "
                f"{self.n_params} parameters, got {self.theta.shape[0]}"
            )

    @property
    def n_params(self) -> int:
        if self.kind is FilterKind.MASK:
            return self.size
        return self.size * self.size

    def replace_theta(self, theta: np.ndarray) -> "FilterParams":
        return FilterParams(self.kind, self.size, theta)


@dataclass
class FilteredDataset:
    """Column-wise filtered samples plus a reference to their origin."""

    samples: np.ndarray
    source: Dataset
    params: FilterParams

    def to_dataset(self) -> Dataset:
        """The filtered samples re-wrapped as a dataset with the same labels."""
        return Dataset.from_arrays(self.samples, self.source.labels_a,
                                   self.source.labels_b, dict(self.source.meta))


def random_filter(kind: FilterKind, size: int, rng: np.random.Generator) -> FilterParams:
    """Initial parameters: U[0,1) entries for mask/convolution, identity plus
    U[-0.1, 0.1) noise for a general linear map."""
    if kind is FilterKind.LINEAR:
        theta = np.eye(size).ravel() + (rng.random(size * size) - 0.5) * 0.2
    elif kind is FilterKind.MASK:
        theta = rng.random(size)
    else:
        theta = rng.random(size * size)
    return FilterParams(kind, size, theta)


def _square_side(length: int) -> int:
    side = math.isqrt(length)
    if side * side != length:
        raise DimensionMismatchError(
            f"convolution input of length {length} is not a square image"
        )
    return side


def _batch_clipped_convolve(images: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Clipped convolution of one kernel with a (B, nr, nc) image stack.

    Accumulates the shifted copies in fixed row-major kernel order so that
    single-sample and batched applications agree bit for bit.
    """
    b, nr, nc = images.shape
    mr, mc = kernel.shape
    big = np.zeros((b, nr + mr - 1, nc + mc - 1))
    for r in range(mr):
        for c in range(mc):
            big[:, r:r + nr, c:c + nc] += kernel[r, c] * images
    ur, uc = mr // 2, mc // 2
    return big[:, ur:ur + nr, uc:uc + nc].copy()


def clipped_convolve(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Full zero-padded 2-D convolution cropped back to the image's shape."""
    image = np.asarray(image, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    return _batch_clipped_convolve(image[None], kernel)[0]


def conv_jacobian_shift(image: np.ndarray, kernel_shape: tuple[int, int],
                        r: int, c: int) -> np.ndarray:
    """Derivative of the clipped convolution w.r.t. kernel entry (r, c).

    The image is placed at offset (r, c) in the zero-padded full grid and
    cropped exactly like the forward pass; the result does not depend on the
    kernel values.
    """
    image = np.asarray(image, dtype=np.float64)
    nr, nc = image.shape
    mr, mc = kernel_shape
    big = np.zeros((nr + mr - 1, nc + mc - 1))
    big[r:r + nr, c:c + nc] = image
    ur, uc = mr // 2, mc // 2
    return big[ur:ur + nr, uc:uc + nc].copy()


def clipped_convolve_adjoint(out_grad: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Adjoint of ``clipped_convolve`` in its image argument.

    Embeds the cotangent at the crop offset of the full grid and correlates
    with the kernel, so <conv(x), y> == <x, adjoint(y)> for all x, y.
    """
    out_grad = np.asarray(out_grad, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    nr, nc = out_grad.shape
    mr, mc = kernel.shape
    big = np.zeros((nr + mr - 1, nc + mc - 1))
    ur, uc = mr // 2, mc // 2
    big[ur:ur + nr, uc:uc + nc] = out_grad
    out = np.zeros((nr, nc))
    for u in range(mr):
        for v in range(mc):
            out += kernel[u, v] * big[u:u + nr, v:v + nc]
    return out


def _check_vector(fp: FilterParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if fp.kind in (FilterKind.MASK, FilterKind.LINEAR):
        if x.shape[0] != fp.size:
            raise DimensionMismatchError(
                f"{fp.kind.value} filter expects length {fp.size}, got {x.shape[0]}"
            )
    return x


def apply_filter(fp: FilterParams, x) -> np.ndarray:
    """Filter one data vector."""
    x = _check_vector(fp, x)
    if fp.kind is FilterKind.MASK:
        return fp.theta * x
    if fp.kind is FilterKind.LINEAR:
        return fp.theta.reshape(fp.size, fp.size) @ x
    n = _square_side(x.shape[0])
    kernel = fp.theta.reshape(fp.size, fp.size)
    return clipped_convolve(x.reshape(n, n), kernel).ravel()


def apply_filter_adjoint(fp: FilterParams, y) -> np.ndarray:
    """Apply the transpose of the filter's linear map to ``y``."""
    y = _check_vector(fp, y)
    if fp.kind is FilterKind.MASK:
        return fp.theta * y
    if fp.kind is FilterKind.LINEAR:
        return fp.theta.reshape(fp.size, fp.size).T @ y
    n = _square_side(y.shape[0])
    kernel = fp.theta.reshape(fp.size, fp.size)
    return clipped_convolve_adjoint(y.reshape(n, n), kernel).ravel()


def filter_jacobian_column(fp: FilterParams, x, j: int) -> np.ndarray:
    """Derivative of the filtered vector w.r.t. parameter ``theta[j]``.

    All three families are linear in theta, so the column is independent of
    the current parameter values.
    """
    if not 0 <= j < fp.n_params:
        raise IndexOutOfRangeError(
            f"parameter index {j} outside [0, {fp.n_params})"
        )
    x = _check_vector(fp, x)
    if fp.kind is FilterKind.MASK:
        out = np.zeros_like(x)
        out[j] = x[j]
        return out
    if fp.kind is FilterKind.LINEAR:
        r, c = divmod(j, fp.size)
        out = np.zeros_like(x)
        out[r] = x[c]
        return out
    n = _square_side(x.shape[0])
    r, c = divmod(j, fp.size)
    return conv_jacobian_shift(x.reshape(n, n), (fp.size, fp.size), r, c).ravel()


def apply_filter_batch(fp: FilterParams, ds: Dataset) -> FilteredDataset:
    """Filter every column of the dataset; labels are carried through."""
    x = ds.samples
    if fp.kind is FilterKind.MASK:
        if x.shape[0] != fp.size:
            raise DimensionMismatchError(
                f"mask filter expects dimension {fp.size}, got {x.shape[0]}"
            )
        out = fp.theta[:, None] * x
    elif fp.kind is FilterKind.LINEAR:
        if x.shape[0] != fp.size:
            raise DimensionMismatchError(
                f"linear filter expects dimension {fp.size}, got {x.shape[0]}"
            )
        out = fp.theta.reshape(fp.size, fp.size) @ x
    else:
        n = _square_side(x.shape[0])
        kernel = fp.theta.reshape(fp.size, fp.size)
        images = np.ascontiguousarray(x.T).reshape(-1, n, n)
        out = _batch_clipped_convolve(images, kernel).reshape(-1, n * n).T.copy()
    return FilteredDataset(out, ds, fp)
