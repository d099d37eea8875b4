"""Ridge-regression restoration of filtered data toward original appearance.

Fits the d-by-(d+1) map P (last column is a bias) minimizing

    || X - P [F; 1] ||_Fr^2  +  gamma * || P Itilde ||_Fr^2

where Itilde is the (d+1) identity with its last diagonal entry zeroed, so
the bias column is exempt from the ridge.  Large gamma pulls every
reconstruction toward the mean sample; small gamma approaches plain least
squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import DimensionMismatchError, SingularSystemError


@dataclass
class ReconstructionModel:
    """Affine map restoring filtered vectors: g = P [f; 1]."""

    map_p: np.ndarray
    gamma: float

    def __post_init__(self):
        self.map_p = np.ascontiguousarray(self.map_p, dtype=np.float64)
        if self.map_p.ndim != 2 or self.map_p.shape[1] != self.map_p.shape[0] + 1:
            raise DimensionMismatchError("map must be d-by-(d+1)")
        if not np.isfinite(self.map_p).all():
            raise ValueError("reconstruction map has non-finite entries")

    @property
    def dim(self) -> int:
        return self.map_p.shape[0]


def fit_reconstruction(originals: np.ndarray, filtered: np.ndarray,
                       gamma: float, *,
                       allow_unregularized: bool = False) -> ReconstructionModel:
    """Fit the ridge reconstruction map from filtered to original samples.

    With gamma > 0 the normal equations (A A' + gamma*Itilde) P' = A X' are
    solved by Cholesky; the system is positive definite for any data because
    the bias row contributes N to the exempted diagonal entry.  gamma = 0 is
    refused unless ``allow_unregularized`` is set, in which case the fit
    falls back to a least-squares solve and raises
    :class:`SingularSystemError` when the minimizer is not unique.
    """
    x = np.ascontiguousarray(originals, dtype=np.float64)
    f = np.ascontiguousarray(filtered, dtype=np.float64)
    if x.ndim != 2 or f.ndim != 2 or x.shape != f.shape:
        raise DimensionMismatchError(
            f"originals {x.shape} and filtered {f.shape} must be matching d-by-N matrices"
        )
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    d, n = x.shape
    a = np.vstack([f, np.ones((1, n))])
    if gamma == 0.0:
        if not allow_unregularized:
            raise ValueError(
                "gamma=0 removes the ridge entirely; pass allow_unregularized=True to opt in"
            )
        pt, _, rank, _ = np.linalg.lstsq(a.T, x.T, rcond=None)
        if rank < d + 1:
            raise SingularSystemError(
                f"unregularized system is rank deficient ({rank} < {d + 1})"
            )
        return ReconstructionModel(pt.T, 0.0)
    m = a @ a.T
    m = (m + m.T) * 0.5
    m[np.arange(d), np.arange(d)] += gamma  # ridge skips the bias entry
    try:
        factor = sla.cho_factor(m, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise SingularSystemError("normal equations are not positive definite") from exc
    pt = sla.cho_solve(factor, a @ x.T, check_finite=False)
    return ReconstructionModel(pt.T, float(gamma))


def reconstruct(model: ReconstructionModel, f) -> np.ndarray:
    """Restore one filtered vector: P [f; 1]."""
    f = np.asarray(f, dtype=np.float64).ravel()
    if f.shape[0] != model.dim:
        raise DimensionMismatchError(
            f"model expects length {model.dim}, got {f.shape[0]}"
        )
    return model.map_p[:, :-1] @ f + model.map_p[:, -1]


def reconstruct_batch(model: ReconstructionModel, filtered: np.ndarray) -> np.ndarray:
    """Restore every column of a d-by-N matrix."""
    f = np.ascontiguousarray(filtered, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != model.dim:
        raise DimensionMismatchError(
            f"model expects {model.dim} rows, got {f.shape}"
        )
    return model.map_p[:, :-1] @ f + model.map_p[:, -1][:, None]
