"""Fisher discriminability: scatter matrices, the criterion J, and its
analytic maximizer.

For a binary class split, the between-class scatter is the rank-one outer
product of the class-mean difference and the within-class scatter is the sum
of the two centered outer-product scatters.  The within scatter is kept both
raw and in ridge-regularized form ``alpha*I + (1-alpha)*W``; all solves go
through the regularized matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .data import ClassSplit
from .errors import DegenerateMeansWarning, SingularWithinError, ZeroDirectionError

#: Condition-estimate ceiling above which a within-scatter solve is refused.
COND_LIMIT = 1e12


@dataclass
class FisherStats:
    """Scatter matrices and class summaries for one labeling task."""

    between: np.ndarray      # B, symmetric PSD, rank <= 1
    within: np.ndarray       # W, unregularized
    within_reg: np.ndarray   # alpha*I + (1-alpha)*W
    alpha: float
    mean0: np.ndarray
    mean1: np.ndarray
    n0: int
    n1: int

    @property
    def mean_diff(self) -> np.ndarray:
        return self.mean1 - self.mean0


def _symmetrize(m: np.ndarray) -> np.ndarray:
    # BLAS products of the form C @ C.T are not guaranteed bit-symmetric
    return (m + m.T) * 0.5


def compute_stats(split: ClassSplit, alpha: float) -> FisherStats:
    """Between/within scatter of a class split, with ridge-regularized within.

    ``alpha`` in [0, 1] blends the within scatter toward the identity:
    alpha=0 leaves W untouched, alpha=1 replaces it entirely.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    delta = split.mean1 - split.mean0
    between = np.outer(delta, delta)
    c0 = split.x0 - split.mean0[:, None]
    c1 = split.x1 - split.mean1[:, None]
    within = _symmetrize(c0 @ c0.T + c1 @ c1.T)
    d = within.shape[0]
    within_reg = alpha * np.eye(d) + (1.0 - alpha) * within
    return FisherStats(between, within, within_reg, float(alpha),
                       split.mean0.copy(), split.mean1.copy(),
                       split.n0, split.n1)


def fisher_j(stats: FisherStats, p: np.ndarray) -> float:
    """Discriminability of the data projected on direction ``p``.

    Returns the ratio of projected between-class to regularized within-class
    variance.  Scale-invariant in ``p``; raises for the zero direction.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.shape != (stats.between.shape[0],):
        raise ZeroDirectionError(
            f"direction must have length {stats.between.shape[0]}"
        )
    if not p.any():
        raise ZeroDirectionError("projection direction must be nonzero")
    num = float(p @ stats.between @ p)
    den = float(p @ stats.within_reg @ p)
    if den <= 0.0:
        raise SingularWithinError(
            "projected within-class variance is not positive"
        )
    return num / den


def _solve_spd(m: np.ndarray, rhs: np.ndarray,
               cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Solve the SPD system m x = rhs via Cholesky with a condition guard."""
    try:
        factor = sla.cho_factor(m, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise SingularWithinError(
            "within-scatter factorization failed; matrix is not positive definite"
        ) from exc
    anorm = float(np.linalg.norm(m, 1))
    rcond, info = sla.lapack.dpocon(factor[0], anorm, uplo=b"L")
    if info != 0 or not np.isfinite(rcond) or rcond <= 0.0 or 1.0 / rcond > cond_limit:
        est = 1.0 / rcond if rcond > 0 else np.inf
        raise SingularWithinError(
            f"within-scatter condition estimate {est:.3e} exceeds {cond_limit:.1e}"
        )
    return sla.cho_solve(factor, rhs, check_finite=False)


def optimal_discriminant(stats: FisherStats,
                         cond_limit: float = COND_LIMIT) -> np.ndarray:
    """The direction maximizing J: the regularized-within solve of the mean gap.

    Solved as a linear system, never by explicit inversion.  Identical class
    means yield the zero vector together with a :class:`DegenerateMeansWarning`,
    since an optimizer may legitimately drive a task into that state.
    """
    delta = stats.mean_diff
    if not delta.any():
        warnings.warn("class means coincide; returning the zero direction",
                      DegenerateMeansWarning, stacklevel=2)
        return np.zeros_like(delta)
    return _solve_spd(stats.within_reg, delta, cond_limit)


def fisher_j_star(split: ClassSplit, alpha: float,
                  cond_limit: float = COND_LIMIT) -> float:
    """Maximal discriminability: J evaluated at the analytic optimum.

    Returns 0 when the class means coincide (degenerate optimum).
    """
    stats = compute_stats(split, alpha)
    p_star = optimal_discriminant(stats, cond_limit)
    if not p_star.any():
        return 0.0
    return fisher_j(stats, p_star)
