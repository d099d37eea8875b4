"""Ratio-of-discriminabilities objective, its analytic gradient, and descent.

The objective for a parameter vector theta is

    R(theta) = log( max(J*_B, eps) / max(J*_A, eps) ) + beta * theta.theta

where J*_A and J*_B are the maximal Fisher discriminabilities of the filtered
data under tasks A and B.  Minimizing R preserves task A while suppressing
task B.  The eps floor keeps R finite when suppression drives a J* to zero;
away from zero it leaves values and gradients essentially unchanged.

The gradient uses the closed form J* = delta' M^-1 delta with
M = alpha*I + (1-alpha) * L S L' , delta = L dx, where L is the filter's
linear map, dx the raw class-mean gap and S the raw pooled within-class
scatter.  Differentiating this composite exactly (matrix-inverse rule plus
linearity of L in theta) gives, with p = M^-1 delta, u = L'p and
v = dx - (1-alpha) S u:

    dJ*/dtheta_j = 2 * p' L_j v

which each filter family assembles in closed form.  Correctness is arbitrated
by central finite differences of R, not by the derivation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import ClassSplit, Dataset, Task, split_by_task
from .errors import EpsilonFloorWarning, LineSearchWarning, NonFiniteError
from .fisher import compute_stats, fisher_j, optimal_discriminant
from .filters import (
    FilterKind,
    FilterParams,
    apply_filter_adjoint,
    apply_filter_batch,
    conv_jacobian_shift,
)


@dataclass
class ObjectiveConfig:
    """Knobs for objective evaluation and descent.

    ``max_iters`` bounds accepted descent steps, ``max_evals`` bounds
    objective evaluations (the conjugate-gradient budget convention); either
    may be None for no bound.
    """

    alpha: float = 0.1
    beta: float = 0.0
    eps_floor: float = 1e-12
    max_iters: int | None = 50
    max_evals: int | None = None
    optimizer: str = "gd"
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo_c1: float = 1e-4
    max_backtracks: int = 40
    grad_tol: float = 1e-8
    rel_tol: float = 1e-10
    snapshot_stride: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.eps_floor <= 0.0:
            raise ValueError("eps_floor must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must be in (0, 1)")
        if self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")
        if self.optimizer not in ("gd", "cg"):
            raise ValueError("optimizer must be 'gd' or 'cg'")


@dataclass
class TraceEntry:
    """One objective evaluation inside the descent loop."""

    eval_index: int
    r_value: float
    j_star_a: float
    j_star_b: float
    grad_norm: float
    step: float
    accepted: bool


@dataclass
class DescentTrace:
    """Every function evaluation, theta snapshots, and termination flags."""

    entries: list[TraceEntry] = field(default_factory=list)
    snapshots: list[tuple[int, np.ndarray]] = field(default_factory=list)
    line_search_failed: bool = False
    floor_bound: bool = False
    stop_reason: str = ""

    def accepted_r(self) -> np.ndarray:
        """R at the initial point and after every accepted step, in order."""
        return np.array([e.r_value for e in self.entries if e.accepted])

    @property
    def n_evals(self) -> int:
        return len(self.entries)


class _RatioProblem:
    """R and grad-R for a fixed dataset and filter family.

    Caches per-task label masks plus the raw mean gaps and pooled
    within-class scatters, none of which move with theta.
    """

    def __init__(self, ds: Dataset, proto: FilterParams, cfg: ObjectiveConfig):
        self.ds = ds
        self.proto = proto
        self.cfg = cfg
        self._mask1 = {t: ds.labels(t) == 1 for t in (Task.A, Task.B)}
        self._raw: dict[Task, tuple[np.ndarray, np.ndarray]] = {}

    def _raw_stats(self, task: Task) -> tuple[np.ndarray, np.ndarray]:
        if task not in self._raw:
            split = split_by_task(self.ds, task)
            c0 = split.x0 - split.mean0[:, None]
            c1 = split.x1 - split.mean1[:, None]
            scatter = c0 @ c0.T + c1 @ c1.T
            scatter = (scatter + scatter.T) * 0.5
            self._raw[task] = (split.mean1 - split.mean0, scatter)
        return self._raw[task]

    def _filtered_task(self, filtered: np.ndarray, task: Task):
        m1 = self._mask1[task]
        split = ClassSplit.from_matrices(filtered[:, ~m1], filtered[:, m1])
        stats = compute_stats(split, self.cfg.alpha)
        p = optimal_discriminant(stats)
        j = fisher_j(stats, p) if p.any() else 0.0
        return stats, p, j

    def value(self, theta: np.ndarray):
        """Returns (R, J*_A, J*_B, floor_hit)."""
        fp = self.proto.replace_theta(theta)
        filtered = apply_filter_batch(fp, self.ds).samples
        _, _, ja = self._filtered_task(filtered, Task.A)
        _, _, jb = self._filtered_task(filtered, Task.B)
        eps = self.cfg.eps_floor
        r = math.log(max(jb, eps) / max(ja, eps)) + self.cfg.beta * float(theta @ theta)
        if not math.isfinite(r):
            raise NonFiniteError(f"objective is not finite (J*_A={ja}, J*_B={jb})")
        return r, ja, jb, (ja <= eps or jb <= eps)

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        fp = self.proto.replace_theta(theta)
        filtered = apply_filter_batch(fp, self.ds).samples
        eps = self.cfg.eps_floor
        one_minus_alpha = 1.0 - self.cfg.alpha
        grad = 2.0 * self.cfg.beta * theta
        for task, sign in ((Task.B, 1.0), (Task.A, -1.0)):
            _, p, j = self._filtered_task(filtered, task)
            delta_x, scatter = self._raw_stats(task)
            u = apply_filter_adjoint(fp, p)
            v = delta_x - one_minus_alpha * (scatter @ u)
            grad = grad + (sign / max(j, eps)) * _jstar_gradient(fp, p, v)
        if not np.isfinite(grad).all():
            raise NonFiniteError("gradient is not finite")
        return grad


def _jstar_gradient(fp: FilterParams, p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Assemble [2 * p' L_j v]_j for the filter family of ``fp``."""
    if fp.kind is FilterKind.MASK:
        return 2.0 * p * v
    if fp.kind is FilterKind.LINEAR:
        return 2.0 * np.outer(p, v).ravel()
    n = math.isqrt(p.shape[0])
    p_img = p.reshape(n, n)
    v_img = v.reshape(n, n)
    k = fp.size
    g = np.empty(k * k)
    for j in range(k * k):
        r, c = divmod(j, k)
        g[j] = 2.0 * float(np.vdot(p_img, conv_jacobian_shift(v_img, (k, k), r, c)))
    return g


def ratio_objective(theta: FilterParams, ds: Dataset, cfg: ObjectiveConfig) -> float:
    """R(theta) on the dataset; raises NonFiniteError if the value blows up."""
    r, _, _, _ = _RatioProblem(ds, theta, cfg).value(theta.theta)
    return r


def ratio_gradient(theta: FilterParams, ds: Dataset, cfg: ObjectiveConfig) -> np.ndarray:
    """Analytic gradient of R w.r.t. the filter parameters."""
    return _RatioProblem(ds, theta, cfg).gradient(theta.theta)


def minimize(ds: Dataset, theta0: FilterParams,
             cfg: ObjectiveConfig) -> tuple[FilterParams, DescentTrace]:
    """Minimize R by steepest descent or Polak-Ribiere conjugate gradient.

    Backtracking line search enforces the Armijo sufficient-decrease test, so
    R is non-increasing over accepted steps.  Stops on the gradient-norm or
    relative-change tolerance, the iteration/evaluation budget, or a failed
    line search (which sets a flag and returns the best point so far).
    """
    problem = _RatioProblem(ds, theta0, cfg)
    trace = DescentTrace()
    theta = theta0.theta.copy()
    max_evals = math.inf if cfg.max_evals is None else cfg.max_evals
    max_iters = math.inf if cfg.max_iters is None else cfg.max_iters

    grad = problem.gradient(theta)
    gnorm = float(np.linalg.norm(grad))

    def record(th, step, accepted):
        r, ja, jb, floored = problem.value(th)
        if floored:
            trace.floor_bound = True
        trace.entries.append(
            TraceEntry(trace.n_evals, r, ja, jb, gnorm, step, accepted))
        return r

    r_cur = record(theta, 0.0, True)
    trace.snapshots.append((0, theta.copy()))

    direction = -grad
    step_prev = cfg.initial_step
    it = 0
    while it < max_iters:
        if gnorm < cfg.grad_tol:
            trace.stop_reason = "gradient_norm"
            break
        if trace.n_evals >= max_evals:
            trace.stop_reason = "eval_budget"
            break
        dir_deriv = float(grad @ direction)
        if dir_deriv >= 0.0:  # conjugate direction lost descent; restart
            direction = -grad
            dir_deriv = -float(grad @ grad)

        def try_step(s):
            cand = theta + s * direction
            r_trial, ja, jb, floored = problem.value(cand)
            if floored:
                trace.floor_bound = True
            ok = r_trial <= r_cur + cfg.armijo_c1 * s * dir_deriv
            trace.entries.append(
                TraceEntry(trace.n_evals, r_trial, ja, jb, gnorm, s, False))
            return ok, r_trial, cand

        # forward-tracking Armijo: grow the step while the test keeps passing,
        # otherwise backtrack; the accepted trial is flagged afterwards
        step = step_prev
        accepted = False
        cand = theta
        r_new = r_cur
        best_entry = None
        for _ in range(cfg.max_backtracks + 1):
            if trace.n_evals >= max_evals:
                trace.stop_reason = "eval_budget"
                break
            ok, r_trial, trial = try_step(step)
            if ok:
                accepted = True
                r_new, cand, best_entry = r_trial, trial, trace.entries[-1]
                break
            step *= cfg.shrink
        if accepted:
            while trace.n_evals < max_evals:
                grown = 2.0 * step
                ok, r_trial, trial = try_step(grown)
                if not ok or r_trial >= r_new:
                    break
                step = grown
                r_new, cand, best_entry = r_trial, trial, trace.entries[-1]
            best_entry.accepted = True
        if trace.stop_reason == "eval_budget":
            break
        if not accepted:
            trace.line_search_failed = True
            trace.stop_reason = "line_search"
            warnings.warn(
                f"no Armijo step within {cfg.max_backtracks} backtracks; "
                "returning best point so far", LineSearchWarning, stacklevel=2)
            break
        delta_r = r_cur - r_new
        theta = cand
        r_cur = r_new
        step_prev = step
        it += 1

        new_grad = problem.gradient(theta)
        if cfg.optimizer == "cg":
            denom = max(float(grad @ grad), 1e-300)
            beta_pr = max(0.0, float(new_grad @ (new_grad - grad)) / denom)
            direction = -new_grad + beta_pr * direction
        else:
            direction = -new_grad
        grad = new_grad
        gnorm = float(np.linalg.norm(grad))
        if cfg.snapshot_stride > 0 and it % cfg.snapshot_stride == 0:
            trace.snapshots.append((it, theta.copy()))
        if delta_r <= cfg.rel_tol * max(1.0, abs(r_cur)):
            trace.stop_reason = "function_change"
            break

    if not trace.stop_reason:
        trace.stop_reason = "max_iters"
    if not trace.snapshots or trace.snapshots[-1][0] != it:
        trace.snapshots.append((it, theta.copy()))
    if trace.floor_bound:
        warnings.warn("a J* value fell below the eps floor during descent",
                      EpsilonFloorWarning, stacklevel=2)
    return theta0.replace_theta(theta), trace
