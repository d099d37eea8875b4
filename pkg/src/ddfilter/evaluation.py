"""Machine-side evaluation: LDA classification, forced-choice scoring,
a linear-separability oracle, and the covariate-shift harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .data import Dataset, Task, split_by_task
from .errors import EmptyClassError, EmptyPairsError
from .fisher import compute_stats, fisher_j_star, optimal_discriminant
from .filters import FilterParams, apply_filter_batch


@dataclass
class LdaClassifier:
    """Linear classifier along the optimal Fisher direction."""

    direction: np.ndarray
    threshold: float

    def score(self, x) -> np.ndarray | float:
        return self.direction @ np.asarray(x, dtype=np.float64)

    def predict(self, x) -> np.ndarray | int:
        # strict inequality: ties go to class 0
        return (self.score(x) > self.threshold).astype(int)


@dataclass
class EvalReport:
    """Forced-choice accuracy and discriminability for both tasks."""

    two_afc_a: float
    two_afc_b: float
    j_star_a: float
    j_star_b: float
    notes: str = ""


def train_lda(ds: Dataset, task: Task, alpha: float = 0.1) -> LdaClassifier:
    """Fit the Fisher discriminant direction with the midpoint threshold.

    Degenerate (equal-means) splits warn and produce the zero direction,
    whose constant score classifies everything as class 0.
    """
    split = split_by_task(ds, task)
    stats = compute_stats(split, alpha)
    p = optimal_discriminant(stats)
    threshold = float(p @ (split.mean0 + split.mean1)) / 2.0
    return LdaClassifier(p, threshold)


def two_afc(clf: LdaClassifier, pairs) -> float:
    """Fraction of (positive, negative) pairs scored in the right order.

    Exact ties contribute one half.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyPairsError("two_afc needs at least one pair")
    total = 0.0
    for pos, neg in pairs:
        sp = float(clf.score(pos))
        sn = float(clf.score(neg))
        if sp > sn:
            total += 1.0
        elif sp == sn:
            total += 0.5
    return total / len(pairs)


def make_pairs(ds: Dataset, task: Task, rng: np.random.Generator,
               n_pairs: int | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Sample (positive, negative) pairs without replacement.

    Each class is shuffled once and the two orders zipped, so no sample
    appears in more than one pair.
    """
    y = ds.labels(task)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if pos.size == 0 or neg.size == 0:
        raise EmptyClassError(f"task {task.value.upper()} has an empty class")
    pos = rng.permutation(pos)
    neg = rng.permutation(neg)
    k = min(pos.size, neg.size)
    if n_pairs is not None:
        k = min(k, n_pairs)
    return [(ds.samples[:, i].copy(), ds.samples[:, j].copy())
            for i, j in zip(pos[:k], neg[:k])]


def separable(x0, x1) -> bool:
    """Whether a hyperplane strictly separates the two point sets.

    Decided by a strict-feasibility linear program: find w and b with
    w'x >= b+1 on class 0 and w'x <= b-1 on class 1.  Intended for small
    instances (up to a few hundred points).
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=np.float64))
    x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
    d = x0.shape[0]
    if x1.shape[0] != d:
        raise ValueError("class matrices must share the same dimension")
    n0, n1 = x0.shape[1], x1.shape[1]
    if n0 == 0 or n1 == 0:
        raise EmptyClassError("both classes need at least one point")
    # variables: [w (d), b]; rows: -w'x_i + b <= -1 and w'x_j - b <= -1
    a_ub = np.vstack([
        np.hstack([-x0.T, np.ones((n0, 1))]),
        np.hstack([x1.T, -np.ones((n1, 1))]),
    ])
    b_ub = -np.ones(n0 + n1)
    res = linprog(np.zeros(d + 1), A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * (d + 1), method="highs")
    if res.status not in (0, 2):
        raise RuntimeError(f"separability LP ended with status {res.status}: {res.message}")
    return res.status == 0


def evaluate(train: Dataset, test: Dataset, alpha: float = 0.1,
             n_pairs: int | None = None, seed: int = 0,
             notes: str = "") -> EvalReport:
    """Train LDA per task on ``train`` and score forced-choice pairs on ``test``.

    J* values are computed on the test data, i.e. they measure the
    discriminability of the data actually being scored.
    """
    rng = np.random.default_rng(seed)
    afc = {}
    jstar = {}
    for task in (Task.A, Task.B):
        clf = train_lda(train, task, alpha)
        afc[task] = two_afc(clf, make_pairs(test, task, rng, n_pairs))
        jstar[task] = fisher_j_star(split_by_task(test, task), alpha)
    return EvalReport(afc[Task.A], afc[Task.B], jstar[Task.A], jstar[Task.B], notes)


def covariate_shift_experiment(train: Dataset, test: Dataset,
                               fp: FilterParams | None = None,
                               alpha: float = 0.1,
                               n_pairs: int | None = None,
                               seed: int = 0) -> tuple[EvalReport, EvalReport | None]:
    """Compare generalization of classifiers trained with and without a filter.

    Returns the unfiltered leg and, when a filter is given, a second leg where
    both train and test data pass through the identical filter.  The same
    seed drives pair sampling in both legs, so the comparison is paired.
    """
    if train.dim != test.dim:
        raise ValueError("train and test dimensions differ")
    unfiltered = evaluate(train, test, alpha, n_pairs, seed, notes="unfiltered")
    filtered = None
    if fp is not None:
        ftrain = apply_filter_batch(fp, train).to_dataset()
        ftest = apply_filter_batch(fp, test).to_dataset()
        filtered = evaluate(ftrain, ftest, alpha, n_pairs, seed, notes="filtered")
    return unfiltered, filtered
