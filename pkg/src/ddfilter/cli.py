"""Command-line pipeline: generate, learn, apply, reconstruct, evaluate.

Exit codes: 0 on success, 1 on usage errors or malformed inputs, 2 on
numerical failures (singular scatter, non-finite objective, failed line
search).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .data import Task
from .errors import (
    FilterLearnError,
    NonFiniteError,
    SingularSystemError,
    SingularWithinError,
    UsageError,
)
from .evaluation import evaluate
from .fisher import fisher_j_star
from .data import split_by_task
from .filters import FilterKind, FilterParams, apply_filter_batch, random_filter
from .objective import ObjectiveConfig, minimize
from .reconstruction import fit_reconstruction, reconstruct_batch

_NUMERICAL_ERRORS = (SingularWithinError, NonFiniteError, SingularSystemError)


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; route through UsageError so
    # the CLI reserves 2 for numerical failures
    def error(self, message):
        raise UsageError(message)


def _parse_filter_spec(spec: str) -> tuple[FilterKind, int | None]:
    name, _, arg = spec.partition(":")
    if name == "conv":
        if not arg:
            raise UsageError("convolution filter needs a kernel side, e.g. conv:5")
        try:
            k = int(arg)
        except ValueError:
            raise UsageError(f"bad kernel side {arg!r}") from None
        if k < 1:
            raise UsageError("kernel side must be positive")
        return FilterKind.CONVOLUTION, k
    if name in ("mask", "linear"):
        if arg:
            raise UsageError(f"{name} filter takes its size from the data")
        return FilterKind(name), None
    raise UsageError(f"unknown filter kind {spec!r} (conv:K, mask, or linear)")


def _square_side(d: int) -> int:
    import math

    side = math.isqrt(d)
    if side * side != d:
        raise UsageError(f"data dimension {d} is not a square image")
    return side


def cmd_gen_points(args) -> int:
    from .synthdata import gen_two_task_points

    ds = gen_two_task_points(args.n_per_cell, args.seed, args.sigma)
    data_path, labels_path = io.write_dataset(args.out, ds)
    print(f"wrote {data_path} and {labels_path} ({ds.n_samples} points)")
    return 0


def cmd_gen_lines(args) -> int:
    from .synthdata import LineImageSpec, gen_line_images

    spec = LineImageSpec(args.n, args.side, args.noise, args.intensity, args.seed)
    ds = gen_line_images(spec)
    data_path, labels_path = io.write_dataset(args.out, ds)
    print(f"wrote {data_path} and {labels_path} ({ds.n_samples} images)")
    return 0


def cmd_gen_corr(args) -> int:
    from .synthdata import CorrelationSpec, gen_correlated_lines

    spec = CorrelationSpec(args.n, args.side, args.corr,
                           args.noise, args.intensity, args.seed)
    ds = gen_correlated_lines(spec)
    data_path, labels_path = io.write_dataset(args.out, ds)
    corr = np.corrcoef(ds.labels_a, ds.labels_b)[0, 1]
    print(f"wrote {data_path} and {labels_path} "
          f"({ds.n_samples} images, empirical label corr {corr:+.3f})")
    return 0


def cmd_learn(args) -> int:
    if args.preserve == args.suppress:
        raise UsageError("--preserve and --suppress must name different tasks")
    ds = io.read_dataset(args.data, args.labels)
    if args.preserve == "B":
        # the objective always preserves its task-A slot; swap roles here
        ds = ds.swap_tasks()
    kind, size = _parse_filter_spec(args.filter)
    if size is None:
        size = ds.dim
    elif kind is FilterKind.CONVOLUTION:
        _square_side(ds.dim)
    rng = np.random.default_rng(args.seed)
    theta0 = random_filter(kind, size, rng)
    if args.optimizer == "cg":
        cfg_budget = {"max_evals": args.iters, "max_iters": None}
    else:
        cfg_budget = {"max_iters": args.iters, "max_evals": None}
    cfg = ObjectiveConfig(alpha=args.alpha, beta=args.beta, seed=args.seed,
                          optimizer=args.optimizer, initial_step=args.step,
                          **cfg_budget)
    fitted, trace = minimize(ds, theta0, cfg)
    io.write_filter(args.out, fitted)
    trace_path = args.trace if args.trace else str(args.out) + ".trace.csv"
    io.write_trace_csv(trace_path, trace)
    first, last = trace.entries[0], trace.accepted_r()
    print(f"initial R={first.r_value:.6g}  J*A={first.j_star_a:.6g}  "
          f"J*B={first.j_star_b:.6g}")
    final = [e for e in trace.entries if e.accepted][-1]
    print(f"final   R={final.r_value:.6g}  J*A={final.j_star_a:.6g}  "
          f"J*B={final.j_star_b:.6g}  "
          f"({len(last) - 1} accepted steps, {trace.n_evals} evaluations, "
          f"stop: {trace.stop_reason})")
    print(f"wrote {args.out} and {trace_path}")
    if trace.line_search_failed:
        print("error: line search failed to find a descending step", file=sys.stderr)
        return 2
    return 0


def cmd_apply(args) -> int:
    fp = io.read_filter(args.filter)
    samples = io.read_matrix(args.data)
    # reuse the batch path via a label-free stand-in dataset
    from .data import Dataset

    n = samples.shape[1]
    stub = Dataset.from_arrays(samples, np.zeros(n, dtype=int), np.zeros(n, dtype=int))
    out = apply_filter_batch(fp, stub).samples
    io.write_matrix(args.out, out)
    print(f"wrote {args.out}")
    return 0


def cmd_fit_recon(args) -> int:
    x = io.read_matrix(args.original)
    f = io.read_matrix(args.filtered)
    gammas = []
    for tok in args.gamma.split(","):
        try:
            gammas.append(float(tok))
        except ValueError:
            raise UsageError(f"bad gamma value {tok!r}") from None
    if len(gammas) > 1 and args.out:
        raise UsageError("--out accepts a single gamma; use --report for sweeps")
    if len(gammas) == 1 and not args.out and not args.report:
        raise UsageError("nothing to write: give --out or --report")
    labels = io.read_labels(args.labels) if args.labels else None
    rows = []
    for gamma in gammas:
        model = fit_reconstruction(x, f, gamma,
                                   allow_unregularized=args.allow_unregularized)
        g = reconstruct_batch(model, f)
        err = float(np.linalg.norm(x - g) / max(np.linalg.norm(x), 1e-300))
        jstars = (float("nan"), float("nan"))
        if labels is not None:
            from .data import Dataset

            recon_ds = Dataset.from_arrays(g, labels[0], labels[1])
            jstars = (fisher_j_star(split_by_task(recon_ds, Task.A), args.alpha),
                      fisher_j_star(split_by_task(recon_ds, Task.B), args.alpha))
        rows.append((gamma, err, jstars[0], jstars[1]))
        if args.out:
            io.write_recon_model(args.out, model)
            print(f"wrote {args.out} (gamma={gamma:g}, rel recon error {err:.4g})")
    if args.report:
        lines = [io.SWEEP_HEADER]
        for gamma, err, ja, jb in rows:
            lines.append(",".join(format(v, ".17g") for v in (gamma, err, ja, jb)))
        from pathlib import Path

        Path(args.report).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.report} ({len(rows)} gamma values)")
    return 0


def cmd_recon(args) -> int:
    model = io.read_recon_model(args.model)
    f = io.read_matrix(args.data)
    io.write_matrix(args.out, reconstruct_batch(model, f))
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    ds = io.read_dataset(args.data, args.labels)
    if args.train_data:
        if not args.train_labels:
            raise UsageError("--train-data requires --train-labels")
        train = io.read_dataset(args.train_data, args.train_labels)
        test = ds
    else:
        rng = np.random.default_rng(args.seed)
        perm = rng.permutation(ds.n_samples)
        n_train = int(round(args.train_frac * ds.n_samples))
        if n_train < 2 or ds.n_samples - n_train < 2:
            raise UsageError("train fraction leaves too few samples on one side")
        from .data import Dataset

        def take(idx):
            return Dataset.from_arrays(ds.samples[:, idx], ds.labels_a[idx],
                                       ds.labels_b[idx])

        train, test = take(perm[:n_train]), take(perm[n_train:])
    report = evaluate(train, test, args.alpha, args.pairs, args.seed)
    io.write_eval_reports_csv(args.out, [("eval", report)])
    print(f"2AFC task A: {report.two_afc_a:.4f}   task B: {report.two_afc_b:.4f}")
    print(f"J*   task A: {report.j_star_a:.6g}   task B: {report.j_star_b:.6g}")
    print(f"wrote {args.out}")
    return 0


def cmd_export_pgm(args) -> int:
    m = io.read_matrix(args.data)
    if not 0 <= args.index < m.shape[1]:
        raise UsageError(f"column index {args.index} outside [0, {m.shape[1]})")
    side = args.side if args.side else _square_side(m.shape[0])
    io.export_pgm(m[:, args.index], side, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ddfilter",
                     description="Learn filters that preserve one binary task "
                                 "and suppress another.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("gen-points", parents=[], help="four-cluster point set")
    p.add_argument("--n-per-cell", type=int, default=7)
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_points)

    p = sub.add_parser("gen-lines", help="random line images")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--side", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_lines)

    p = sub.add_parser("gen-corr", help="line images with correlated labels")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--side", type=int, default=16)
    p.add_argument("--corr", type=float, required=True)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corr)

    p = sub.add_parser("learn", help="fit a filter by descent on the log ratio")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--filter", required=True, help="conv:K, mask, or linear")
    p.add_argument("--preserve", choices=("A", "B"), default="A")
    p.add_argument("--suppress", choices=("A", "B"), default="B")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--iters", type=int, default=50,
                   help="descent steps for gd; function evaluations for cg")
    p.add_argument("--optimizer", choices=("gd", "cg"), default="gd")
    p.add_argument("--step", type=float, default=1.0,
                   help="initial line-search step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="filter file to write")
    p.add_argument("--trace", help="trace CSV path (default: <out>.trace.csv)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("apply", help="filter every column of a matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--filter", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("fit-recon", help="fit the ridge reconstruction map")
    p.add_argument("--original", required=True)
    p.add_argument("--filtered", required=True)
    p.add_argument("--gamma", required=True,
                   help="ridge strength, or a comma list for a sweep")
    p.add_argument("--labels", help="labels for post-reconstruction J* in sweeps")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--allow-unregularized", action="store_true",
                   help="permit gamma=0 (least-squares fallback)")
    p.add_argument("--out", help="model file (single gamma only)")
    p.add_argument("--report", help="sweep CSV path")
    p.set_defaults(func=cmd_fit_recon)

    p = sub.add_parser("recon", help="apply a reconstruction model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("eval", help="LDA 2AFC and J* per task")
    p.add_argument("--data", required=True, help="evaluation data")
    p.add_argument("--labels", required=True)
    p.add_argument("--train-data", help="separate training data")
    p.add_argument("--train-labels")
    p.add_argument("--train-frac", type=float, default=0.8,
                   help="internal split when no training data is given")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--pairs", type=int, help="cap on forced-choice pairs per task")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-pgm", help="write one sample as a PGM image")
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--side", type=int, help="image side (default: sqrt of dim)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_pgm)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError("a subcommand is required (see --help)")
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, FilterLearnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
