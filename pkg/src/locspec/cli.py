"""Command-line entry point: ``locspec {surface,image,rank}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys

import numpy as np

from . import datasets
from .baselines import kernel_nn_rank, nn_rank
from .kernel import KernelConfig, build_gaussian_kernel, normalize_symmetric
from .linalg import ConvergenceError
from .scoring import find_kernel_similarities, rank_of
from .solver import DENSE_AUTO_LIMIT, SolverConfig, compute_eigenbasis

log = logging.getLogger("locspec")

RESIDUAL_LIMIT = 1e-5


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


def _epsilon(text: str):
    if text == "median":
        return "median"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'median', got {text!r}")
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return value


def _count(minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}")
        return value

    return parse


def _add_common(p: argparse.ArgumentParser, l_default) -> None:
    p.add_argument("--epsilon", type=_epsilon, default="median", help="kernel bandwidth or 'median' (default)")
    p.add_argument("--k", type=_count(1), default=3, help="number of localized eigenvectors (default 3)")
    p.add_argument("--l", type=_count(1), default=l_default, help="eigenpairs to compute")
    p.add_argument("--oversample", type=_count(0), default=10)
    p.add_argument("--power-iters", type=_count(0), default=10)
    p.add_argument("--seed", type=_count(0), default=0)
    p.add_argument("--mode", choices=("magnitude", "signed"), default="magnitude")
    p.add_argument("--weight-eigenvalues", action="store_true", help="scale eigenvectors by eigenvalues before selection")
    p.add_argument("--method", choices=("dense", "randomized", "auto"), default="auto")
    p.add_argument("--out", default="locspec-out", help="output directory")
    p.add_argument("--strict", action="store_true", help=f"fail if the eigen-residual exceeds {RESIDUAL_LIMIT:g}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locspec", description="Localized spectral similarity search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", help="synthetic surface with two hovering anomalies")
    _add_common(p, 15)
    p.add_argument("--g", type=_count(2), default=50, help="grid side (g*g surface points)")
    p.add_argument("--delta", type=float, default=None, help="anomaly height above the surface (default: z-range)")
    p.add_argument("--trials", type=_count(1), default=1, help="repeat with seeds seed..seed+trials-1")

    p = sub.add_parser("image", help="3x3 patch similarity on a grayscale PGM")
    _add_common(p, 15)
    p.set_defaults(method="randomized")
    p.add_argument("image", help="input PGM (P2 or P5)")
    p.add_argument("--ref", required=True, help="reference patch centre as 'y,x' (0-based pixels)")
    p.add_argument("--top", type=_count(1), default=10)

    p = sub.add_parser("rank", help="rank rows of a CSV data matrix")
    _add_common(p, None)
    p.add_argument("data", help="CSV file, one point per row, optional header")
    p.add_argument("--ref", required=True, type=_count(0), help="reference row index (0-based)")
    p.add_argument("--top", type=_count(1), default=10)
    return parser


# ---------------------------------------------------------------- helpers


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _scores_csv(scores: np.ndarray) -> str:
    lines = ["index,score"]
    lines += [f"{i},{_fmt(s)}" for i, s in enumerate(scores)]
    return "\n".join(lines) + "\n"


def _write(out_dir: str, name: str, payload) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    data = payload.encode() if isinstance(payload, str) else payload
    with open(path, "wb") as fh:
        fh.write(data)
    return path


def read_csv_matrix(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise UsageError(f"{path}: no data rows")

    def parse(row, lineno):
        try:
            return [float(c) for c in row]
        except ValueError:
            raise UsageError(f"{path}: non-numeric cell on data row {lineno}") from None

    first_numeric = True
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        first_numeric = False
    if not first_numeric:
        if any(_is_float(c) for c in rows[0]):
            raise UsageError(f"{path}: first row mixes numbers and labels")
        rows = rows[1:]
    data = [parse(row, i) for i, row in enumerate(rows)]
    if not data:
        raise UsageError(f"{path}: no data rows")
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise UsageError(f"{path}: rows have differing lengths {sorted(widths)}")
    X = np.array(data, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise UsageError(f"{path}: non-finite value")
    return X


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _resolve(args, m: int, kernel_mode: str | None = None):
    """Validate sizes and build kernel/solver configs."""
    if m < 2:
        raise UsageError(f"need at least 2 points, got {m}")
    l = args.l if args.l is not None else min(15, m)
    if l > m:
        raise UsageError(f"l = {l} exceeds the number of points {m}")
    if args.k > l:
        raise UsageError(f"k = {args.k} must not exceed l = {l}")
    method = args.method
    if method == "auto":
        method = "dense" if m <= DENSE_AUTO_LIMIT else "randomized"
    if method == "randomized" and l + args.oversample > m:
        raise UsageError(f"l + oversample = {l + args.oversample} exceeds the number of points {m}")
    if kernel_mode is None:
        kernel_mode = "dense" if method == "dense" else "matrix-free"
    kernel = KernelConfig(bandwidth=args.epsilon, mode=kernel_mode)
    solver = SolverConfig(l=l, oversample=args.oversample, power_iters=args.power_iters, seed=args.seed, method=method)
    return kernel, solver


def _solve(X, kernel: KernelConfig, solver: SolverConfig, strict: bool):
    graph = build_gaussian_kernel(X, kernel)
    basis = compute_eigenbasis(normalize_symmetric(graph), solver)
    if basis.residual > RESIDUAL_LIMIT:
        msg = f"eigen-residual {basis.residual:.3e} exceeds {RESIDUAL_LIMIT:g}"
        if strict:
            raise NumericalFailure(msg)
        log.warning(msg)
    return graph, basis


def _echo_config(out, **items) -> None:
    out.write("config: " + " ".join(f"{k}={v}" for k, v in items.items()) + "\n")


# --------------------------------------------------------------- commands


def cmd_surface(args, out) -> None:
    outcomes = []
    for trial in range(args.trials):
        seed = args.seed + trial
        inst = datasets.generate_surface(datasets.SurfaceSpec(g=args.g, delta=args.delta, seed=seed))
        m = inst.X.shape[0]
        kernel, solver = _resolve(args, m, kernel_mode="dense")
        solver = SolverConfig(solver.l, solver.oversample, solver.power_iters, seed, solver.method)
        graph, basis = _solve(inst.X, kernel, solver, args.strict)
        res = find_kernel_similarities(
            inst.X, inst.ref_index, args.k, mode=args.mode,
            weight_eigenvalues=args.weight_eigenvalues, basis=basis, epsilon=graph.epsilon,
        )
        ranks = {
            "localized": rank_of(res.ranking, inst.target_index),
            "nn": rank_of(nn_rank(inst.X, inst.ref_index), inst.target_index),
            "kernel_nn": rank_of(kernel_nn_rank(graph, inst.ref_index), inst.target_index),
        }
        outcomes.append(ranks)
        if trial == 0:
            _echo_config(
                out, command="surface", g=args.g, m=m, k=args.k, l=solver.l, epsilon=_fmt(graph.epsilon),
                epsilon_rule=args.epsilon if args.epsilon == "median" else "fixed", delta=_fmt(inst.delta),
                oversample=solver.oversample, power_iters=solver.power_iters, seed=args.seed,
                mode=args.mode, weight_eigenvalues=args.weight_eigenvalues, method=solver.method,
                trials=args.trials,
            )
        out.write(
            f"trial seed={seed} ref={inst.ref_index} target={inst.target_index} "
            f"rank_localized={ranks['localized']} rank_nn={ranks['nn']} rank_kernel_nn={ranks['kernel_nn']} "
            f"residual={basis.residual:.3e}\n"
        )
        suffix = "" if args.trials == 1 else f"_seed{seed}"
        _write(args.out, f"surface{suffix}.csv", datasets.surface_to_csv(inst))
        _write(args.out, f"surface_scores{suffix}.csv", _scores_csv(res.scores.s))
    if args.trials > 1:
        hits = sum(o["localized"] == 1 for o in outcomes)
        beats = sum(o["nn"] > o["localized"] for o in outcomes)
        out.write(f"success {hits}/{args.trials} = {hits / args.trials:.3f}\n")
        out.write(f"nn_worse {beats}/{args.trials} = {beats / args.trials:.3f}\n")


def _parse_center(text: str) -> tuple[int, int]:
    try:
        y, x = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--ref must be 'y,x', got {text!r}") from None
    return y, x


def cmd_image(args, out) -> None:
    try:
        img = datasets.read_pgm_file(args.image)
    except OSError as exc:
        raise UsageError(f"cannot read {args.image}: {exc}") from None
    cy, cx = _parse_center(args.ref)
    X, grid = datasets.extract_patches(img)
    r = datasets.patch_index_of(grid, cy, cx)
    kernel, solver = _resolve(args, X.shape[0])
    graph, basis = _solve(X, kernel, solver, args.strict)
    res = find_kernel_similarities(
        X, r, args.k, mode=args.mode, weight_eigenvalues=args.weight_eigenvalues,
        basis=basis, epsilon=graph.epsilon,
    )
    _echo_config(
        out, command="image", image=os.path.basename(args.image), height=img.shape[0], width=img.shape[1],
        patches=grid.rows, ref=f"{cy},{cx}", ref_row=r, k=args.k, l=solver.l, epsilon=_fmt(graph.epsilon),
        epsilon_rule=args.epsilon if args.epsilon == "median" else "fixed", oversample=solver.oversample,
        power_iters=solver.power_iters, seed=solver.seed, mode=args.mode,
        weight_eigenvalues=args.weight_eigenvalues, method=solver.method, kernel_mode=kernel.mode,
    )
    out.write(f"residual={basis.residual:.3e} selected={','.join(str(int(j)) for j in res.selection.perm)}\n")
    for pos, i in enumerate(res.ranking.order[: args.top], start=1):
        ty, tx = grid.top_left(int(i))
        out.write(f"{pos}\trow={int(i)}\tcenter={ty + 1},{tx + 1}\tscore={_fmt(res.scores.s[i])}\n")
    _write(args.out, "image_scores.csv", _scores_csv(res.scores.s))
    _write(args.out, "heatmap_scores.pgm", datasets.write_pgm(datasets.scores_to_heatmap(res.scores.s, grid, invert=True)))
    _write(args.out, "eigvec_first.pgm", datasets.write_pgm(datasets.eigvec_to_map(basis, 0, grid, invert=True)))
    top = int(res.selection.perm[0])
    _write(args.out, "eigvec_top.pgm", datasets.write_pgm(datasets.eigvec_to_map(basis, top, grid, invert=True)))


def cmd_rank(args, out) -> None:
    X = read_csv_matrix(args.data)
    m = X.shape[0]
    if m < 2:
        raise UsageError(f"need at least 2 points, got {m}")
    if args.ref >= m:
        raise UsageError(f"--ref {args.ref} out of range for {m} rows")
    kernel, solver = _resolve(args, m)
    graph, basis = _solve(X, kernel, solver, args.strict)
    res = find_kernel_similarities(
        X, args.ref, args.k, mode=args.mode, weight_eigenvalues=args.weight_eigenvalues,
        basis=basis, epsilon=graph.epsilon,
    )
    _echo_config(
        out, command="rank", data=os.path.basename(args.data), m=m, n=X.shape[1], ref=args.ref, k=args.k,
        l=solver.l, epsilon=_fmt(graph.epsilon), epsilon_rule=args.epsilon if args.epsilon == "median" else "fixed",
        oversample=solver.oversample, power_iters=solver.power_iters, seed=solver.seed, mode=args.mode,
        weight_eigenvalues=args.weight_eigenvalues, method=solver.method,
    )
    out.write(f"residual={basis.residual:.3e}\n")
    for pos, i in enumerate(res.ranking.order[: args.top], start=1):
        out.write(f"{pos}\t{int(i)}\t{_fmt(res.scores.s[i])}\n")
    _write(args.out, "scores.csv", _scores_csv(res.scores.s))


COMMANDS = {"surface": cmd_surface, "image": cmd_image, "rank": cmd_rank}


def main(argv=None, out=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, out)
    except (NumericalFailure, ConvergenceError) as exc:
        print(f"locspec: numerical failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"locspec: error: {exc}", file=sys.stderr)
        return 2
    return 0


def run(argv) -> tuple[int, str]:
    """Run the CLI in-process and capture stdout."""
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
