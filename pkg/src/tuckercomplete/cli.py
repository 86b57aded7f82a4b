"""Command-line front end.

Subcommands:

* ``complete``  -- one completion run (synthetic ground truth, or a tensor
  file via ``--input``); emits a one-row trial CSV.
* ``sweep``     -- grid of trials over ranks and sampling ratios; emits the
  per-trial CSV behind recovery-rate plots.
* ``init-only`` -- spectral initialization only; emits per-mode coherence
  and subspace distance to the truth where available.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
All randomness flows from ``--seed``; runs are reproducible.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .completion import DescentConfig, grassmann_descent
from .experiments import (
    TrialRecord,
    run_trial,
    sample_count,
    sweep,
)
from .grassmann import TripleFrame, coherence, proj_distance, triple_distance, trim
from .observations import ObservationSet, sample_uniform
from .spectral import second_moment_estimate, top_eigenspace
from .tensor_ops import norm, unfold
from .textio import emit_csv, read_observations, read_tensor


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors exit with 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class CliConfig:
    command: str
    dims: tuple[int, int, int] | None = None
    ranks: tuple[int, int, int] | None = None
    n: int | None = None
    alpha: float | None = None
    alphas: list[float] = field(default_factory=list)
    r_list: list[int] = field(default_factory=list)
    d: int | None = None
    trials: int = 1
    mu0: float | str = "auto"
    rho: float | str = "auto"
    gamma: float = 3.5
    eps_tol: float = 1e-14
    max_iterations: int = 300
    seed: int = 0
    threads: int = 1
    input: str | None = None
    obs: str | None = None
    out: str = ""


def _parse_int_triple(text: str, what: str) -> tuple[int, int, int]:
    parts = text.split(",")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"{what} must be three comma-separated integers, got {text!r}")
    if len(vals) != 3 or any(v < 1 for v in vals):
        raise UsageError(f"{what} must be three positive integers, got {text!r}")
    return vals


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        vals = [int(p) for p in text.split(",") if p != ""]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise UsageError(f"{what} must be positive integers, got {text!r}")
    return vals


def _parse_alphas(text: str) -> list[float]:
    """Either a comma list or an inclusive ``start:stop:step`` range."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise ValueError
            out = []
            k = 0
            while True:
                v = start + k * step
                if v > stop + 1e-9 * max(abs(stop), 1.0):
                    break
                out.append(v)
                k += 1
            return out
        out = [float(p) for p in text.split(",") if p != ""]
        if not out:
            raise ValueError
        return out
    except ValueError:
        raise UsageError(f"bad alpha specification {text!r}")


def _parse_level(text: str, what: str, minimum: float) -> float | str:
    if text == "auto":
        return "auto"
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"{what} must be a number or 'auto', got {text!r}")
    if v < minimum:
        raise UsageError(f"{what} must be >= {minimum}")
    return v


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--mu0", default="auto", help="incoherence level (default: auto)")
    p.add_argument("--rho", default="auto", help="penalty weight (default: auto)")
    p.add_argument("--gamma", type=float, default=3.5, help="trust-ball radius")
    p.add_argument("--eps-tol", type=float, default=1e-14, dest="eps_tol")
    p.add_argument("--max-iterations", type=int, default=300, dest="max_iterations")


def build_parser() -> _Parser:
    parser = _Parser(prog="tuckercomplete", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("complete", help="run one completion")
    pc.add_argument("--dims", help="d1,d2,d3 (synthetic runs; inferred from --input)")
    pc.add_argument("--ranks", required=True, help="r1,r2,r3")
    pc.add_argument("--n", type=int, help="number of sampled entries")
    pc.add_argument("--alpha", type=float, help="sampling ratio n / (sqrt(r) d^1.5)")
    pc.add_argument("--input", help="tensor text file to complete")
    pc.add_argument("--obs", help="observation text file (requires --input)")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--out", required=True, help="output CSV path")
    _add_solver_flags(pc)

    ps = sub.add_parser("sweep", help="phase-transition sweep")
    ps.add_argument("--d", type=int, required=True)
    ps.add_argument("--ranks", required=True, help="comma list of ranks")
    ps.add_argument("--alphas", required=True, help="comma list or start:stop:step")
    ps.add_argument("--trials", type=int, default=50)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ps.add_argument("--out", required=True)
    _add_solver_flags(ps)

    pi = sub.add_parser("init-only", help="spectral initialization diagnostics")
    pi.add_argument("--dims", help="d1,d2,d3")
    pi.add_argument("--ranks", required=True)
    pi.add_argument("--n", type=int)
    pi.add_argument("--alpha", type=float)
    pi.add_argument("--input", help="tensor text file")
    pi.add_argument("--obs", help="observation text file (requires --input)")
    pi.add_argument("--mu0", default="auto")
    pi.add_argument("--seed", type=int, default=0)
    pi.add_argument("--out", required=True)
    return parser


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    cfg = CliConfig(command=ns.command, out=ns.out, seed=ns.seed)
    if cfg.seed < 0:
        raise UsageError("--seed must be nonnegative")

    if ns.command in ("complete", "init-only"):
        cfg.ranks = _parse_int_triple(ns.ranks, "--ranks")
        cfg.dims = _parse_int_triple(ns.dims, "--dims") if ns.dims else None
        cfg.n = ns.n
        cfg.alpha = ns.alpha
        cfg.input = ns.input
        cfg.obs = ns.obs
        if cfg.obs and not cfg.input:
            raise UsageError("--obs requires --input")
        if cfg.obs:
            if cfg.n is not None or cfg.alpha is not None:
                raise UsageError("--obs replaces --n/--alpha")
        elif (cfg.n is None) == (cfg.alpha is None):
            raise UsageError("provide exactly one of --n or --alpha")
        if cfg.n is not None and cfg.n < 1:
            raise UsageError("--n must be >= 1")
        if cfg.alpha is not None and cfg.alpha <= 0:
            raise UsageError("--alpha must be positive")
        if cfg.input is None and cfg.dims is None:
            raise UsageError("--dims is required without --input")
        cfg.mu0 = _parse_level(ns.mu0, "--mu0", 1.0)
    if ns.command == "sweep":
        if ns.d < 1:
            raise UsageError("--d must be positive")
        if ns.trials < 1:
            raise UsageError("--trials must be >= 1")
        if ns.threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg.d = ns.d
        cfg.r_list = _parse_int_list(ns.ranks, "--ranks")
        cfg.alphas = _parse_alphas(ns.alphas)
        cfg.trials = ns.trials
        cfg.threads = ns.threads
        cfg.mu0 = _parse_level(ns.mu0, "--mu0", 1.0)
    if ns.command in ("complete", "sweep"):
        cfg.rho = _parse_level(ns.rho, "--rho", 0.0)
        if ns.gamma <= 0:
            raise UsageError("--gamma must be positive")
        if ns.eps_tol <= 0:
            raise UsageError("--eps-tol must be positive")
        if ns.max_iterations < 1:
            raise UsageError("--max-iterations must be >= 1")
        cfg.gamma = ns.gamma
        cfg.eps_tol = ns.eps_tol
        cfg.max_iterations = ns.max_iterations
    return cfg


def _descent_config(cfg: CliConfig) -> DescentConfig:
    return DescentConfig(
        mu0=cfg.mu0,
        rho=cfg.rho,
        gamma=cfg.gamma,
        eps_tol=cfg.eps_tol,
        max_iterations=cfg.max_iterations,
        seed=cfg.seed,
    )


def _truth_frames_by_svd(t: np.ndarray, ranks) -> TripleFrame:
    frames = []
    for mode, r in zip((1, 2, 3), ranks):
        u, _, _ = np.linalg.svd(unfold(t, mode), full_matrices=False)
        frames.append(np.ascontiguousarray(u[:, :r]))
    return TripleFrame(*frames)


def _load_observations(cfg: CliConfig, t: np.ndarray):
    dims = t.shape
    if cfg.obs:
        obs = read_observations(cfg.obs)
        if obs.dims != dims:
            raise UsageError(
                f"observation dims {obs.dims} do not match tensor dims {dims}"
            )
        return obs
    rmax = max(cfg.ranks)
    n = cfg.n if cfg.n is not None else int(
        math.floor(cfg.alpha * math.sqrt(rmax) * math.sqrt(float(np.prod(dims))) + 0.5)
    )
    return sample_uniform(t, n, [cfg.seed, 1])


def _spectral_frames(obs: ObservationSet, ranks):
    return [top_eigenspace(second_moment_estimate(obs, m), r) for m, r in zip((1, 2, 3), ranks)]


def _resolve_mu0_from_frames(frames) -> float:
    return max(1.0, max(coherence(f) for f in frames))


def _run_complete(cfg: CliConfig) -> list[TrialRecord]:
    if cfg.input is None:
        d1, d2, d3 = cfg.dims
        r1, r2, r3 = cfg.ranks
        if not (d1 == d2 == d3 and r1 == r2 == r3):
            raise UsageError(
                "synthetic runs need cubic --dims and equal --ranks; "
                "use --input for general tensors"
            )
        alpha = cfg.alpha
        if alpha is None:
            alpha = cfg.n / (math.sqrt(r1) * d1**1.5)
        return [run_trial(d1, r1, alpha, cfg.seed, _descent_config(cfg))]

    import time

    t_start = time.perf_counter()
    t = read_tensor(cfg.input)
    if cfg.dims and tuple(t.shape) != cfg.dims:
        raise UsageError(f"--dims {cfg.dims} does not match file dims {t.shape}")
    obs = _load_observations(cfg, t)
    raw = _spectral_frames(obs, cfg.ranks)
    mu0 = cfg.mu0 if cfg.mu0 != "auto" else _resolve_mu0_from_frames(raw)
    init = TripleFrame(*(trim(f, mu0) for f in raw))
    config = DescentConfig(
        mu0=mu0,
        rho=cfg.rho,
        gamma=cfg.gamma,
        eps_tol=cfg.eps_tol,
        max_iterations=cfg.max_iterations,
        seed=cfg.seed,
    )
    report = grassmann_descent(obs, cfg.ranks, config, init)
    rel = norm(report.reconstruction() - t) / max(norm(t), 1e-300)
    truth = _truth_frames_by_svd(t, cfg.ranks)
    rmax = max(cfg.ranks)
    dmaxv = max(t.shape)
    alpha = obs.n / (math.sqrt(rmax) * math.sqrt(float(np.prod(t.shape))))
    rec = TrialRecord(
        d=dmaxv,
        r=rmax,
        alpha=float(alpha),
        n=obs.n,
        trial=0,
        seed=cfg.seed,
        success=bool(rel <= 1e-7),
        rel_error=float(rel),
        iterations=report.state.iteration,
        dp_init=float(triple_distance(init, truth)),
        runtime_ms=(time.perf_counter() - t_start) * 1e3,
    )
    return [rec]


def _run_init_only(cfg: CliConfig) -> list[str]:
    if cfg.input is not None:
        t = read_tensor(cfg.input)
        if cfg.dims and tuple(t.shape) != cfg.dims:
            raise UsageError(f"--dims {cfg.dims} does not match file dims {t.shape}")
    else:
        d1, d2, d3 = cfg.dims
        r1, r2, r3 = cfg.ranks
        if not (d1 == d2 == d3 and r1 == r2 == r3):
            raise UsageError("synthetic runs need cubic --dims and equal --ranks")
        from .experiments import generate_odeco

        t = generate_odeco(d1, r1, cfg.seed).tensor
    obs = _load_observations(cfg, t)
    raw = _spectral_frames(obs, cfg.ranks)
    mu0 = cfg.mu0 if cfg.mu0 != "auto" else _resolve_mu0_from_frames(raw)
    truth = _truth_frames_by_svd(t, cfg.ranks)
    lines = ["mode,d,r,n,coherence,dp_truth"]
    for mode, f, uk in zip((1, 2, 3), raw, truth):
        trimmed = trim(f, mu0)
        lines.append(
            f"{mode},{f.shape[0]},{f.shape[1]},{obs.n},"
            f"{format(coherence(trimmed), '.17g')},"
            f"{format(proj_distance(trimmed, uk), '.17g')}"
        )
    return lines


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        if cfg.command == "complete":
            emit_csv(_run_complete(cfg), cfg.out)
        elif cfg.command == "sweep":
            result = sweep(
                cfg.d,
                cfg.r_list,
                cfg.alphas,
                cfg.trials,
                cfg.seed,
                _descent_config(cfg),
                threads=cfg.threads,
            )
            emit_csv(result.records, cfg.out)
            for cell in result.cells:
                print(
                    f"r={cell.r} alpha={cell.alpha:g}: "
                    f"success_rate={cell.success_rate:.3f} "
                    f"mean_rel_error={cell.mean_rel_error:.3e} "
                    f"mean_iterations={cell.mean_iterations:.1f}"
                )
        elif cfg.command == "init-only":
            lines = _run_init_only(cfg)
            with open(cfg.out, "w") as fh:
                fh.write("\n".join(lines) + "\n")
        return 0
    except UsageError as exc:
        print(f"tuckercomplete: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"tuckercomplete: I/O error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"tuckercomplete: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
