"""Recovery experiments: orthogonally decomposable ground truths, single
trials, sweeps over the sampling ratio, and perturbed initializations.

A trial at dimension d, rank r and sampling ratio alpha draws
``n = round(alpha * sqrt(r) * d**1.5)`` entries of a synthetic tensor,
initializes spectrally, runs the Grassmannian descent and declares success
when the full-tensor relative error is at most 1e-7.

Everything is reproducible: per-trial seeds are derived by hashing
``(master seed, d, r, alpha index, trial index)`` through numpy's
SeedSequence, and each trial splits its seed into independent streams for
truth generation, sampling and perturbation.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .completion import DescentConfig, grassmann_descent, with_mu0
from .grassmann import TripleFrame, coherence, orthonormalize, triple_distance, trim
from .observations import ObservationSet, sample_uniform
from .spectral import initialize
from .tensor_ops import multilinear_product, norm

SUCCESS_REL_ERROR = 1e-7


@dataclass(frozen=True)
class GroundTruth:
    """Synthetic target: tensor = (factors) . core with a diagonal core."""

    tensor: np.ndarray
    factors: TripleFrame
    core: np.ndarray


@dataclass(frozen=True)
class TrialRecord:
    d: int
    r: int
    alpha: float
    n: int
    trial: int
    seed: int
    success: bool
    rel_error: float
    iterations: int
    dp_init: float
    runtime_ms: float


@dataclass(frozen=True)
class CellStats:
    r: int
    alpha: float
    trials: int
    success_rate: float
    mean_rel_error: float
    mean_iterations: float


@dataclass(frozen=True)
class SweepResult:
    records: list[TrialRecord]
    cells: list[CellStats]


def _stream(*key) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def derive_trial_seed(master_seed: int, d: int, r: int, alpha_index: int, trial_index: int) -> int:
    """Deterministic per-trial seed from the sweep coordinates."""
    ss = np.random.SeedSequence([master_seed, d, r, alpha_index, trial_index])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_count(alpha: float, r: int, d: int) -> int:
    """round-half-up of alpha * sqrt(r) * d^(3/2)."""
    return int(math.floor(alpha * math.sqrt(r) * d**1.5 + 0.5))


def generate_odeco(d: int, r: int, seed: int) -> GroundTruth:
    """Orthogonally decomposable ground truth of multilinear ranks (r, r, r).

    The three factor frames are the eigenvectors of the ``r`` largest
    eigenvalues of independent symmetrized standard Gaussian matrices
    (delocalized, hence incoherent with high probability); the diagonal
    core has all entries equal to ``d``, making every nonzero unfolding
    singular value equal to ``d``.
    """
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    rng = _stream(seed, 0)
    frames = []
    for _ in range(3):
        g = rng.standard_normal((d, d))
        w, vecs = np.linalg.eigh(0.5 * (g + g.T))
        frames.append(np.ascontiguousarray(vecs[:, ::-1][:, :r]))
    core = np.zeros((r, r, r))
    for k in range(r):
        core[k, k, k] = float(d)
    u, v, w_ = frames
    return GroundTruth(
        tensor=multilinear_product(core, u, v, w_),
        factors=TripleFrame(u, v, w_),
        core=core,
    )


def _resolved_config(config: DescentConfig, truth: GroundTruth) -> DescentConfig:
    if config.mu0 == "auto":
        mu0 = max(1.0, max(coherence(f) for f in truth.factors))
        return with_mu0(config, mu0)
    return config


def _run_from_init(d, r, alpha, n, seed, trial, truth, obs, init, config, t_start):
    report = grassmann_descent(obs, (r, r, r), config, init)
    rel_error = norm(report.reconstruction() - truth.tensor) / norm(truth.tensor)
    return TrialRecord(
        d=d,
        r=r,
        alpha=float(alpha),
        n=n,
        trial=trial,
        seed=seed,
        success=bool(rel_error <= SUCCESS_REL_ERROR),
        rel_error=float(rel_error),
        iterations=report.state.iteration,
        dp_init=float(triple_distance(init, truth.factors)),
        runtime_ms=(time.perf_counter() - t_start) * 1e3,
    )


def run_trial(
    d: int, r: int, alpha: float, seed: int, config: DescentConfig, trial: int = 0
) -> TrialRecord:
    """One complete recovery trial, deterministic in ``seed``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    t_start = time.perf_counter()
    n = sample_count(alpha, r, d)
    truth = generate_odeco(d, r, seed)
    config = _resolved_config(config, truth)
    obs = sample_uniform(truth.tensor, n, [seed, 1])
    init = initialize(obs, (r, r, r), config.mu0)
    return _run_from_init(d, r, alpha, n, seed, trial, truth, obs, init, config, t_start)


def perturbed_init_trial(
    d: int,
    r: int,
    alpha: float,
    sigma: float,
    seed: int,
    config: DescentConfig,
    trial: int = 0,
) -> TrialRecord:
    """Trial whose spectral initialization is perturbed by Gaussian noise of
    scale ``sigma`` (added to the frame matrices, re-orthonormalized and
    trimmed).  ``sigma = 0`` reproduces :func:`run_trial` exactly."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return run_trial(d, r, alpha, seed, config, trial)
    t_start = time.perf_counter()
    n = sample_count(alpha, r, d)
    truth = generate_odeco(d, r, seed)
    config = _resolved_config(config, truth)
    obs = sample_uniform(truth.tensor, n, [seed, 1])
    init = initialize(obs, (r, r, r), config.mu0)
    noise = _stream(seed, 2)
    frames = []
    for f in init:
        g = f + sigma * noise.standard_normal(f.shape)
        frames.append(trim(orthonormalize(g), config.mu0))
    init = TripleFrame(*frames)
    return _run_from_init(d, r, alpha, n, seed, trial, truth, obs, init, config, t_start)


def _trial_worker(spec):
    d, r, alpha, seed, config, trial = spec
    return run_trial(d, r, alpha, seed, config, trial)


def sweep(
    d: int,
    r_list,
    alpha_list,
    trials_per_cell: int,
    seed: int,
    config: DescentConfig,
    threads: int = 1,
) -> SweepResult:
    """Grid of independent trials over (rank, alpha) cells.

    Per-trial seeds are derived from the sweep coordinates, so records are
    identical regardless of ``threads``; results are ordered by
    (rank index, alpha index, trial index).
    """
    if not r_list or not alpha_list:
        raise ValueError("r_list and alpha_list must be nonempty")
    if trials_per_cell < 1:
        raise ValueError("trials_per_cell must be >= 1")
    specs = []
    for r in r_list:
        for ai, alpha in enumerate(alpha_list):
            for t in range(trials_per_cell):
                trial_seed = derive_trial_seed(seed, d, r, ai, t)
                specs.append((d, r, float(alpha), trial_seed, config, t))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_trial_worker, specs, chunksize=1))
    else:
        records = [_trial_worker(s) for s in specs]

    cells = []
    k = 0
    for r in r_list:
        for alpha in alpha_list:
            chunk = records[k : k + trials_per_cell]
            k += trials_per_cell
            cells.append(
                CellStats(
                    r=r,
                    alpha=float(alpha),
                    trials=trials_per_cell,
                    success_rate=float(np.mean([rec.success for rec in chunk])),
                    mean_rel_error=float(np.mean([rec.rel_error for rec in chunk])),
                    mean_iterations=float(np.mean([rec.iterations for rec in chunk])),
                )
            )
    return SweepResult(records=records, cells=cells)
