"""Penalized completion objective and gradient descent over the product of
Grassmannians.

The data objective is the least-squares fit over cores,

    fit(x, y, z) = min_core 0.5 * sum_t (tucker(x,y,z,core)[w_t] - T[w_t])^2,

with the core eliminated in closed form through its normal equations.  A
smooth row-norm penalty keeps iterates incoherent.  Descent moves along
Grassmannian geodesics with an exact (bracketed golden-section) line search
constrained to a trust ball around the initial point.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .grassmann import (
    TripleFrame,
    check_frame,
    orthonormality_defect,
    reorthonormalize_if_drifted,
    tangent_project,
    triple_distance,
)
from .kernels import normal_system, scatter_products, tucker_values
from .observations import ObservationSet

_EIG_CUTOFF = 1e-12   # pseudoinverse regime below this (relative to lam_max)
_TINY = 1e-300


@dataclass(frozen=True)
class DescentConfig:
    """Hyperparameters of the Grassmannian descent solver.

    ``mu0`` is the incoherence level (penalty threshold ``3 * mu0``); the
    string ``"auto"`` lets the caller-facing layers substitute a measured
    value.  ``rho`` scales the penalty; ``"auto"`` resolves to
    ``10 * n * lam2 * log(dmax) / (d1 d2 d3)`` with ``lam2`` the largest
    eigenvalue of the mode-1 second-moment estimate, a data-driven proxy for
    the squared largest unfolding singular value.  ``gamma`` is the radius
    of the trust ball (triple projection distance) around the initial
    point.  ``seed`` is reserved for stochastic solver components; the
    descent itself is deterministic and does not consume it.
    """

    mu0: float | str = "auto"
    rho: float | str = "auto"
    gamma: float = 3.5
    eps_tol: float = 1e-14
    max_iterations: int = 300
    bracket_growth: float = 2.0
    section_tol: float = 1e-3
    max_probes: int = 40
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.mu0, str):
            if self.mu0 != "auto":
                raise ValueError("mu0 must be a number or 'auto'")
        elif self.mu0 < 1:
            raise ValueError("mu0 must be >= 1")
        if isinstance(self.rho, str):
            if self.rho != "auto":
                raise ValueError("rho must be a number or 'auto'")
        elif self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.gamma <= 0 or self.eps_tol <= 0:
            raise ValueError("gamma and eps_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.bracket_growth <= 1 or self.section_tol <= 0 or self.max_probes < 1:
            raise ValueError("bad line-search controls")


@dataclass(frozen=True)
class SolveState:
    frames: TripleFrame
    core: np.ndarray
    objective: float
    gradient_norm: float
    iteration: int


@dataclass
class SolveReport:
    """Outcome of a descent run.

    ``converged`` means a stopping rule (relative objective decrease or
    scaled gradient norm below ``eps_tol``) fired before the iteration cap;
    it does not by itself certify recovery.  ``trace`` holds one row per
    executed pass: penalized objective, gradient norm, accepted step,
    distance from the initial point, and worst frame orthonormality defect.
    """

    state: SolveState
    converged: bool
    stop_reason: str
    trace: dict[str, np.ndarray]
    wall_time_s: float
    warnings: list[str] = field(default_factory=list)

    def reconstruction(self) -> np.ndarray:
        from .tensor_ops import multilinear_product

        f = self.state.frames
        return multilinear_product(self.state.core, f.x, f.y, f.z)


def _contig(frames: TripleFrame) -> TripleFrame:
    return TripleFrame(*(np.ascontiguousarray(f, dtype=np.float64) for f in frames))


def _core_fit(frames: TripleFrame, obs: ObservationSet):
    """Least-squares core at the given frames.

    Returns ``(core, residuals, degenerate)`` where ``residuals`` are the
    fitted-minus-observed values at the samples.  The normal matrix is
    factored spectrally; eigenvalues below 1e-12 of the largest are dropped
    (minimum-norm pseudoinverse solution), flagged via ``degenerate``.
    """
    i1, i2, i3 = obs.idx[:, 0], obs.idx[:, 1], obs.idx[:, 2]
    x, y, z = frames
    a_mat, b_vec = normal_system(i1, i2, i3, obs.values, x, y, z)
    w, q = np.linalg.eigh(a_mat)
    lam_max = w[-1]
    keep = w > _EIG_CUTOFF * lam_max if lam_max > 0 else np.zeros_like(w, dtype=bool)
    degenerate = not bool(keep.all())
    if keep.any():
        c = q[:, keep] @ ((q[:, keep].T @ b_vec) / w[keep])
    else:
        c = np.zeros_like(b_vec)
    core = np.ascontiguousarray(c.reshape(x.shape[1], y.shape[1], z.shape[1]))
    res = tucker_values(i1, i2, i3, x, y, z, core) - obs.values
    return core, res, degenerate


def solve_core(frames: TripleFrame, obs: ObservationSet) -> np.ndarray:
    """Core minimizing the observed-entry squared error at fixed frames."""
    frames = _contig(TripleFrame(*frames))
    core, _, _ = _core_fit(frames, obs)
    return core


def fit_objective(frames: TripleFrame, obs: ObservationSet) -> tuple[float, np.ndarray]:
    """Data objective (half the squared residual at the samples, minimized
    over cores) and the minimizing core."""
    frames = _contig(TripleFrame(*frames))
    core, res, _ = _core_fit(frames, obs)
    return 0.5 * float(res @ res), core


# --- row-norm incoherence penalty -----------------------------------------

_CLAMP = 26.0  # exp((z-1)^2) overflows float64 just past z-1 = 27


def _penalty_terms(u: np.ndarray) -> np.ndarray:
    # u = z - 1; zero for u <= 0, exp(u^2)-1 up to the clamp, then linear
    out = np.zeros_like(u)
    mid = (u > 0) & (u <= _CLAMP)
    out[mid] = np.expm1(u[mid] ** 2)
    high = u > _CLAMP
    if high.any():
        base = math.expm1(_CLAMP**2)
        slope = 2.0 * _CLAMP * math.exp(_CLAMP**2)
        out[high] = base + slope * (u[high] - _CLAMP)
    return out


def _penalty_slope(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    mid = (u > 0) & (u <= _CLAMP)
    out[mid] = 2.0 * u[mid] * np.exp(u[mid] ** 2)
    high = u > _CLAMP
    if high.any():
        out[high] = 2.0 * _CLAMP * math.exp(_CLAMP**2)
    return out


def coherence_penalty(frames: TripleFrame, mu0: float, rho: float) -> float:
    """Smooth penalty that activates once any squared row norm exceeds
    ``3 mu0 r / d`` for its frame; exactly zero for frames with coherence
    at most ``3 mu0``."""
    if mu0 < 1 or rho < 0:
        raise ValueError("need mu0 >= 1 and rho >= 0")
    total = 0.0
    for f in frames:
        d, r = f.shape
        z = d * np.einsum("ij,ij->i", f, f) / (3.0 * mu0 * r)
        total += float(np.sum(_penalty_terms(z - 1.0)))
    return rho * total


def _penalty_row_gradients(frames: TripleFrame, mu0: float, rho: float):
    grads = []
    for f in frames:
        d, r = f.shape
        scale = d / (3.0 * mu0 * r)
        z = scale * np.einsum("ij,ij->i", f, f)
        rowg = rho * _penalty_slope(z - 1.0) * 2.0 * scale
        grads.append(rowg[:, None] * f)
    return grads


def _unfold_core(core: np.ndarray, mode: int) -> np.ndarray:
    r1, r2, r3 = core.shape
    if mode == 1:
        return core.reshape(r1, r2 * r3)
    if mode == 2:
        return np.ascontiguousarray(core.transpose(1, 0, 2)).reshape(r2, r1 * r3)
    return np.ascontiguousarray(core.transpose(2, 0, 1)).reshape(r3, r1 * r2)


def riemannian_gradient(
    frames: TripleFrame,
    core: np.ndarray,
    obs: ObservationSet,
    mu0: float,
    rho: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradient of the penalized objective on the product manifold.

    ``core`` must be the least-squares core at ``frames`` (envelope
    condition), so the data term's Euclidean gradient w.r.t. the mode-1
    frame is ``unfold(R,1) @ kron(y, z) @ unfold(core,1).T`` with R the
    sparse residual tensor; computed by scattering residual-weighted
    Kronecker rows, never materializing the dense unfolding.  Penalty row
    gradients are added and every component is projected onto the
    horizontal space of its frame.
    """
    frames = _contig(TripleFrame(*frames))
    core = np.ascontiguousarray(core, dtype=np.float64)
    i1, i2, i3 = obs.idx[:, 0], obs.idx[:, 1], obs.idx[:, 2]
    x, y, z = frames
    res = tucker_values(i1, i2, i3, x, y, z, core) - obs.values
    p1, p2, p3 = scatter_products(i1, i2, i3, res, x, y, z)
    gx = p1 @ _unfold_core(core, 1).T
    gy = p2 @ _unfold_core(core, 2).T
    gz = p3 @ _unfold_core(core, 3).T
    if rho > 0:
        for g, pg in zip((gx, gy, gz), _penalty_row_gradients(frames, mu0, rho)):
            g += pg
    return (
        tangent_project(x, gx),
        tangent_project(y, gy),
        tangent_project(z, gz),
    )


def _lam2_hat(obs: ObservationSet) -> float:
    """Data-driven proxy for the squared largest unfolding singular value:
    the top eigenvalue of the mode-1 second-moment estimate."""
    from .spectral import largest_eigenvalue, second_moment_estimate

    return max(largest_eigenvalue(second_moment_estimate(obs, 1)), 0.0)


def resolve_rho(config: DescentConfig, obs: ObservationSet, lam2: float | None = None) -> float:
    """Numeric penalty weight, resolving the ``"auto"`` rule from data."""
    if config.rho != "auto":
        return float(config.rho)
    if lam2 is None:
        lam2 = _lam2_hat(obs)
    dmax = max(obs.dims)
    return 10.0 * obs.n * lam2 * math.log(dmax) / float(np.prod(obs.dims))


class _GeodesicBundle:
    """Geodesics from a triple of frames along fixed directions, with the
    direction SVDs precomputed so each probe is a few small matmuls."""

    def __init__(self, frames: TripleFrame, directions):
        self.frames = frames
        self.paths = []
        for f, d in zip(frames, directions):
            l, s, rt = np.linalg.svd(d, full_matrices=False)
            s = np.where(s < 1e-14, 0.0, s)
            self.paths.append((f, l, s, rt))

    def at(self, t: float) -> TripleFrame:
        moved = []
        for f, l, s, rt in self.paths:
            cos_t = np.cos(s * t)
            sin_t = np.sin(s * t)
            h = f @ (rt.T * cos_t) @ rt + (l * sin_t) @ rt
            moved.append(np.ascontiguousarray(reorthonormalize_if_drifted(h)))
        return TripleFrame(*moved)


def _penalized_value(frames, obs, mu0, rho):
    core, res, degenerate = _core_fit(frames, obs)
    value = 0.5 * float(res @ res) + coherence_penalty(frames, mu0, rho)
    return value, core, degenerate


def _search_step(frames, directions, obs, config, anchor, mu0, rho, f0, core0, warm_t=0.0):
    """Bracketed golden-section minimization of the penalized objective
    along the geodesics, constrained to the trust ball around ``anchor``.

    The bracket starts from a quarter of the previously accepted step when
    one is available (the natural step scale near a quadratic basin is set
    by the local curvature, not by the shrinking gradient norm); the first
    iteration starts from ``1e-3 * gamma / |directions|``.

    Returns ``(t, frames, value, core, degenerate_seen)`` with value <= f0;
    t = 0 (original state) when no admissible decrease is found.
    """
    gamma = config.gamma
    dn = math.sqrt(sum(float(np.sum(d * d)) for d in directions))
    if dn == 0.0:
        return 0.0, frames, f0, core0, False

    bundle = _GeodesicBundle(frames, directions)
    degenerate_seen = False

    def feasible(fr):
        return triple_distance(fr, anchor) <= gamma

    cache: dict[float, tuple] = {}

    def probe(t):
        nonlocal degenerate_seen
        if t in cache:
            return cache[t]
        fr = bundle.at(t)
        if not feasible(fr):
            out = (math.inf, fr, None)
        else:
            value, core, degen = _penalized_value(fr, obs, mu0, rho)
            degenerate_seen = degenerate_seen or degen
            out = (value, fr, core)
        cache[t] = out
        return out

    t0 = warm_t / 4.0 if warm_t > 0.0 else 1e-3 * gamma / max(dn, _TINY)
    grow = config.bracket_growth

    # grow until the objective turns up or the ball is left
    ts = [0.0]
    vals = [f0]
    t = t0
    hit_infeasible = False
    for _ in range(config.max_probes):
        v, _, _ = probe(t)
        ts.append(t)
        vals.append(v)
        if math.isinf(v):
            hit_infeasible = True
            break
        if v > vals[-2]:
            break
        t *= grow

    if hit_infeasible:
        # bisect the ball boundary between the last feasible and first
        # infeasible probe (constraint only: no core solves)
        lo_t = ts[-2]
        hi_t = ts[-1]
        for _ in range(30):
            mid = 0.5 * (lo_t + hi_t)
            if feasible(bundle.at(mid)):
                lo_t = mid
            else:
                hi_t = mid
        if lo_t > ts[-2]:
            v, _, _ = probe(lo_t)
            ts.insert(-1, lo_t)
            vals.insert(-1, v)
        t_max = lo_t
    else:
        t_max = ts[-1]

    finite = [(v, tt) for tt, v in zip(ts, vals) if not math.isinf(v)]
    best_v, best_t = min(finite)
    k = ts.index(best_t)
    lo = ts[k - 1] if k >= 1 else 0.0
    hi = min(ts[k + 1], t_max) if k + 1 < len(ts) and not math.isinf(vals[k + 1]) else t_max
    hi = max(hi, best_t)

    # golden-section refinement on [lo, hi]; tolerance tracks the current
    # bracket so a wide initial bracket still resolves a small-t basin
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, _, _ = probe(c)
    fd, _, _ = probe(d)
    floor = 1e-9 * hi
    for _ in range(120):
        if (b - a) <= config.section_tol * max(abs(b), floor):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc, _, _ = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd, _, _ = probe(d)

    best_t, best_v = 0.0, f0
    for tt, (v, _, core) in cache.items():
        if core is not None and v < best_v:
            best_t, best_v = tt, v
    if best_t == 0.0:
        return 0.0, frames, f0, core0, degenerate_seen
    v, fr, core = cache[best_t]
    return best_t, fr, v, core, degenerate_seen


def line_search(
    frames: TripleFrame,
    directions,
    obs: ObservationSet,
    config: DescentConfig,
    anchor: TripleFrame,
    rho: float | None = None,
) -> float:
    """Step size along the geodesics that does not increase the penalized
    objective and keeps the moved frames within the trust ball around
    ``anchor``; 0 when no admissible decrease exists."""
    frames = _contig(TripleFrame(*frames))
    mu0 = config.mu0
    if isinstance(mu0, str):
        raise ValueError("line_search needs a numeric mu0 in config")
    rho_val = resolve_rho(config, obs) if rho is None else float(rho)
    f0, core0, _ = _penalized_value(frames, obs, mu0, rho_val)
    t, _, _, _, _ = _search_step(
        frames, directions, obs, config, anchor, mu0, rho_val, f0, core0
    )
    return t


def grassmann_descent(
    obs: ObservationSet,
    ranks: tuple[int, int, int],
    config: DescentConfig,
    init: TripleFrame,
) -> SolveReport:
    """Gradient descent on the product of Grassmannians.

    Starting from ``init`` (ideally trimmed to coherence <= 3 mu0), repeats:
    penalized-objective gradient, negative-gradient geodesics, constrained
    exact line search.  Stops when the relative objective decrease or the
    gradient norm scaled by ``n / (d1 d2 d3)`` falls below ``eps_tol``, or
    at the iteration cap.  Non-convergence is reported, never raised.
    """
    t_start = time.perf_counter()
    mu0 = config.mu0
    if isinstance(mu0, str):
        raise ValueError("grassmann_descent needs a numeric mu0 in config")
    frames = _contig(TripleFrame(*init))
    for f, r, d, nm in zip(frames, ranks, obs.dims, "xyz"):
        if f.shape != (d, r):
            raise ValueError(f"init frame {nm} has shape {f.shape}, want {(d, r)}")
        check_frame(f, f"init frame {nm}")
    lam2 = _lam2_hat(obs)
    rho = resolve_rho(config, obs, lam2)
    anchor = frames
    warnings: list[str] = []

    value, core, degen = _penalized_value(frames, obs, mu0, rho)
    if degen:
        warnings.append("degenerate normal matrix at initialization; used minimum-norm core")

    # gradient floor scales like (n / d1 d2 d3) * (largest singular value)^2,
    # so the tolerance carries the data-driven lam2 factor
    grad_threshold = config.eps_tol * obs.n / float(np.prod(obs.dims)) * lam2
    trace = {k: [] for k in ("objective", "gradient_norm", "step", "dist_from_init", "ortho_defect")}
    converged = False
    stop_reason = "max_iterations"
    gnorm = math.nan
    moves = 0
    warm_t = 0.0

    for _ in range(config.max_iterations):
        grads = riemannian_gradient(frames, core, obs, mu0, rho)
        gnorm = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
        trace["objective"].append(value)
        trace["gradient_norm"].append(gnorm)
        trace["dist_from_init"].append(triple_distance(frames, anchor))
        trace["ortho_defect"].append(max(orthonormality_defect(f) for f in frames))

        if gnorm < grad_threshold:
            trace["step"].append(0.0)
            converged = True
            stop_reason = "gradient_norm"
            break

        directions = tuple(-g for g in grads)
        t, new_frames, new_value, new_core, degen = _search_step(
            frames, directions, obs, config, anchor, mu0, rho, value, core, warm_t
        )
        if degen and not warnings:
            warnings.append("degenerate normal matrix encountered; used minimum-norm core")
        trace["step"].append(t)

        rel_decrease = (value - new_value) / max(value, _TINY)
        if t > 0.0:
            frames, value, core = new_frames, new_value, new_core
            moves += 1
            warm_t = t
        if rel_decrease < config.eps_tol:
            converged = True
            stop_reason = "objective_decrease"
            break

    state = SolveState(
        frames=frames,
        core=core,
        objective=value,
        gradient_norm=gnorm,
        iteration=moves,
    )
    return SolveReport(
        state=state,
        converged=converged,
        stop_reason=stop_reason,
        trace={k: np.asarray(v) for k, v in trace.items()},
        wall_time_s=time.perf_counter() - t_start,
        warnings=warnings,
    )


def with_mu0(config: DescentConfig, mu0: float) -> DescentConfig:
    """Copy of ``config`` with a concrete incoherence level."""
    return replace(config, mu0=float(mu0))
