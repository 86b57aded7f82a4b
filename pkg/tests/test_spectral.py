import numpy as np
import pytest

from tuckercomplete import (
    ObservationSet,
    initialize,
    proj_distance,
    sample_uniform,
    second_moment_estimate,
    top_eigenspace,
)
from tuckercomplete.experiments import generate_odeco, sample_count
from tuckercomplete.grassmann import coherence
from tuckercomplete.spectral import SecondMomentEstimate
from tuckercomplete.tensor_ops import unfold


def literal_pair_sum(obs, mode):
    """O(n^2) reference: the pairwise symmetric sum over dense one-hot
    unfoldings, straight from the definition."""
    d1, d2, d3 = obs.dims
    dk = {1: d1, 2: d2, 3: d3}[mode]
    other = d1 * d2 * d3 // dk
    scale = d1 * d2 * d3
    xs = []
    for (i1, i2, i3), v in zip(obs.idx, obs.values):
        m = np.zeros((dk, other))
        if mode == 1:
            m[i1, i2 * d3 + i3] = scale * v
        elif mode == 2:
            m[i2, i1 * d3 + i3] = scale * v
        else:
            m[i3, i1 * d2 + i2] = scale * v
        xs.append(m)
    n = len(xs)
    out = np.zeros((dk, dk))
    for i in range(n):
        for j in range(i + 1, n):
            out += xs[i] @ xs[j].T + xs[j] @ xs[i].T
    return out / (n * (n - 1))


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_matches_literal_pair_sum(mode):
    rng = np.random.default_rng(0)
    t = rng.standard_normal((3, 4, 2))
    obs = sample_uniform(t, 40, 11)
    got = second_moment_estimate(obs, mode).matrix
    want = literal_pair_sum(obs, mode)
    scale = max(np.max(np.abs(want)), 1.0)
    assert np.max(np.abs(got - want)) <= 1e-10 * scale


def test_single_repeated_entry():
    # matrix with one nonzero entry, embedded as a (2,2,1) tensor, observed
    # twice at that entry: the estimate is 16 * E11
    idx = np.array([[0, 0, 0], [0, 0, 0]])
    vals = np.array([1.0, 1.0])
    obs = ObservationSet(dims=(2, 2, 1), idx=idx, values=vals)
    est = second_moment_estimate(obs, 1)
    want = np.zeros((2, 2))
    want[0, 0] = 16.0
    np.testing.assert_allclose(est.matrix, want, atol=1e-14)


def test_two_draws_disjoint_rows():
    # one cross product only: exactly two symmetric nonzero entries
    idx = np.array([[0, 0, 0], [1, 0, 0]])
    vals = np.array([2.0, 3.0])
    obs = ObservationSet(dims=(2, 2, 1), idx=idx, values=vals)
    est = second_moment_estimate(obs, 1).matrix
    scale = 4.0  # d1*d2*d3
    want = np.zeros((2, 2))
    want[0, 1] = want[1, 0] = (scale * 2.0) * (scale * 3.0) / 2.0
    np.testing.assert_allclose(est, want, atol=1e-12)


def test_exhaustive_unbiasedness_enumeration():
    # averaging X X'^T over all ordered pairs of independent uniform draws
    # on a 3x4 matrix reproduces M M^T exactly
    rng = np.random.default_rng(1)
    m = rng.standard_normal((3, 4))
    m1, m2 = 3, 4
    scale = m1 * m2
    acc = np.zeros((3, 3))
    for a in range(m1):
        for b in range(m2):
            for a2 in range(m1):
                for b2 in range(m2):
                    x = np.zeros((3, 4))
                    x[a, b] = scale * m[a, b]
                    x2 = np.zeros((3, 4))
                    x2[a2, b2] = scale * m[a2, b2]
                    acc += x @ x2.T
    acc /= float(scale * scale)
    want = m @ m.T
    assert np.max(np.abs(acc - want)) <= 1e-10 * np.max(np.abs(want))


def test_estimate_requires_two_samples():
    obs = ObservationSet(dims=(2, 2, 2), idx=np.array([[0, 0, 0]]), values=np.array([1.0]))
    with pytest.raises(ValueError):
        second_moment_estimate(obs, 1)


def test_symmetry_and_eigen_residual():
    rng = np.random.default_rng(2)
    t = rng.standard_normal((5, 4, 3))
    obs = sample_uniform(t, 300, 3)
    for mode, r in ((1, 2), (2, 2), (3, 1)):
        est = second_moment_estimate(obs, mode)
        m = est.matrix
        assert np.max(np.abs(m - m.T)) <= 1e-12 * max(np.max(np.abs(m)), 1.0)
        frame = top_eigenspace(est, r)
        lam = frame.T @ m @ frame
        resid = np.linalg.norm(m @ frame - frame @ lam)
        assert resid <= 1e-8 * np.linalg.norm(m)


def test_top_eigenspace_examples():
    est = SecondMomentEstimate(mode=1, matrix=np.diag([3.0, 2.0, 1.0]), n=10)
    frame = top_eigenspace(est, 2)
    want = np.eye(3)[:, :2]
    assert proj_distance(frame, want) <= 1e-12

    est_i = SecondMomentEstimate(mode=1, matrix=np.eye(3), n=10)
    v = top_eigenspace(est_i, 1)
    # degenerate spectrum: only the eigen-residual is contractual
    assert np.linalg.norm(est_i.matrix @ v - v) <= 1e-12

    with pytest.raises(ValueError):
        top_eigenspace(est, 4)


def test_top_eigenspace_construction_oracle():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((8, 2))
    est = SecondMomentEstimate(mode=1, matrix=b @ b.T, n=10)
    frame = top_eigenspace(est, 2)
    want = np.linalg.qr(b)[0]
    assert proj_distance(frame, want) <= 1e-10


def test_eigenspace_scale_invariant():
    rng = np.random.default_rng(4)
    s = rng.standard_normal((6, 6))
    m = s @ s.T
    a = top_eigenspace(SecondMomentEstimate(1, m, 5), 2)
    b = top_eigenspace(SecondMomentEstimate(1, 37.0 * m, 5), 2)
    assert proj_distance(a, b) <= 1e-12


def test_initialize_trimmed_and_close_on_dense_sampling():
    # heavily sampled small instance: initialization lands near the truth
    d, r = 4, 1
    dps = []
    for seed in range(10):
        gt = generate_odeco(d, r, seed)
        mu0 = max(1.0, max(coherence(f) for f in gt.factors))
        obs = sample_uniform(gt.tensor, 50 * d**3, [seed, 1])
        frames = initialize(obs, (r, r, r), mu0)
        for f in frames:
            assert coherence(f) <= 3.0 * mu0 + 1e-9
        dps.append(max(proj_distance(f, u) for f, u in zip(frames, gt.factors)))
    assert np.median(dps) <= 0.2


def test_initialize_error_shrinks_with_n():
    # median triple distance of the trimmed initialization to the truth
    # drops when the sample budget quadruples (d=30, r=2, 10 seeds)
    from tuckercomplete.grassmann import TripleFrame, triple_distance

    d, r = 30, 2
    med = []
    for mult in (2.0, 8.0):
        errs = []
        for seed in range(10):
            gt = generate_odeco(d, r, seed)
            mu0 = max(1.0, max(coherence(f) for f in gt.factors))
            obs = sample_uniform(gt.tensor, sample_count(mult, r, d), [seed, 1])
            frames = initialize(obs, (r, r, r), mu0)
            errs.append(triple_distance(TripleFrame(*frames), gt.factors))
        med.append(float(np.median(errs)))
    assert med[1] < med[0]
