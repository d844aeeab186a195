import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsbm.evaluate import misclassification
from hsbm.model import ModelParams
from hsbm.sampler import Hypergraph, sample_hsbm, sample_labels
from hsbm.spectral import (
    SpectralError,
    TrimmedSpectral,
    build_laplacian,
    dump_debug,
    expected_laplacian,
    rank_k_approx,
    spectral_cluster,
    trim,
    with_rank_k,
)


def incidence_laplacian(g):
    """H H^T - D from the explicit node-by-edge incidence matrix."""
    H = np.zeros((g.n, g.num_edges), dtype=np.int64)
    for col, e in enumerate(g.edges):
        H[e, col] = 1
    return H @ H.T - np.diag(H.sum(axis=1)), H.sum(axis=1)


@st.composite
def hypergraphs(draw, max_n=15, max_d=4):
    d = draw(st.integers(2, max_d))
    n = draw(st.integers(d, max_n))
    all_edges = list(combinations(range(n), d))
    chosen = draw(st.lists(st.sampled_from(all_edges), max_size=40, unique=True))
    return Hypergraph.from_edges(n, d, np.array(chosen, dtype=np.int64).reshape(-1, d))


class TestLaplacian:
    def test_empty(self):
        lap = build_laplacian(Hypergraph.from_edges(5, 3, np.zeros((0, 3))))
        assert not lap.matrix.any() and not lap.degrees.any()

    def test_small_example(self):
        g = Hypergraph.from_edges(4, 3, [[0, 1, 2], [0, 1, 3]])
        lap = build_laplacian(g)
        expected = np.array([[0, 2, 1, 1], [2, 0, 1, 1], [1, 1, 0, 0], [1, 1, 0, 0]])
        assert np.array_equal(lap.matrix, expected)
        assert lap.degrees.tolist() == [2, 2, 1, 1]

    @settings(max_examples=100, deadline=None)
    @given(hypergraphs())
    def test_matches_incidence_oracle(self, g):
        L, deg = incidence_laplacian(g)
        lap = build_laplacian(g)
        assert np.array_equal(lap.matrix, L)
        assert np.array_equal(lap.degrees, deg)
        assert np.array_equal(lap.matrix, lap.matrix.T)
        assert not np.diag(lap.matrix).any()


class TestTrim:
    def setup_method(self):
        self.lap = build_laplacian(Hypergraph.from_edges(4, 3, [[0, 1, 2], [0, 1, 3]]))

    def test_no_trim(self):
        spec = trim(self.lap, 2)
        assert spec.gamma_set.tolist() == [0, 1, 2, 3]
        assert np.array_equal(spec.l_trimmed, self.lap.matrix)

    def test_trim_high_degree(self):
        spec = trim(self.lap, 1)
        assert spec.gamma_set.tolist() == [2, 3]
        assert not spec.l_trimmed[[0, 1]].any() and not spec.l_trimmed[:, [0, 1]].any()
        assert spec.l_trimmed[2, 3] == self.lap.matrix[2, 3]

    def test_everything_trimmed(self):
        with pytest.raises(SpectralError):
            trim(self.lap, 0.5)

    def test_threshold_positive(self):
        with pytest.raises(ValueError):
            trim(self.lap, 0)


class TestRankK:
    def test_low_rank_reproduced(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(20, 3)) @ rng.normal(size=(3, 20))
        assert np.linalg.norm(rank_k_approx(A, 3) - A) <= 1e-8
        assert np.linalg.norm(rank_k_approx(A, 5) - A) <= 1e-8

    def test_diagonal(self):
        out = rank_k_approx(np.diag([3.0, 2.0, 1.0]), 2)
        assert np.allclose(out, np.diag([3.0, 2.0, 0.0]), atol=1e-12)

    def test_beats_random_competitors(self):
        rng = np.random.default_rng(1)
        A = rng.integers(0, 10, size=(30, 30))
        A = A + A.T
        best = np.linalg.norm(A - rank_k_approx(A, 5))
        for _ in range(100):
            X = rng.normal(size=(30, 5)) @ rng.normal(size=(5, 30))
            assert best <= np.linalg.norm(A - X)
        # competitors near the optimum
        for _ in range(100):
            X = rank_k_approx(A + rng.normal(scale=0.5, size=A.shape), 5)
            assert best <= np.linalg.norm(A - X) + 1e-9

    def test_symmetric_output(self):
        rng = np.random.default_rng(2)
        A = rng.integers(0, 5, size=(25, 25))
        A = A + A.T
        out = rank_k_approx(A, 4)
        assert np.abs(out - out.T).max() <= 1e-8

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            rank_k_approx(np.eye(3), 4)


class TestExpectedLaplacian:
    def test_zero_rates(self):
        P = ModelParams.symmetric(20, 2, 3, 0.0, 0.0)
        assert not expected_laplacian(P, sample_labels(P, 0), 1.5).any()

    def test_same_community_columns(self):
        P = ModelParams.symmetric(40, 3, 3, 30.0, 5.0)
        z = sample_labels(P, 4)
        M = expected_laplacian(P, z, 1.7)
        u, v = np.flatnonzero(z == z[0])[:2]
        mask = np.ones(P.n, dtype=bool)
        mask[[u, v]] = False
        assert np.array_equal(M[mask, u], M[mask, v])
        assert M[u, v] == M[v, u]

    def test_monte_carlo(self):
        n, d, draws = 10, 3, 5000
        gamma = 1.3
        P = ModelParams.symmetric(n, 2, d, 20.0, 4.0)
        z = np.array([0] * 5 + [1] * 5)
        thinned = P.scaled(gamma / math.log(n))  # rates Q gamma / n^(d-1)
        Ls = np.array([build_laplacian(sample_hsbm(thinned, z, s, "exact")).matrix for s in range(draws)])
        mean = Ls.mean(axis=0)
        sd = Ls.std(axis=0, ddof=1) / math.sqrt(draws)
        M = expected_laplacian(P, z, gamma)
        off = ~np.eye(n, dtype=bool)
        assert np.all(np.abs(mean - M)[off] <= 4 * np.maximum(sd[off], 1e-3))


def test_degenerate_instance_same_cluster_columns():
    """For the second-order-degenerate example only the same-cluster half of
    the column separation property is asserted."""
    n = 200
    Q = {(3, 0): 30.0, (1, 2): 30.0, (2, 1): 6.0, (0, 3): 6.0}
    P = ModelParams(n=n, k=2, d=3, p=(0.5, 0.5), Q=Q)
    z = np.array([0] * 100 + [1] * 100)
    M = expected_laplacian(P, z, math.sqrt(math.log(n)))
    for c in range(2):
        u, v = np.flatnonzero(z == c)[:2]
        keep = np.ones(n, dtype=bool)
        keep[[u, v]] = False
        assert np.sum((M[keep, u] - M[keep, v]) ** 2) == 0.0


class TestCluster:
    def test_single_community(self):
        spec = with_rank_k(trim(build_laplacian(Hypergraph.from_edges(6, 2, [[0, 1], [2, 3]])), 5), 1)
        assert not spectral_cluster(spec, 1, 0.5, 0).any()

    @pytest.mark.parametrize("seed", range(5))
    def test_separated_clouds(self, seed):
        rng = np.random.default_rng(seed)
        n = 600
        truth = rng.integers(0, 2, size=n)
        centers = rng.normal(size=(n, 2)) * 3.0  # pairwise gap ~ 3 sqrt(2n)
        X = centers[:, truth] + rng.normal(scale=0.01, size=(n, n))
        spread = max(np.sum((X[:, truth == c] - centers[:, [c]]) ** 2, axis=0).max() for c in range(2))
        gap = np.sum((centers[:, 0] - centers[:, 1]) ** 2)
        r = 4 * spread
        assert r < gap / 4
        spec = TrimmedSpectral(gamma_set=np.arange(n), l_trimmed=X, tau=1.0, l_rank_k=X)
        out = spectral_cluster(spec, 2, r, seed)
        assert misclassification(out, truth).misclassification == 0.0

    def test_trimmed_nodes_random_but_seeded(self):
        P = ModelParams.symmetric(120, 2, 2, 20.0, 2.0)
        z = sample_labels(P, 3)
        g = sample_hsbm(P, z, 3)
        lap = build_laplacian(g)
        tau = float(np.median(lap.degrees))
        spec = with_rank_k(trim(lap, tau), 2)
        a = spectral_cluster(spec, 2, 1.0, 9)
        assert np.array_equal(a, spectral_cluster(spec, 2, 1.0, 9))
        assert set(np.unique(a)) <= {0, 1}

    def test_requires_rank_k(self):
        spec = trim(build_laplacian(Hypergraph.from_edges(4, 2, [[0, 1]])), 3)
        with pytest.raises(ValueError):
            spectral_cluster(spec, 2, 1.0, 0)


def test_permutation_equivariance():
    P = ModelParams.symmetric(80, 2, 3, 60.0, 10.0)
    z = sample_labels(P, 6)
    g = sample_hsbm(P, z, 6)
    perm = np.random.default_rng(6).permutation(P.n)
    gp = Hypergraph.from_edges(g.n, g.d, perm[g.edges])
    lap, lap_p = build_laplacian(g), build_laplacian(gp)
    inv = np.argsort(perm)
    assert np.array_equal(lap_p.matrix, lap.matrix[np.ix_(inv, inv)])
    tau = float(np.percentile(lap.degrees, 80))
    s, sp = trim(lap, tau), trim(lap_p, tau)
    assert np.array_equal(sp.l_trimmed, s.l_trimmed[np.ix_(inv, inv)])
    a, b = rank_k_approx(s.l_trimmed, 2), rank_k_approx(sp.l_trimmed, 2)
    assert np.abs(b - a[np.ix_(inv, inv)]).max() <= 1e-8


def test_weyl_inequality():
    rng = np.random.default_rng(7)
    for _ in range(50):
        A = rng.normal(size=(12, 12))
        A = A + A.T
        B = A + 0.1 * rng.normal(size=(12, 12))
        B = B + B.T
        sa = np.linalg.svd(A, compute_uv=False)
        sb = np.linalg.svd(B, compute_uv=False)
        assert np.all(np.abs(sa - sb) <= np.linalg.norm(A - B, 2) + 1e-8)


def test_debug_dump(tmp_path):
    lap = build_laplacian(Hypergraph.from_edges(5, 2, [[0, 1], [1, 2], [3, 4]]))
    spec = with_rank_k(trim(lap, 5), 2)
    dump_debug(lap, spec, tmp_path)
    assert np.array_equal(np.loadtxt(tmp_path / "laplacian.csv", delimiter=",", dtype=int), lap.matrix)
    assert np.loadtxt(tmp_path / "singular_values.csv").shape == (5,)
