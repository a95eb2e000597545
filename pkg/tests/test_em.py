import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_signed_graph
from oracles import (dense_log_likelihood, dense_tables, expected_ll_dense, maximize_expected_ll,
                     scalar_responsibility)
from ssbm import (DegenerateParametersError, FitConfig, FitResult, SignedGraph, SsbmParams, e_step,
                  em_update, expected_log_likelihood, fit, hard_partition, init_params,
                  log_likelihood, m_step, nmi, run_em, soft_membership)


def uniform_params(c, n):
    return SsbmParams(np.full((c, c), 1 / c**2), np.full((c, c), 1 / c**2),
                      np.full((c, n), 1 / n), np.full((c, n), 1 / n))


class TestLogLikelihood:
    def test_self_loop_single_group(self):
        g = SignedGraph.from_edges(1, [(0, 0, 1.0)], directed=True)
        p = SsbmParams(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)))
        assert log_likelihood(g, p) == 0.0

    def test_product_rule(self):
        # each edge can only come from one diagonal block of mass 0.5
        g = SignedGraph.from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)], directed=True)
        p = SsbmParams(np.array([[0.5, 0.0], [0.0, 0.5]]), np.full((2, 2), 0.25),
                       np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert log_likelihood(g, p) == pytest.approx(2 * np.log(0.5), abs=1e-15)

    @pytest.mark.parametrize("directed", [True, False])
    def test_dense_oracle(self, rng, directed):
        for trial in range(5):
            g = random_signed_graph(rng, 6, directed=directed, self_loops=True)
            p = init_params(g, 3, seed=trial)
            assert log_likelihood(g, p) == pytest.approx(dense_log_likelihood(g, p), rel=1e-12)

    def test_zero_probability_edge(self):
        g = SignedGraph.from_edges(2, [(0, 1, 1.0)], directed=True)
        p = SsbmParams(np.ones((1, 1)), np.ones((1, 1)), np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]]))
        with pytest.raises(DegenerateParametersError, match="zero probability"):
            log_likelihood(g, p)

    def test_empty_sign_contributes_nothing(self):
        g = SignedGraph.from_edges(3, [(0, 1, 2.0), (1, 2, 1.0)], directed=True)
        p = init_params(g, 2, seed=1)
        assert log_likelihood(g, p) == pytest.approx(dense_log_likelihood(g, p), rel=1e-13)


class TestEStep:
    def test_single_group(self, rng):
        g = random_signed_graph(rng, 5)
        q = e_step(g, init_params(g, 1, seed=0))
        np.testing.assert_array_equal(q.q_pos, 1.0)
        np.testing.assert_array_equal(q.q_neg, 1.0)

    def test_uniform_params(self, rng):
        g = random_signed_graph(rng, 5)
        q = e_step(g, uniform_params(3, 5))
        np.testing.assert_allclose(q.q_pos, 1 / 9, rtol=1e-14)
        np.testing.assert_allclose(q.q_neg, 1 / 9, rtol=1e-14)

    def test_scalar_oracle(self):
        g = SignedGraph.from_edges(3, [(0, 1, 1.0), (2, 0, -2.0)], directed=True)
        p = SsbmParams(np.array([[0.1, 0.2], [0.3, 0.4]]), np.array([[0.4, 0.3], [0.2, 0.1]]),
                       np.array([[0.5, 0.3, 0.2], [0.1, 0.1, 0.8]]),
                       np.array([[0.2, 0.2, 0.6], [0.7, 0.2, 0.1]]))
        q = e_step(g, p)
        np.testing.assert_allclose(q.q_pos[0], scalar_responsibility(p.omega_pos, p.theta, p.phi, 0, 1),
                                   rtol=1e-14)
        np.testing.assert_allclose(q.q_neg[0], scalar_responsibility(p.omega_neg, p.theta, p.phi, 2, 0),
                                   rtol=1e-14)

    def test_tables_sum_to_one(self, rng):
        for directed in (True, False):
            g = random_signed_graph(rng, 12, directed=directed, self_loops=True)
            q = e_step(g, init_params(g, 4, seed=3))
            for qq in (q.q_pos, q.q_neg):
                assert np.all(qq >= 0)
                np.testing.assert_allclose(qq.sum(axis=(1, 2)), 1.0, atol=1e-12)


class TestMStep:
    def test_uniform_q_symmetric_graph(self):
        # directed 4-cycle of positive and negative edges: every vertex has equal in/out weight
        edges = [(i, (i + 1) % 4, 1.0) for i in range(4)] + [(i, (i + 2) % 4, -1.0) for i in range(4)]
        g = SignedGraph.from_edges(4, edges, directed=True)
        p = m_step(g, e_step(g, uniform_params(2, 4)))
        np.testing.assert_allclose(p.omega_pos, 0.25, rtol=1e-14)
        np.testing.assert_allclose(p.omega_neg, 0.25, rtol=1e-14)
        np.testing.assert_allclose(p.theta, 0.25, rtol=1e-14)

    def test_empty_sign_gets_uniform_block(self):
        g = SignedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], directed=False)
        p = m_step(g, e_step(g, init_params(g, 2, seed=0)))
        np.testing.assert_array_equal(p.omega_neg, 0.25)
        p.check()

    def test_normalization_and_degree_zero(self):
        g = SignedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, -1.0)], directed=True)
        p = m_step(g, e_step(g, init_params(g, 2, seed=0)))
        p.check()
        np.testing.assert_array_equal(p.theta[:, 3], 0.0)
        np.testing.assert_array_equal(p.phi[:, 0], 0.0)

    @pytest.mark.parametrize("directed", [True, False])
    def test_fused_update_matches(self, rng, directed):
        g = random_signed_graph(rng, 15, directed=directed, self_loops=True)
        p = init_params(g, 3, seed=7)
        ref = m_step(g, e_step(g, p))
        new, ll = em_update(g, p)
        assert ll == pytest.approx(log_likelihood(g, p), rel=1e-13)
        for name in ("omega_pos", "omega_neg", "theta", "phi"):
            np.testing.assert_allclose(getattr(new, name), getattr(ref, name), rtol=1e-11, atol=1e-15)

    @pytest.mark.parametrize("seed", range(4))
    def test_numeric_maximization_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        directed = seed % 2 == 0
        g = random_signed_graph(rng, 4, density=0.6, directed=directed, self_loops=not directed)
        p = init_params(g, 2, seed=seed)
        q = e_step(g, p)
        new = m_step(g, q)
        tables = dense_tables(g, p)
        ours = expected_ll_dense(tables, new.omega_pos, new.omega_neg, new.theta, new.phi)
        assert ours == pytest.approx(expected_log_likelihood(g, q, new), rel=1e-12)
        best = maximize_expected_ll(tables, g.n, 2, tied=not directed, seed=seed)
        assert ours >= best - 1e-4
        assert abs(ours - best) < 1e-4


class TestInit:
    def test_deterministic(self, rng):
        g = random_signed_graph(rng, 10)
        for method in ("random", "spectral"):
            a = init_params(g, 3, seed=5, method=method)
            b = init_params(g, 3, seed=5, method=method)
            for name in ("omega_pos", "omega_neg", "theta", "phi"):
                np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_single_group(self, rng):
        g = random_signed_graph(rng, 7)
        p = init_params(g, 1, seed=0)
        np.testing.assert_array_equal(p.omega_pos, [[1.0]])
        np.testing.assert_array_equal(p.omega_neg, [[1.0]])
        np.testing.assert_allclose(p.theta, 1 / 7)
        np.testing.assert_allclose(p.phi, 1 / 7)

    def test_invariants_over_seeds(self, rng):
        g_dir = random_signed_graph(rng, 9, directed=True)
        g_und = random_signed_graph(rng, 9, directed=False)
        for seed in range(100):
            for g in (g_dir, g_und):
                for method in ("random", "spectral"):
                    p = init_params(g, 1 + seed % 4, seed=seed, method=method)
                    p.check()
                    assert np.all(p.theta > 0) and np.all(p.omega_pos > 0)
                    if not g.directed:
                        np.testing.assert_array_equal(p.theta, p.phi)

    def test_rejects_bad_c(self, rng):
        with pytest.raises(ValueError):
            init_params(random_signed_graph(rng, 4), 0)


class TestRunEm:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 4), st.booleans())
    def test_monotone(self, seed, c, directed):
        rng = np.random.default_rng(seed)
        g = random_signed_graph(rng, int(rng.integers(c + 2, 25)), directed=directed)
        p0 = init_params(g, c, seed=seed, method="random")
        params, ll, iters, _, hist = run_em(g, p0, max_iters=60, rel_tol=1e-12)
        assert np.all(np.diff(hist) >= -1e-9)
        params.check()
        assert ll == pytest.approx(log_likelihood(g, params), rel=1e-12)

    def test_undirected_theta_equals_phi(self, rng):
        g = random_signed_graph(rng, 14, directed=False)
        p = init_params(g, 3, seed=2)
        for _ in range(20):
            p, _ = em_update(g, p)
            np.testing.assert_array_equal(p.theta, p.phi)


class TestFit:
    def test_single_group_closed_form(self, rng):
        for directed in (True, False):
            g = random_signed_graph(rng, 10, directed=directed, self_loops=True)
            res = fit(g, 1, FitConfig(restarts=2))
            assert res.converged and res.iterations <= 2
            ap, an = g.dense()
            a = ap + an
            theta = a.sum(1) / a.sum()
            phi = a.sum(0) / a.sum()
            closed = sum(x[i, j] * np.log(theta[i] * phi[j])
                         for x in (ap, an) for i in range(10) for j in range(10) if x[i, j])
            assert res.log_likelihood == pytest.approx(closed, rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_two_cliques(self, seed):
        edges = [(i, j, 1.0) for b in (0, 8) for i, j in itertools.combinations(range(b, b + 8), 2)]
        g = SignedGraph.from_edges(16, edges, directed=False)
        res = fit(g, 2, FitConfig(restarts=3, seed=seed))
        labels = hard_partition(soft_membership(res.params)).labels
        assert nmi(labels, np.repeat([0, 1], 8)) == 1.0

    def test_two_cliques_random_init(self):
        edges = [(i, j, 1.0) for b in (0, 8) for i, j in itertools.combinations(range(b, b + 8), 2)]
        g = SignedGraph.from_edges(16, edges, directed=False)
        res = fit(g, 2, FitConfig(restarts=10, seed=0, init="random"))
        labels = hard_partition(soft_membership(res.params)).labels
        assert nmi(labels, np.repeat([0, 1], 8)) == 1.0

    def test_permutation_equivariance(self, rng):
        for directed in (True, False):
            g = random_signed_graph(rng, 12, directed=directed)
            p = init_params(g, 4, seed=0)
            base = log_likelihood(g, p)
            for perm in itertools.permutations(range(4)):
                assert log_likelihood(g, p.permuted(perm)) == pytest.approx(base, rel=1e-13)

    def test_deterministic_and_threads(self, rng):
        g = random_signed_graph(rng, 20)
        a = fit(g, 3, FitConfig(restarts=4, seed=9))
        b = fit(g, 3, FitConfig(restarts=4, seed=9, threads=3))
        assert a.log_likelihood == b.log_likelihood and a.restart_index == b.restart_index
        np.testing.assert_array_equal(a.params.theta, b.params.theta)

    def test_best_restart_wins(self, rng):
        g = random_signed_graph(rng, 20)
        best = fit(g, 3, FitConfig(restarts=5, seed=1, init="random"))
        for k in range(1, 5):
            assert fit(g, 3, FitConfig(restarts=k, seed=1, init="random")).log_likelihood <= best.log_likelihood

    def test_errors(self, rng):
        with pytest.raises(ValueError, match="without edges"):
            fit(SignedGraph.from_edges(3, [], directed=True), 2)
        with pytest.raises(ValueError):
            fit(random_signed_graph(rng, 4), 0)
        with pytest.raises(ValueError):
            FitConfig(restarts=0)
        with pytest.raises(ValueError):
            FitConfig(rel_tol=0)

    def test_iterations_bounded(self, rng):
        g = random_signed_graph(rng, 20)
        res = fit(g, 3, FitConfig(restarts=1, max_iters=3, init="random"))
        assert res.iterations <= 3 and np.isfinite(res.log_likelihood)

    def test_json_round_trip(self, rng):
        g = random_signed_graph(rng, 8)
        res = fit(g, 2, FitConfig(restarts=2, seed=4))
        d = json.loads(res.to_json())
        assert {"c", "omega_pos", "omega_neg", "theta", "phi", "log_likelihood", "iterations",
                "converged", "seed"} <= d.keys()
        back = FitResult.from_dict(d)
        assert back.log_likelihood == res.log_likelihood
        np.testing.assert_array_equal(back.params.phi, res.params.phi)
