import numpy as np
import pytest

from agprop import (CompactVector, DynGraph, QuerySpec,
                    RngStream, StalenessError, WeightOracle, exact_converged,
                    exact_truncated, query_dynamic, query_static_baseline,
                    query_staticpp, run_query_batch)
from agprop.engine import algorithm_epsilon
from agprop.graphs import gnp_graph, star_graph
from statutil import MeanCheck

GEO = WeightOracle.geometric(0.2)

ALL_QUERIES = [query_staticpp, query_dynamic, query_static_baseline]
QUERY_IDS = ["staticpp", "dynamic", "static"]


def dense_matrix_reference(g, a, b, x, weights):
    """Independent oracle: explicit dense transition matrix powers."""
    n = g.n
    A = np.zeros((n, n))
    for u in range(n):
        for v in g.adj[u]:
            A[v, u] = 1.0
    d = np.array([max(g.deg[u], 1) for u in range(n)], dtype=float)
    Da = np.diag(np.where(np.array(g.deg) > 0, d ** -a, 0.0))
    Db = np.diag(np.where(np.array(g.deg) > 0, d ** -b, 0.0))
    M = Da @ A @ Db
    out = np.zeros(n)
    P = np.eye(n)
    for w in weights:
        out += w * (P @ x)
        P = M @ P
    return out


class TestQuerySpecValidation:
    def test_exponent_constraints(self, k3):
        x = np.ones(3) / 3
        with pytest.raises(ValueError):
            QuerySpec(0.4, 0.4, GEO, x, 0.1, 0.5).validate(3)
        with pytest.raises(ValueError):
            QuerySpec(1.5, 0.0, GEO, x, 0.1, 0.5).validate(3)

    def test_input_vector_constraints(self):
        with pytest.raises(ValueError):
            QuerySpec(0, 1, GEO, np.array([0.5, 0.6]), 0.1, 0.5).validate(2)
        with pytest.raises(ValueError):
            QuerySpec(0, 1, GEO, np.array([1.5, -0.5]), 0.1, 0.5).validate(2)
        with pytest.raises(ValueError):
            QuerySpec(0, 1, GEO, np.ones(3) / 3, 0.1, 0.5).validate(2)

    def test_approximation_params(self):
        x = np.ones(2) / 2
        with pytest.raises(ValueError):
            QuerySpec(0, 1, GEO, x, 0.0, 0.5).validate(2)
        with pytest.raises(ValueError):
            QuerySpec(0, 1, GEO, x, 0.1, 0.0).validate(2)


class TestExactTruncated:
    def test_level_zero_is_weighted_input(self, gnp100):
        x = np.zeros(100)
        x[3] = 1.0
        q = QuerySpec(0.0, 1.0, GEO, x, 0.1, 0.5)
        assert np.allclose(exact_truncated(gnp100, q, 0), 0.2 * x)

    def test_k3_pagerank_symmetry(self, k3):
        q = QuerySpec(0.0, 1.0, GEO, np.ones(3) / 3, 0.1, 0.5)
        for L in (0, 1, 5):
            want = sum(GEO.weight(i) for i in range(L + 1)) / 3
            assert np.allclose(exact_truncated(k3, q, L), want)

    def test_path_ppr_hand_values(self):
        # path 0-1-2, x = e_0, L = 2: hand matrix-power computation
        g = DynGraph.build([(0, 1), (1, 2)], 3)
        x = np.array([1.0, 0.0, 0.0])
        q = QuerySpec(0.0, 1.0, GEO, x, 0.01, 0.1)
        out = exact_truncated(g, q, 2)
        assert out[0] == pytest.approx(0.264)  # w0 + w2/2
        assert out[1] == pytest.approx(0.16)   # w1
        assert out[2] == pytest.approx(0.064)  # w2/2
        ref = dense_matrix_reference(g, 0.0, 1.0, x,
                                     [GEO.weight(i) for i in range(3)])
        assert np.allclose(out, ref, atol=1e-14)

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, 0.0), (0.5, 0.5)])
    def test_matches_dense_matrix_oracle(self, a, b):
        g = DynGraph.build(gnp_graph(25, 0.15, 9)[0], 25)
        rng = RngStream(4)
        x = np.array([rng.uniform() for _ in range(25)])
        x /= x.sum()
        q = QuerySpec(a, b, GEO, x, 0.1, 0.5)
        L = 6
        ref = dense_matrix_reference(g, a, b, x,
                                     [GEO.weight(i) for i in range(L + 1)])
        assert np.allclose(exact_truncated(g, q, L), ref, atol=1e-12)

    def test_mass_conservation_random_walk(self, gnp100):
        # a=0, b=1 on a graph without isolated vertices: each level's raw
        # propagation preserves l1 mass
        assert min(gnp100.deg) > 0
        x = np.ones(100) / 100
        prev = 1.0
        for L in range(1, 8):
            q = QuerySpec(0.0, 1.0, WeightOracle.lhop(L), x, 0.1, 0.5)
            level_mass = exact_truncated(gnp100, q, L).sum()
            assert level_mass == pytest.approx(1.0, abs=1e-12)
            prev = level_mass


class TestExactConverged:
    def test_lhop_equals_truncated(self, gnp100):
        x = np.zeros(100)
        x[1] = 1.0
        q = QuerySpec(0.0, 1.0, WeightOracle.lhop(3), x, 0.1, 0.5)
        assert np.allclose(exact_converged(gnp100, q),
                           exact_truncated(gnp100, q, 3), atol=1e-15)

    def test_k3_pagerank_uniform(self, k3):
        q = QuerySpec(0.0, 1.0, GEO, np.ones(3) / 3, 0.1, 0.5)
        assert np.allclose(exact_converged(k3, q), 1.0 / 3.0, atol=1e-9)

    def test_tail_bound_vs_deep_truncation(self, gnp100):
        x = np.zeros(100)
        x[5] = 1.0
        q = QuerySpec(0.0, 1.0, GEO, x, 0.1, 0.5)
        deep = exact_truncated(gnp100, q, GEO.cut_index(1e-10))
        conv = exact_converged(gnp100, q)
        assert np.abs(conv - deep).sum() <= 1e-9 * gnp100.n


class TestQueryEdgeCases:
    @pytest.mark.parametrize("fn", ALL_QUERIES, ids=QUERY_IDS)
    def test_lhop0_identity(self, gnp100, fn):
        x = np.zeros(100)
        x[7] = 1.0
        q = QuerySpec(0.0, 1.0, WeightOracle.lhop(0), x, 0.1, 0.5)
        res = fn(gnp100, q, RngStream(1))
        assert res.pi_hat == {7: 1.0}
        assert res.L_used == q.oracle.cut_index(q.c * q.delta)
        assert res.counters.variates_drawn == 0
        assert res.counters.edges_propagated == 0

    @pytest.mark.parametrize("fn", ALL_QUERIES, ids=QUERY_IDS)
    def test_isolated_source_keeps_level_zero_mass(self, fn):
        # degree-0 source cannot propagate: only the level-0 reserve remains
        g = DynGraph.build([(1, 2)], 4)
        x = np.zeros(4)
        x[0] = 1.0
        q = QuerySpec(0.0, 1.0, GEO, x, 0.1, 0.5)
        res = fn(g, q, RngStream(2))
        assert res.pi_hat == {0: pytest.approx(GEO.weight(0))}
        exact = exact_truncated(g, q, res.L_used)
        assert exact[0] == pytest.approx(GEO.weight(0))
        assert res.counters.variates_drawn == 0

    def test_staticpp_rejects_stale_graph(self, star100):
        star100.insert_edge(1, 2)
        assert star100.stale_count > 0
        q = QuerySpec(0.0, 1.0, GEO, np.ones(100) / 100, 0.1, 0.5)
        with pytest.raises(StalenessError):
            query_staticpp(star100, q, RngStream(1))
        query_dynamic(star100, q, RngStream(1))  # tolerates staleness

    def test_refresh_unblocks_staticpp(self, star100):
        star100.insert_edge(1, 2)
        star100.refresh_reference_degrees()
        q = QuerySpec(0.0, 1.0, GEO, np.ones(100) / 100, 0.1, 0.5)
        query_staticpp(star100, q, RngStream(1))

    @pytest.mark.parametrize("fn", ALL_QUERIES, ids=QUERY_IDS)
    def test_deterministic_given_seed(self, gnp100, fn):
        x = np.zeros(100)
        x[3] = 1.0
        q = QuerySpec(0.5, 0.5, GEO, x, 0.05, 1.0)
        r1 = fn(gnp100, q, RngStream(99))
        r2 = fn(gnp100, q, RngStream(99))
        assert r1.pi_hat == r2.pi_hat
        assert r1.counters == r2.counters
        assert r1.L_used == r2.L_used

    def test_compact_input_runs_randomized_init(self, gnp100):
        q = QuerySpec(0.0, 1.0, GEO, CompactVector.uniform(100), 0.05, 1.0)
        res = query_staticpp(gnp100, q, RngStream(5))
        assert abs(sum(res.pi_hat.values()) - 1.0) < 0.2

    def test_epsilon_ordering(self):
        # baseline epsilon is strictly smaller once L >= 2
        for L in (2, 5, 20):
            assert algorithm_epsilon("static", 0.1, 0.5, L) < \
                algorithm_epsilon("staticpp", 0.1, 0.5, L)


class TestStatistical:
    def test_k3_pagerank_means(self, k3):
        q = QuerySpec(0.0, 1.0, GEO, np.ones(3) / 3, 0.1, 0.5)
        for algo in ("staticpp", "dynamic", "static"):
            stats = run_query_batch(k3, q, algo, 5000, 11)
            truth = exact_truncated(k3, q, stats.L_used)
            se = np.sqrt(stats.variance() / stats.runs)
            diff = np.abs(stats.mean() - truth)
            assert np.all(diff <= 3.2 * se + 1e-12), algo

    @pytest.mark.parametrize("algo", ["staticpp", "dynamic", "static"])
    def test_ppr_path_unbiased(self, path50, algo):
        x = np.zeros(50)
        x[0] = 1.0
        q = QuerySpec(0.0, 1.0, GEO, x, 0.05, 1.0)
        stats = run_query_batch(path50, q, algo, 20000, 1234)
        truth = exact_truncated(path50, q, stats.L_used)
        check = MeanCheck()
        check.add(stats.mean(), truth, np.sqrt(stats.variance() / stats.runs))
        verdict = check.judge()
        assert verdict["ok"], verdict

    def test_dynamic_matches_staticpp_distribution(self, star100):
        # fresh graph, a > 0: same law, different draws; compare per-vertex
        # samples with two-sample KS tests at the hub, a leaf, and the source
        from scipy.stats import ks_2samp
        x = np.zeros(100)
        x[1] = 1.0
        q = QuerySpec(0.5, 0.5, GEO, x, 0.1, 1.0)
        runs = 5000
        watch = (0, 1, 2)
        samples = {a: {v: [] for v in watch} for a in ("staticpp", "dynamic")}
        for algo, fn in (("staticpp", query_staticpp),
                         ("dynamic", query_dynamic)):
            rng = RngStream(7 if algo == "staticpp" else 8)
            for _ in range(runs):
                pi = fn(star100, q, rng).pi_hat
                for v in watch:
                    samples[algo][v].append(pi.get(v, 0.0))
        for v in watch:
            p = ks_2samp(samples["staticpp"][v], samples["dynamic"][v]).pvalue
            assert p > 0.001, (v, p)

    def test_dynamic_unbiased_at_staleness_boundary(self):
        # degrees driven to d = 2*ref and d = ref/2 without rebuilds: the
        # worst staleness the update rule permits
        g = DynGraph.build(star_graph(9)[0], 30)
        v_up = 1
        for w in range(9, 14):
            g.insert_edge(v_up, w)  # ref snaps to 3 at d=3, then d grows to 6
        assert g.deg[v_up] == 2 * g.refdeg[v_up]
        q_x = np.zeros(30)
        q_x[0] = 1.0
        q = QuerySpec(1.0, 0.0, GEO, q_x, 0.05, 1.0)
        stats = run_query_batch(g, q, "dynamic", 20000, 77)
        truth = exact_truncated(g, q, stats.L_used)
        assert stats.max_acceptance <= 1.0 + 1e-12
        check = MeanCheck()
        check.add(stats.mean(), truth, np.sqrt(stats.variance() / stats.runs))
        verdict = check.judge()
        assert verdict["ok"], verdict

    def test_acceptance_ratio_never_exceeds_one(self, gnp100):
        x = np.zeros(100)
        x[int(np.argmax(gnp100.deg))] = 1.0
        q = QuerySpec(1.0, 0.0, GEO, x, 0.05, 1.0)
        for algo in ("staticpp", "dynamic", "static"):
            stats = run_query_batch(gnp100, q, algo, 2000, 3)
            assert stats.max_acceptance <= 1.0 + 1e-12


def test_wall_time_and_result_shape(gnp100):
    q = QuerySpec(0.0, 1.0, GEO, np.ones(100) / 100, 0.1, 0.5)
    res = query_staticpp(gnp100, q, RngStream(1))
    assert res.wall_time >= 0.0
    assert res.L_used == GEO.cut_index(0.05)
    assert all(v >= 0.0 for v in res.pi_hat.values())
