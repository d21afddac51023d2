import numpy as np
import pytest

from agprop import CompactVector, RngStream, init_dense, init_randomized
from agprop import _kernels as K
from statutil import MeanCheck


class TestCompactVector:
    def test_uniform(self):
        cv = CompactVector.uniform(10)
        assert cv.group_count == 1
        assert np.allclose(cv.to_dense(), 0.1)

    def test_rejects_gaps_and_overlaps(self):
        with pytest.raises(ValueError):
            CompactVector([(0, 3, 0.2), (4, 5, 0.4)], 5)
        with pytest.raises(ValueError):
            CompactVector([(0, 3, 0.2), (2, 5, 0.2)], 5)
        with pytest.raises(ValueError):
            CompactVector([(0, 5, 0.1)], 6)

    def test_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            CompactVector([(0, 4, 0.3)], 4)
        with pytest.raises(ValueError):
            CompactVector([(0, 2, -0.5), (2, 4, 1.0)], 4)

    def test_from_file(self, tmp_path):
        p = tmp_path / "x.txt"
        p.write_text("# groups\n0 2 0.25\n2 10 0.0625\n")
        cv = CompactVector.from_file(p)
        assert cv.n == 10
        assert np.isclose(cv.to_dense().sum(), 1.0)

    def test_one_hot_encoding(self):
        cv = CompactVector([(0, 3, 0.0), (3, 4, 1.0), (4, 8, 0.0)], 8)
        x = cv.to_dense()
        assert x[3] == 1.0 and x.sum() == 1.0


class TestInitDense:
    def test_one_hot(self):
        x = np.zeros(5)
        x[2] = 1.0
        assert init_dense(x, 0.1).values == {2: 1.0}

    def test_uniform(self):
        rm = init_dense(np.full(4, 0.25), 0.1)
        assert rm.values == {0: 0.25, 1: 0.25, 2: 0.25, 3: 0.25}

    def test_zeros_absent(self):
        rm = init_dense(np.array([0.0, 1.0, 0.0]), 0.1)
        assert 0 not in rm.values and 2 not in rm.values

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            init_dense(np.array([0.5, -0.5, 1.0]), 0.1)


class TestInitRandomized:
    def test_exact_branch_when_values_large(self):
        # S = 1/n >= eps -> deterministic dense assignment
        n = 20
        cv = CompactVector.uniform(n)
        rm = init_randomized(cv, 1.0 / n / 2, RngStream(3))
        assert rm.values == {v: pytest.approx(1.0 / n) for v in range(n)}
        assert rm.variates_drawn == 0

    def test_zero_value_group_skipped(self):
        cv = CompactVector([(0, 5, 0.0), (5, 6, 1.0)], 6)
        rm = init_randomized(cv, 0.05, RngStream(3))
        assert set(rm.values) == {5}

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            init_randomized(CompactVector.uniform(4), 0.0, RngStream(1))

    def test_rejects_dense_input(self):
        with pytest.raises(TypeError):
            init_randomized(np.full(4, 0.25), 0.1, RngStream(1))

    def test_sampled_branch_mass_and_size(self):
        # S = 1/n, eps = 10/n: each index kept w.p. 0.1 with mass eps
        n = 200
        eps = 10.0 / n
        cv = CompactVector.uniform(n)
        total = 0
        rng = RngStream(8)
        for _ in range(2000):
            rm = init_randomized(cv, eps, rng)
            assert all(v == eps for v in rm.values.values())
            total += len(rm.values)
        mean_size = total / 2000
        assert abs(mean_size - n / 10) < 3 * np.sqrt(n * 0.1 * 0.9 / 2000)

    def test_entrywise_unbiased(self):
        n = 64
        cv = CompactVector([(0, 4, 0.1), (4, n, 0.01)], n)
        eps = 0.05
        trials = 10 ** 5
        s, s2, work_max, _ = K.init_randomized_freq(
            cv.lo, cv.hi, cv.val, eps, np.iinfo(np.int64).max, n, trials,
            np.uint64(21))
        mean = s / trials
        var = np.maximum(s2 / trials - mean ** 2, 0.0)
        check = MeanCheck()
        check.add(mean, cv.to_dense(), np.sqrt(var / trials))
        verdict = check.judge()
        assert verdict["ok"], verdict
        # second-moment bound: Var[r0(u)] <= eps * x(u)
        assert np.all(var <= eps * cv.to_dense() * 1.05 + 1e-12)

    def test_work_bound(self):
        # variates + assignments <= 2/eps + #groups on every run; holds with
        # slack once a chunk of the mass sits in exact groups
        n = 64
        cv = CompactVector([(0, 4, 0.2475), (4, n, 0.01 / 60)], n)
        eps = 0.05
        _, _, work_max, count_max = K.init_randomized_freq(
            cv.lo, cv.hi, cv.val, eps, np.iinfo(np.int64).max, n, 10 ** 5,
            np.uint64(13))
        assert work_max <= 2 / eps + cv.group_count
        assert count_max <= n

    def test_oversize_group_count_warns_and_falls_back(self):
        n = 12
        groups = [(i, i + 1, 1.0 / n) for i in range(n)]
        cv = CompactVector(groups, n)
        eps = 0.5  # budget ceil(1/eps) = 2 < 12 groups
        with pytest.warns(UserWarning, match="budget"):
            rm = init_randomized(cv, eps, RngStream(5))
        # groups past the budget are assigned exactly despite S < eps
        for i in range(2, n):
            assert rm.values[i] == pytest.approx(1.0 / n)
