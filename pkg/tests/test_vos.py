import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mean_distance_loop, relerr, sigma_hat_loop, vos_objective_loop
from simmap.diagnostics import procrustes_disparity
from simmap.errors import ConfigError, DataError
from simmap.layout import pairwise_distances
from simmap.vos import (
    VosProblem,
    constrained_reference_solve,
    constraint_mean,
    ideal_location,
    minimize_sigma_hat,
    proposition1_check,
    sigma_hat,
    sigma_hat_gradient,
    vos_multi_start,
    vos_objective,
    vos_run,
)


def random_similarities(n, rng, density=0.6):
    s = rng.uniform(0.1, 2.0, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    s = np.triu(s, 1)
    perm = rng.permutation(n)
    for a, b in zip(perm[:-1], perm[1:]):
        i, j = min(a, b), max(a, b)
        if s[i, j] == 0:
            s[i, j] = rng.uniform(0.1, 2.0)
    return s + s.T


def equal_similarities(n, value=1.0):
    return value * (np.ones((n, n)) - np.eye(n))


def edge_spread(x):
    d = pairwise_distances(x)[np.triu_indices(len(x), 1)]
    return np.ptp(d), d


class TestProblem:
    def test_isolated_item(self):
        s = np.zeros((3, 3))
        s[0, 1] = s[1, 0] = 1.0
        with pytest.raises(DataError, match="zero similarity"):
            VosProblem(s)

    def test_disconnected(self):
        s = np.zeros((4, 4))
        s[0, 1] = s[1, 0] = s[2, 3] = s[3, 2] = 1.0
        with pytest.raises(DataError, match="largest"):
            VosProblem(s)


class TestMeasures:
    def test_objective_coincident(self):
        assert vos_objective(VosProblem(equal_similarities(3)), np.zeros((3, 2))) == 0.0

    def test_objective_two_items(self):
        p = VosProblem(equal_similarities(2, 2.0))
        assert vos_objective(p, np.array([[0.0, 0.0], [1.0, 0.0]])) == 2.0

    def test_constraint_mean_cases(self):
        assert constraint_mean(np.array([[0.0, 0.0], [1.0, 0.0]])) == 1.0
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        assert constraint_mean(tri) == pytest.approx(1.0, rel=1e-15)
        assert constraint_mean(3.0 * tri) == pytest.approx(3.0, rel=1e-15)

    def test_sigma_hat_cases(self):
        assert sigma_hat(VosProblem(equal_similarities(3)), np.zeros((3, 2))) == 0.0
        p = VosProblem(equal_similarities(2))
        assert sigma_hat(p, np.array([[0.0, 0.0], [1.0, 0.0]])) == -1.0

    @pytest.mark.parametrize("seed", range(20))
    def test_match_loops(self, seed):
        rng = np.random.default_rng(seed)
        s = random_similarities(5, rng)
        x = rng.normal(size=(5, 2))
        p = VosProblem(s)
        assert relerr(vos_objective(p, x), vos_objective_loop(s, x)) < 1e-12
        assert relerr(sigma_hat(p, x), sigma_hat_loop(s, x)) < 1e-12
        assert relerr(constraint_mean(x), mean_distance_loop(x)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.01, 100))
    def test_scale_identity(self, seed, lam):
        rng = np.random.default_rng(seed)
        n = 6
        p = VosProblem(random_similarities(n, rng))
        x = rng.normal(size=(n, 2))
        expected = lam**2 * vos_objective(p, x) - 2 * lam * (n * (n - 1) / 2) * constraint_mean(x)
        assert sigma_hat(p, lam * x) == pytest.approx(expected, rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_gradient_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        p = VosProblem(random_similarities(6, rng))
        x = rng.normal(size=(6, 2))
        g = sigma_hat_gradient(p, x)
        h = 1e-6
        num = np.zeros_like(x)
        for i in range(6):
            for k in range(2):
                e = np.zeros_like(x)
                e[i, k] = h
                num[i, k] = (sigma_hat(p, x + e) - sigma_hat(p, x - e)) / (2 * h)
        assert np.linalg.norm(g - num) <= 1e-5 * np.linalg.norm(num)


class TestIdealLocation:
    def test_single_neighbour(self):
        s = np.zeros((3, 3))
        s[0, 1] = s[1, 0] = s[1, 2] = s[2, 1] = 1.0
        x = np.array([[0.0, 0.0], [2.0, 3.0], [5.0, 5.0]])
        assert np.array_equal(ideal_location(VosProblem(s), x, 0), x[1])

    def test_equal_similarities_centroid(self):
        x = np.random.default_rng(0).normal(size=(5, 2))
        got = ideal_location(VosProblem(equal_similarities(5, 0.3)), x, 2)
        assert np.allclose(got, np.delete(x, 2, axis=0).mean(axis=0), rtol=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_minimizes_objective(self, seed):
        rng = np.random.default_rng(seed)
        p = VosProblem(random_similarities(7, rng))
        x = rng.normal(size=(7, 2))
        x[3] = ideal_location(p, x, 3)
        h = 1e-6
        grad = []
        for k in range(2):
            e = np.zeros_like(x)
            e[3, k] = h
            grad.append((vos_objective(p, x + e) - vos_objective(p, x - e)) / (2 * h))
        assert np.linalg.norm(grad) < 1e-6 * max(1.0, np.abs(x).max())


class TestVosRun:
    @pytest.mark.parametrize("s", [0.1, 1.0, 7.0])
    def test_two_items_distance_one(self, s):
        layout = vos_run(VosProblem(equal_similarities(2, s)), seed=3)
        assert np.linalg.norm(layout.coords[0] - layout.coords[1]) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("value", [0.5, 2.0])
    def test_equilateral(self, value):
        # the stopping rule is on the objective, so distances converge like
        # sqrt(eps); a tight eps is needed for 1e-6 edge equality
        layout = vos_run(VosProblem(equal_similarities(3, value)), seed=1, eps=1e-14)
        spread, d = edge_spread(layout.coords)
        assert spread < 1e-6 and np.allclose(d, 1.0, atol=1e-6)
        assert layout.score == pytest.approx(3 * value, rel=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_constraint_exact(self, seed):
        rng = np.random.default_rng(seed)
        layout = vos_run(VosProblem(random_similarities(8, rng)), seed=seed)
        assert abs(constraint_mean(layout.coords) - 1.0) < 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_sigma_hat_history_nonincreasing(self, seed):
        rng = np.random.default_rng(seed)
        h = np.array(vos_run(VosProblem(random_similarities(15, rng)), seed=seed).history)
        assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]))

    def test_matches_reference_on_five_items(self):
        p = VosProblem(random_similarities(5, np.random.default_rng(42)))
        ours = vos_multi_start(p, n_starts=10, master_seed=1)
        ref = constrained_reference_solve(p, seed=1)
        assert abs(ours.score - ref.score) <= 1e-3 * ref.score

    def test_bad_options(self):
        p = VosProblem(equal_similarities(3))
        with pytest.raises(ConfigError):
            vos_run(p, seed=1, max_iter=0)

    def test_deterministic(self):
        p = VosProblem(random_similarities(9, np.random.default_rng(8)))
        a = vos_multi_start(p, n_starts=4, master_seed=7)
        b = vos_multi_start(p, n_starts=4, master_seed=7, workers=4)
        assert np.array_equal(a.coords, b.coords)

    def test_minimize_returns_history(self):
        p = VosProblem(equal_similarities(4))
        x, history, it = minimize_sigma_hat(p, np.random.default_rng(0).uniform(size=(4, 2)))
        assert len(history) == it + 1
        assert history[-1] == pytest.approx(sigma_hat(p, x))


class TestReferenceSolver:
    def test_two_items(self):
        y = constrained_reference_solve(VosProblem(equal_similarities(2)), seed=1).coords
        assert np.linalg.norm(y[0] - y[1]) == pytest.approx(1.0, abs=1e-12)

    def test_equilateral(self):
        y = constrained_reference_solve(VosProblem(equal_similarities(3)), seed=2).coords
        spread, d = edge_spread(y)
        assert spread < 1e-6 and np.allclose(d, 1.0, atol=1e-6)

    def test_agrees_with_vos_run(self):
        p = VosProblem(random_similarities(10, np.random.default_rng(10)))
        ours = vos_multi_start(p, n_starts=10, master_seed=1)
        ref = constrained_reference_solve(p, seed=1)
        assert procrustes_disparity(ref.coords, ours.coords) < 1e-3


class TestProposition1:
    def test_report_fields(self):
        p = VosProblem(random_similarities(6, np.random.default_rng(3)))
        report = proposition1_check(p, seed=1, n_starts=5)
        d = report.as_dict()
        assert set(d) >= {"c_forward", "c_backward", "objective_gap", "procrustes_disparity"}
        assert 0.999 <= report.c_forward * report.c_backward <= 1.001
        assert report.constraint_residual < 1e-12

    def test_constraint_satisfying_start_has_unit_forward_scale(self):
        # two items: the unconstrained optimum sits at distance 1/s, the
        # constrained one at 1, so c_forward = s and c_backward = 1/s
        p = VosProblem(equal_similarities(2, 1.0))
        report = proposition1_check(p, seed=1, n_starts=2)
        assert report.c_forward == pytest.approx(1.0, rel=1e-9)
