import numpy as np
import pytest

from aebound import autoencoder as ae
from aebound.optimizer import LbfgsOptions, minimize, train

pytestmark = pytest.mark.filterwarnings("ignore:code dimension")


def quadratic(center):
    center = np.asarray(center, dtype=float)

    def obj(v):
        return 0.5 * float(np.sum((v - center) ** 2)), v - center

    return obj


def rosenbrock(v):
    x, y = v
    f = (1 - x) ** 2 + 100 * (y - x * x) ** 2
    g = np.array([-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)])
    return f, g


class TestMinimize:
    def test_isotropic_quadratic_fast_convergence(self):
        rng = np.random.default_rng(0)
        for dim in (2, 5, 10):
            c = rng.normal(0, 5, dim)
            x, trace = minimize(quadratic(c), rng.normal(0, 10, dim), LbfgsOptions(grad_tol=1e-8))
            assert trace.stop_reason == "converged"
            assert trace.iterations <= dim + 2
            assert np.max(np.abs(x - c)) <= 1e-7

    def test_general_quadratic_matches_closed_form(self):
        rng = np.random.default_rng(1)
        for dim in (3, 8, 20):
            A = rng.normal(size=(dim, dim))
            A = A @ A.T + dim * np.eye(dim)
            b = rng.normal(size=dim)
            x_star = np.linalg.solve(A, b)

            def obj(v):
                return 0.5 * float(v @ A @ v) - float(b @ v), A @ v - b

            x, _ = minimize(obj, rng.normal(size=dim),
                            LbfgsOptions(history=dim + 5, grad_tol=1e-12, max_iters=300))
            assert np.max(np.abs(x - x_star)) <= 1e-8

    def test_rosenbrock(self):
        x, trace = minimize(rosenbrock, np.array([-1.2, 1.0]),
                            LbfgsOptions(grad_tol=1e-10, max_iters=200))
        assert np.max(np.abs(x - 1.0)) <= 1e-5
        assert trace.iterations <= 200

    def test_nan_at_start(self):
        def bad(v):
            return float("nan"), np.zeros_like(v)

        with pytest.raises(ValueError):
            minimize(bad, np.zeros(2), LbfgsOptions())

    def test_non_finite_theta0(self):
        with pytest.raises(ValueError):
            minimize(quadratic([0.0]), np.array([np.inf]), LbfgsOptions())

    def test_cost_history_non_increasing(self):
        rng = np.random.default_rng(2)
        x, trace = minimize(rosenbrock, rng.normal(size=2), LbfgsOptions(max_iters=100))
        hist = trace.cost_history
        assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))

    def test_line_search_failure_returns_best(self):
        # non-smooth kink the Wolfe search cannot satisfy near the minimum
        def obj(v):
            return float(np.sum(np.abs(v))), np.sign(v)

        x, trace = minimize(obj, np.array([1.0, -2.0]), LbfgsOptions(max_iters=50))
        assert trace.stop_reason in ("line_search_failure", "max_iters", "converged")
        assert trace.cost_history[-1] <= trace.cost_history[0]


class TestTrain:
    def test_identity_capable_architecture_fits(self):
        rng = np.random.default_rng(3)
        data = [rng.uniform(10, 20, 6) for _ in range(50)]
        cfg = ae.CostConfig("ae")
        opts = LbfgsOptions(max_iters=300)
        model, trace = train(data, 6, 6, cfg, opts, seed=0)
        assert trace.cost_history[-1] < 0.1 * trace.cost_history[0]

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        data = [rng.uniform(0, 1, 5) for _ in range(20)]
        cfg = ae.CostConfig("wae")
        opts = LbfgsOptions(max_iters=30)
        m1, _ = train(data, 5, 2, cfg, opts, seed=9)
        m2, _ = train(data, 5, 2, cfg, opts, seed=9)
        assert m1.w_enc.tobytes() == m2.w_enc.tobytes()
        assert m1.b_enc.tobytes() == m2.b_enc.tobytes()
        assert m1.w_dec.tobytes() == m2.w_dec.tobytes()
        assert m1.b_dec.tobytes() == m2.b_dec.tobytes()
        assert m1.sigma.sigma == m2.sigma.sigma

    def test_empty_data(self):
        with pytest.raises(ValueError):
            train([], 4, 2, ae.CostConfig("ae"), LbfgsOptions(), seed=0)

    def test_sigma_attached_from_training_data(self):
        from aebound.sphering import estimate_sigma

        rng = np.random.default_rng(5)
        data = [rng.normal(0, 3, 8) for _ in range(10)]
        model, _ = train(data, 8, 2, ae.CostConfig("ae"), LbfgsOptions(max_iters=5), seed=1)
        assert model.sigma.sigma == estimate_sigma(data).sigma
