import numpy as np
import pytest
import scipy.linalg

from svdflow import matcore
from svdflow.errors import DegenerateSingularValuesError, InvalidInputError
from svdflow.models import DEFAULT_DEMO_MODEL, skew_generator, two_state_generator
from svdflow.odeflow import (
    Generator,
    integrate,
    propagator,
    rk2_step,
    seed_factors,
)


def constant(m):
    m = np.asarray(m, dtype=float)
    return Generator(dim=m.shape[0], matrix=lambda t: m)


class TestRk2Step:
    def test_null_dynamics(self):
        v = np.array([0.3, -0.7])
        assert np.array_equal(rk2_step(constant(np.zeros((2, 2))), v, 0.0, 0.5), v)

    def test_scalar_expansion_factor(self):
        c, h = 0.8, 0.2
        out = rk2_step(constant([[c]]), np.array([1.0]), 0.0, h)
        assert np.isclose(out[0], 1.0 + c * h + (c * h) ** 2 / 2.0, atol=1e-15)

    def test_population_conservation(self):
        gen = two_state_generator(DEFAULT_DEMO_MODEL)
        v = np.array([0.6, 0.4])
        for t in (0.0, 0.003, 1.0, 100.0):
            out = rk2_step(gen, v, t, 7.0)
            # 1^T A = 0 kills every update term; only the final additions round
            assert abs(out.sum() - v.sum()) <= 1e-15

    def test_rejects_nonpositive_step(self):
        with pytest.raises(InvalidInputError):
            rk2_step(constant(np.zeros((1, 1))), np.array([1.0]), 0.0, 0.0)


class TestIntegrate:
    def test_single_step_matches_rk2(self):
        gen = two_state_generator(DEFAULT_DEMO_MODEL)
        v0 = np.array([1.0, 0.0])
        traj = integrate(gen, v0, 0.0, 0.5, 1)
        assert np.array_equal(traj.states[1], rk2_step(gen, v0, 0.0, 0.5))

    def test_constant_skew_norm_drift(self):
        s = matcore.skew_part(np.random.default_rng(0).standard_normal((3, 3)))
        v0 = np.array([1.0, 0.0, 0.0])
        nsteps, t1 = 200, 2.0
        traj = integrate(constant(s), v0, 0.0, t1, nsteps)
        h = t1 / nsteps
        drift = np.abs(np.linalg.norm(traj.states, axis=1) - 1.0).max()
        assert drift <= 5.0 * nsteps * h**3  # O(h^2) per step, accumulated

    def test_second_order_convergence(self):
        gen = Generator(dim=2, matrix=lambda t: np.array(
            [[-0.3, 0.2 * np.sin(t)], [0.1 * np.cos(t), -0.1]]))
        v0 = np.array([1.0, 0.5])
        exact = integrate(gen, v0, 0.0, 2.0, 20000).states[-1]
        e_coarse = np.abs(integrate(gen, v0, 0.0, 2.0, 50).states[-1] - exact).max()
        e_fine = np.abs(integrate(gen, v0, 0.0, 2.0, 100).states[-1] - exact).max()
        assert 3.0 <= e_coarse / e_fine <= 5.0

    def test_times_strictly_increasing(self):
        traj = integrate(constant(np.zeros((2, 2))), np.zeros(2), 1.0, 2.0, 10)
        assert np.all(np.diff(traj.times) > 0)


class TestPropagator:
    def test_zero_length_interval(self):
        gen = constant(np.ones((2, 2)))
        assert np.array_equal(propagator(gen, 1.0, 1.0, 10), np.eye(2))

    def test_constant_matches_exponential(self):
        a = np.array([[-0.5, 0.3], [0.2, -0.1]])
        phi = propagator(constant(a), 0.0, 1.0, 400)
        exact = scipy.linalg.expm(a)
        assert np.abs(phi - exact).max() <= 1e-6  # RK2 at h=1/400

    def test_skew_orthogonality(self):
        gen = skew_generator(3, seed=5, smoothness=0.2)
        nsteps = 300
        phi = propagator(gen, 0.0, 3.0, nsteps)
        h = 3.0 / nsteps
        assert np.linalg.norm(phi.T @ phi - np.eye(3)) <= 10.0 * nsteps * h**3

    def test_continuation(self):
        gen = two_state_generator(DEFAULT_DEMO_MODEL)
        whole = propagator(gen, 0.0, 2.0, 200)
        half = propagator(gen, 0.0, 1.0, 100)
        joined = propagator(gen, 1.0, 2.0, 100, phi0=half)
        assert np.array_equal(joined, whole)


class TestSeedFactors:
    def test_unitary_flow_degenerate(self):
        gen = skew_generator(2, seed=1, smoothness=0.0)
        with pytest.raises(DegenerateSingularValuesError):
            seed_factors(gen, 2.0, 0.5, nsub=200)

    def test_demo_model_seed_structure(self, demo_cfg, demo_seeds):
        h = demo_cfg.step_size
        expected_times = (demo_cfg.t_seed - 2 * h, demo_cfg.t_seed - h,
                          demo_cfg.t_seed)
        assert len(demo_seeds) == 3
        for f, t in zip(demo_seeds, expected_times):
            assert np.isclose(f.t, t)
            assert f.sigma[0] >= f.sigma[1] > 0
            assert f.tilde[0] == 1.0
            f.validate()

    def test_diagonal_generator(self):
        gen = constant(np.diag([0.5, -0.3]))
        f = seed_factors(gen, 2.0, 0.5, nsub=2000)[-1]
        assert np.abs(np.abs(f.u) - np.eye(2)).max() <= 1e-9
        assert np.abs(np.abs(f.v) - np.eye(2)).max() <= 1e-9
        # sigma ordered by the (exp-like) growth rates alpha > beta
        assert np.isclose(f.sigma[0], np.exp(0.5 * 2.0), rtol=1e-5)
        assert np.isclose(f.sigma[1], np.exp(-0.3 * 2.0), rtol=1e-5)

    def test_rejects_bad_window(self):
        gen = two_state_generator(DEFAULT_DEMO_MODEL)
        with pytest.raises(InvalidInputError):
            seed_factors(gen, 1.0, 0.5, nsub=100)
