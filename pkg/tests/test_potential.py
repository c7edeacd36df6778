import math

import numpy as np
import pytest
from scipy.optimize import brentq, minimize_scalar

from ljswarm.model import CollisionError, Configuration
from ljswarm.potential import (InvalidEnergyError, collision_bound,
                               deflated_spectrum, gradient, hessian,
                               min_nonzero_eigenvalue, pair_force_magnitude,
                               phi, phi_derivative, phi_second_derivative,
                               potential_lower_bound, total_potential,
                               translation_basis, zero_force_distance)
from conftest import fd_gradient, fd_hessian, make_params, random_configuration

RSTAR = zero_force_distance(0.5)  # 0.5612310241546865

# frozen oracle values: central finite differences of phi, step 1e-6
FORCE_AT_R1 = -0.363281  # -d(phi)/dr at sigma=0.5, r=1.0, a=1


def equilateral_configuration(side):
    verts = np.array([[0.0, 0.0], [side, 0.0],
                      [side / 2.0, math.sqrt(3.0) / 2.0 * side]])
    return Configuration(positions=verts, velocities=np.zeros((3, 2)))


class TestPhi:
    def test_minimum_value_at_zero_force_distance(self):
        assert phi(0.5, RSTAR, 1.0) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_at_sigma(self, rng):
        for _ in range(20):
            sigma = rng.uniform(0.05, 3.0)
            a = rng.uniform(0.1, 10.0)
            assert phi(sigma, sigma, a) == 0.0

    def test_benchmark_initial_energy(self):
        assert phi(0.5, 0.7296, 1.0) == pytest.approx(-0.3714, abs=5e-5)

    def test_domain_error(self):
        with pytest.raises(CollisionError):
            phi(0.5, 0.0, 1.0)
        with pytest.raises(CollisionError):
            phi(0.5, -1.0, 1.0)
        with pytest.raises(ValueError):
            phi(-0.5, 1.0, 1.0)

    def test_limits(self):
        assert phi(0.5, 1e-3, 1.0) > 1e30
        assert -1e-12 < phi(0.5, 1e3, 1.0) < 0.0

    def test_global_minimum_by_scan(self, rng):
        # independent of the analytic minimizer: dense scan plus refinement
        for _ in range(5):
            sigma = rng.uniform(0.2, 2.0)
            a = rng.uniform(0.2, 5.0)
            grid = np.linspace(0.8 * sigma, 3.0 * sigma, 4001)
            values = [phi(sigma, r, a) for r in grid]
            k = int(np.argmin(values))
            res = minimize_scalar(lambda r: phi(sigma, r, a),
                                  bounds=(grid[k - 1], grid[k + 1]),
                                  method="bounded",
                                  options={"xatol": 1e-12})
            assert res.fun == pytest.approx(-a, rel=1e-10)
            assert res.x == pytest.approx(zero_force_distance(sigma), rel=1e-6)


class TestPairForce:
    def test_zero_at_zero_force_distance(self):
        assert abs(pair_force_magnitude(0.5, RSTAR, 1.0)) <= 1e-12

    def test_contact_value(self):
        # at r = sigma the force is 24*a/sigma, here 48
        assert pair_force_magnitude(0.5, 0.5, 1.0) == pytest.approx(48.0, abs=1e-12)

    def test_attractive_tail_matches_finite_difference(self):
        h = 1e-6
        oracle = -(phi(0.5, 1.0 + h, 1.0) - phi(0.5, 1.0 - h, 1.0)) / (2 * h)
        value = pair_force_magnitude(0.5, 1.0, 1.0)
        assert value == pytest.approx(oracle, rel=1e-8)
        assert value == pytest.approx(FORCE_AT_R1, abs=1e-6)

    def test_single_sign_change(self):
        # repulsive below the zero-force distance, attractive above, one root
        grid = np.geomspace(0.01 * 0.5, 100 * 0.5, 3000)
        signs = np.sign([pair_force_magnitude(0.5, r, 1.0) for r in grid])
        flips = np.nonzero(np.diff(signs))[0]
        assert len(flips) == 1
        root = brentq(lambda r: pair_force_magnitude(0.5, r, 1.0),
                      0.9 * RSTAR, 1.1 * RSTAR, xtol=1e-14)
        assert abs(root - RSTAR) <= 1e-12

    def test_consistent_with_derivative(self, rng):
        for _ in range(20):
            sigma = rng.uniform(0.1, 2.0)
            r = rng.uniform(0.3 * sigma, 5 * sigma)
            a = rng.uniform(0.1, 5.0)
            assert pair_force_magnitude(sigma, r, a) == -phi_derivative(sigma, r, a)


class TestPhiSecondDerivative:
    def test_value_at_zero_force_distance(self):
        expected = 72.0 / (2.0 ** (1.0 / 3.0) * 0.25)
        value = phi_second_derivative(0.5, RSTAR, 1.0)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(228.586, abs=5e-4)

    def test_positive_at_zero_force_distance(self, rng):
        for _ in range(20):
            sigma = rng.uniform(0.05, 3.0)
            a = rng.uniform(0.1, 10.0)
            assert phi_second_derivative(sigma, zero_force_distance(sigma), a) > 0

    def test_matches_second_central_difference(self):
        h = 1e-4
        oracle = (phi(0.5, 0.7 + h, 1.0) - 2 * phi(0.5, 0.7, 1.0)
                  + phi(0.5, 0.7 - h, 1.0)) / h ** 2
        assert phi_second_derivative(0.5, 0.7, 1.0) == pytest.approx(oracle, rel=1e-5)


class TestTotalPotential:
    def test_equilateral_at_zero_force_side(self):
        params = make_params(3)
        config = equilateral_configuration(RSTAR)
        assert total_potential(config, params) == pytest.approx(-3.0, abs=1e-12)

    def test_two_agent_benchmark(self):
        params = make_params(2)
        config = Configuration(positions=[[0, 0], [0.7296, 0]],
                               velocities=np.zeros((2, 2)))
        assert total_potential(config, params) == pytest.approx(-0.3714, abs=5e-5)

    def test_pair_at_sigma_is_zero(self):
        params = make_params(2)
        config = Configuration(positions=[[0, 0], [0.5, 0]],
                               velocities=np.zeros((2, 2)))
        assert total_potential(config, params) == 0.0

    def test_translation_invariance_exact_on_dyadic_grid(self, rng):
        # positions and shift on a common power-of-two grid make every
        # coordinate sum exact, so the pair differences are bit-identical
        params = make_params(4)
        grid = 2.0 ** -20
        pts = np.round(rng.uniform(-1, 1, size=(4, 2)) / grid) * grid
        shift = np.array([0.25, -0.5])
        c1 = Configuration(positions=pts, velocities=np.zeros((4, 2)))
        c2 = Configuration(positions=pts + shift, velocities=np.zeros((4, 2)))
        assert total_potential(c1, params) == total_potential(c2, params)

    def test_translation_invariance_generic(self, rng):
        params = make_params(5)
        config = random_configuration(rng, 5, params)
        shifted = Configuration(positions=config.positions + rng.normal(size=2),
                                velocities=config.velocities)
        assert total_potential(shifted, params) == pytest.approx(
            total_potential(config, params), rel=1e-12, abs=1e-12)


class TestGradient:
    def test_zero_at_equilateral_equilibrium(self):
        params = make_params(3)
        grad = gradient(equilateral_configuration(RSTAR), params)
        assert grad.norm <= 1e-12

    def test_rows_sum_to_zero(self, rng):
        for n in (2, 3, 5):
            params = make_params(n)
            config = random_configuration(rng, n, params)
            grad = gradient(config, params)
            total = np.abs(grad.entries.sum(axis=0)).max()
            assert total <= 1e-10 * max(grad.norm, 1.0)

    def test_matches_finite_differences_seeded(self):
        rng = np.random.default_rng(4)
        params = make_params(4)
        config = random_configuration(rng, 4, params)
        analytic = gradient(config, params).entries
        oracle = fd_gradient(config.positions, params)
        err = np.linalg.norm(analytic - oracle) / np.linalg.norm(oracle)
        assert err <= 1e-6

    def test_collision_error_propagates(self):
        from ljswarm.potential import _gradient_raw
        params = make_params(2)
        with pytest.raises(CollisionError):
            _gradient_raw(np.zeros((2, 2)), params)


class TestHessian:
    def test_symmetric(self, rng):
        params = make_params(4)
        config = random_configuration(rng, 4, params)
        H = hessian(config, params)
        assert np.abs(H - H.T).max() <= 1e-10 * np.abs(H).max()

    def test_matches_finite_differenced_gradient(self, rng):
        params = make_params(3)
        config = random_configuration(rng, 3, params)
        H = hessian(config, params)
        oracle = fd_hessian(config.positions, params)
        err = np.linalg.norm(H - oracle) / np.linalg.norm(oracle)
        assert err <= 1e-5

    def test_translation_null_space(self, rng):
        params = make_params(5)
        config = random_configuration(rng, 5, params)
        H = hessian(config, params)
        basis = translation_basis(5, 2)
        residual = np.abs(H @ basis.T).max()
        spectral = np.abs(np.linalg.eigvalsh(H)).max()
        assert residual <= 1e-8 * spectral

    def test_two_agent_structural_eigenvalue(self):
        params = make_params(2)
        half = RSTAR / 2.0
        config = Configuration(positions=[[-half, 0], [half, 0]],
                               velocities=np.zeros((2, 2)))
        H = hessian(config, params)
        lam = min_nonzero_eigenvalue(H, 2, 2)
        assert lam == pytest.approx(2.0 * phi_second_derivative(0.5, RSTAR, 1.0),
                                    rel=1e-6)
        assert lam == pytest.approx(457.17, abs=0.05)

    def test_deflated_spectrum_drops_translations(self):
        params = make_params(3)
        spec = deflated_spectrum(hessian(equilateral_configuration(RSTAR), params), 3, 2)
        # translations (deflated) and the rotation mode sit at zero; the
        # remaining three structural eigenvalues are strictly positive
        assert np.sum(np.abs(spec) <= 1e-8 * np.abs(spec).max()) == 3
        assert np.sum(spec > 1e-6) == 3


class TestBounds:
    def test_lower_bound_below_potential(self, rng):
        for n in (2, 3, 5):
            params = make_params(n)
            for _ in range(40):
                config = random_configuration(rng, n, params,
                                              min_sep_factor=0.35)
                assert (potential_lower_bound(config, params)
                        <= total_potential(config, params) + 1e-12)

    def test_lower_bound_tight_at_sigma(self):
        params = make_params(2)
        config = Configuration(positions=[[0, 0], [0.5, 0]],
                               velocities=np.zeros((2, 2)))
        assert potential_lower_bound(config, params) == pytest.approx(0.0, abs=1e-12)
        assert total_potential(config, params) == 0.0

    def test_lower_bound_equilateral_value(self):
        params = make_params(3)
        config = equilateral_configuration(RSTAR)
        assert potential_lower_bound(config, params) == pytest.approx(-4.5, abs=1e-10)

    def test_collision_bound_two_agent(self):
        params = make_params(2)
        e0 = phi(0.5, 0.7296, 1.0)
        bound = collision_bound(e0, params)
        assert bound == pytest.approx(0.5085, abs=2e-4)

    def test_collision_bound_eight_agents(self):
        params = make_params(8)
        assert collision_bound(-7.4258, params) == pytest.approx(0.3831, abs=5e-4)

    def test_collision_bound_unit_case(self):
        params = make_params(2, radius=1.0)
        assert collision_bound(0.0, params) == pytest.approx(1.0, abs=1e-14)

    def test_collision_bound_rejects_bad_energy(self):
        params = make_params(2)
        with pytest.raises(InvalidEnergyError):
            collision_bound(-2.5, params)

    def test_bound_report(self, rng):
        from ljswarm.potential import bound_report
        params = make_params(3)
        config = random_configuration(rng, 3, params, with_velocities=True)
        report = bound_report(config, params)
        assert report.r_min_theory > 0
        assert report.u_lower <= total_potential(config, params) + 1e-12
        assert report.sigma_min == 0.5
        # kinetic energy raises the total energy and so shrinks the bound
        at_rest = Configuration(positions=config.positions,
                                velocities=np.zeros_like(config.velocities))
        assert bound_report(at_rest, params).r_min_theory >= report.r_min_theory
