import numpy as np
import pytest

from ljswarm.analysis import classify_equilibrium, energy
from ljswarm.potential import (gradient, pair_force_magnitude,
                               zero_force_distance)
from ljswarm.scenarios import (CATALOG, PackingError, SplitMix64, build,
                               collinear_equilibrium_spacing, collinear_three,
                               default_params, equilateral_three,
                               n_agent_random, random_eight, two_agent)

RSTAR = zero_force_distance(0.5)
# force-balance root for sigma = 0.5 (closed form, frozen):
# 0.5 * (2 * (1 + 2**-13) / (1 + 2**-7)) ** (1/6)
B_STAR = 0.5605149691408478


class TestTwoAgent:
    def test_initial_energy(self):
        s = two_agent()
        assert energy(s.initial, s.params).total == pytest.approx(-0.3714, abs=5e-5)

    def test_initial_separation_beyond_sigma(self):
        s = two_agent()
        assert s.initial.min_distance == pytest.approx(0.7296, abs=1e-12)
        assert s.initial.min_distance > s.params.sigma(0, 1)

    def test_expected_equilibrium_distance(self):
        s = two_agent()
        value, note = s.expected["final_r12"]
        assert value == pytest.approx(0.5612, abs=5e-5)
        assert note

    def test_benchmark_sigma(self):
        s = two_agent()
        assert s.params.sigma(0, 1) == pytest.approx(0.5, abs=1e-15)


class TestEquilateral:
    def test_zero_force_side_is_equilibrium(self):
        # triangle with side exactly at the zero-force separation
        params = default_params(3)
        side = RSTAR
        verts = np.array([[0.0, 0.0], [side, 0.0],
                          [side / 2.0, np.sqrt(3.0) / 2.0 * side]])
        from ljswarm.model import Configuration
        config = Configuration(positions=verts, velocities=np.zeros((3, 2)))
        assert classify_equilibrium(config, params).is_equilibrium

    def test_default_construction(self):
        s = equilateral_three()
        assert s.initial.n_agents == 3
        assert s.initial.min_distance > 0.5
        assert s.expected["E_infinity"][0] == pytest.approx(-3.0, abs=1e-15)

    def test_perturbation_zero_keeps_exact_triangle(self):
        s = equilateral_three(perturbation=0.0)
        d01 = np.linalg.norm(s.initial.positions[0] - s.initial.positions[1])
        d12 = np.linalg.norm(s.initial.positions[1] - s.initial.positions[2])
        assert d01 == pytest.approx(1.2 * RSTAR, rel=1e-12)
        assert d12 == pytest.approx(1.2 * RSTAR, rel=1e-12)

    def test_negative_perturbation_rejected(self):
        with pytest.raises(ValueError):
            equilateral_three(perturbation=-0.1)


class TestCollinear:
    def test_construction(self):
        s = collinear_three()
        pos = s.initial.positions
        assert pos[1] == pytest.approx([0.0, 0.0], abs=0)
        assert np.linalg.norm(pos[0] - pos[1]) == pytest.approx(1.3 * 0.5, abs=1e-15)
        assert np.all(pos[:, 1] == 0.0)

    def test_middle_agent_force_cancels_by_symmetry(self):
        s = collinear_three()
        grad = gradient(s.initial, s.params)
        assert np.abs(grad.entries[1]).max() == 0.0

    def test_expected_values_from_oracle(self):
        s = collinear_three()
        assert s.expected["final_r12"][0] == pytest.approx(B_STAR, abs=2e-12)
        assert s.expected["final_r13"][0] == pytest.approx(2 * B_STAR, abs=4e-12)


class TestCollinearSpacing:
    def test_matches_closed_form(self):
        value = collinear_equilibrium_spacing(0.5, 1.0)
        closed = 0.5 * (2.0 * (1 + 2.0 ** -13) / (1 + 2.0 ** -7)) ** (1.0 / 6.0)
        assert value == pytest.approx(closed, abs=1.5e-12)
        assert value == pytest.approx(B_STAR, abs=1.5e-12)

    def test_scales_linearly_with_sigma(self):
        for sigma in (0.2, 1.0, 2.0):
            closed = sigma * (2.0 * (1 + 2.0 ** -13) / (1 + 2.0 ** -7)) ** (1.0 / 6.0)
            assert collinear_equilibrium_spacing(sigma, 1.0) == pytest.approx(
                closed, abs=3e-12 * max(1.0, sigma))

    def test_independent_of_well_depth(self):
        assert (collinear_equilibrium_spacing(0.5, 1.0)
                == collinear_equilibrium_spacing(0.5, 7.0))

    def test_compressed_below_two_body_zero_force_distance(self):
        # the outer pairs must repel to balance the far pair's attraction,
        # so they sit inside the two-body zero-force separation
        b = collinear_equilibrium_spacing(0.5, 1.0)
        assert b < RSTAR
        assert pair_force_magnitude(0.5, b, 1.0) > 0
        assert pair_force_magnitude(0.5, 2 * b, 1.0) < 0

    def test_root_balances_forces(self):
        b = collinear_equilibrium_spacing(0.5, 1.0)
        residual = (pair_force_magnitude(0.5, b, 1.0)
                    + pair_force_magnitude(0.5, 2 * b, 1.0))
        assert abs(residual) < 1e-9

    def test_substituted_into_line_is_equilibrium(self):
        from ljswarm.model import Configuration
        params = default_params(3)
        b = collinear_equilibrium_spacing(0.5, 1.0)
        config = Configuration(positions=[[-b, 0.0], [0.0, 0.0], [b, 0.0]],
                               velocities=np.zeros((3, 2)))
        assert gradient(config, params).max_agent_norm < 1e-10


class TestRandomPlacement:
    def test_pair_count(self):
        s = n_agent_random(8, seed=3)
        n = s.initial.n_agents
        assert n * (n - 1) // 2 == 28

    def test_seed_determinism(self):
        s1 = n_agent_random(8, seed=42)
        s2 = n_agent_random(8, seed=42)
        assert np.array_equal(s1.initial.positions, s2.initial.positions)

    def test_seeds_differ(self):
        s1 = n_agent_random(8, seed=1)
        s2 = n_agent_random(8, seed=2)
        assert not np.array_equal(s1.initial.positions, s2.initial.positions)

    def test_separation_rule(self):
        for seed in (1, 2, 3):
            s = n_agent_random(8, seed=seed)
            assert s.initial.min_distance >= 0.3 * 0.5

    def test_velocities_zero(self):
        s = n_agent_random(5, seed=9)
        assert np.all(s.initial.velocities == 0.0)

    def test_box_respected(self):
        s = n_agent_random(8, seed=11, box_half_width=0.8)
        assert np.abs(s.initial.positions).max() <= 0.8

    def test_impossible_packing_raises(self):
        with pytest.raises(PackingError):
            n_agent_random(12, seed=1, box_half_width=0.05)

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError):
            n_agent_random(1, seed=1)
        with pytest.raises(ValueError):
            n_agent_random(4, seed=1, box_half_width=0.0)


class TestSplitMix64:
    def test_known_stream(self):
        # reference values for seed 1234567 from the published algorithm
        rng = SplitMix64(1234567)
        first = [rng.next_u64() for _ in range(3)]
        assert first == [6457827717110365317, 3203168211198807973,
                         9817491932198370423]

    def test_uniform_range(self):
        rng = SplitMix64(99)
        values = [rng.uniform(-1.0, 1.0) for _ in range(1000)]
        assert all(-1.0 <= v < 1.0 for v in values)
        assert abs(np.mean(values)) < 0.1


class TestCatalog:
    def test_names(self):
        assert set(CATALOG) == {"two_agent", "equilateral_three",
                                "collinear_three", "random_eight"}

    def test_build_dispatch(self):
        s = build("two_agent")
        assert s.name == "two_agent"

    def test_build_seed_applies(self):
        s1 = build("random_eight", seed=5)
        s2 = random_eight(seed=5)
        assert np.array_equal(s1.initial.positions, s2.initial.positions)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            build("does_not_exist")

    def test_all_initial_configurations_valid(self):
        for name in CATALOG:
            s = build(name)
            assert s.initial.min_distance > 0
            assert s.initial.n_agents == s.params.n_agents
