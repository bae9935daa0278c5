import math

import numpy as np
import pytest

from formstab import (MaterialError, PerturbationState, RiemannState,
                      build_system, to_physical, to_riemann)


class TestBuildSystem:
    def test_zero_source(self):
        sys = build_system(1.0, 0.0)
        assert np.array_equal(sys.Lambda, np.diag([1.0, -1.0]))
        assert np.array_equal(sys.B, np.zeros((2, 2)))

    def test_unit_source(self):
        sys = build_system(1.0, 1.0)
        assert np.allclose(sys.B, 0.5 * np.ones((2, 2)), rtol=0, atol=0)

    def test_paper_modulus_eigenvalue(self):
        sys = build_system(9200.0, 0.0)
        assert sys.Lambda[0, 0] == pytest.approx(math.sqrt(9200.0), rel=1e-15)
        assert sys.Lambda[0, 0] == pytest.approx(95.9166304662544, rel=1e-12)

    def test_invalid_modulus(self):
        with pytest.raises(MaterialError):
            build_system(0.0, 1.0)
        with pytest.raises(MaterialError):
            build_system(-4.0, 0.0)

    def test_transform_identities_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            E = 10.0 ** rng.uniform(-2, 4)
            s_star = rng.uniform(-10, 10)
            sys = build_system(E, s_star)
            assert np.max(np.abs(sys.T @ sys.T_inv - np.eye(2))) <= 1e-12
            assert np.max(np.abs(sys.T_inv @ sys.A @ sys.T - sys.Lambda)) <= 1e-12 * E
            assert np.max(np.abs(sys.B - 0.5 * s_star * np.ones((2, 2)))) <= 1e-12 * abs(s_star)


class TestTransforms:
    def test_zero_maps_to_zero(self):
        sys = build_system(3.0, 0.0)
        r = to_riemann(sys, PerturbationState(0.0, 0.0))
        assert r.r_plus == 0.0 and r.r_minus == 0.0
        u = to_physical(sys, RiemannState(0.0, 0.0))
        assert u.delta_v == 0.0 and u.delta_sigma == 0.0

    def test_hand_solved_unit_modulus(self):
        sys = build_system(1.0, 0.0)
        r = to_riemann(sys, PerturbationState(-1.0, 1.0))
        assert r.r_plus == pytest.approx(1.0, abs=1e-15)
        assert r.r_minus == pytest.approx(0.0, abs=1e-15)

    def test_hand_solved_modulus_four(self):
        # T^-1 = [[-1/2, 1/4], [1/2, 1/4]] for E = 4
        sys = build_system(4.0, 0.0)
        r = to_riemann(sys, PerturbationState(1.0, 2.0))
        assert r.r_plus == pytest.approx(0.0, abs=1e-15)
        assert r.r_minus == pytest.approx(1.0, rel=1e-15)

    def test_columns_of_T(self):
        sys = build_system(1.0, 0.0)
        u1 = to_physical(sys, RiemannState(1.0, 0.0))
        assert (u1.delta_v, u1.delta_sigma) == (-1.0, 1.0)
        u2 = to_physical(sys, RiemannState(0.0, 1.0))
        assert (u2.delta_v, u2.delta_sigma) == (1.0, 1.0)

    def test_round_trip_random_states(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            E = 10.0 ** rng.uniform(-2, 4)
            sys = build_system(E, 0.0)
            u = PerturbationState(rng.standard_normal(100), rng.standard_normal(100))
            back = to_physical(sys, to_riemann(sys, u))
            scale = np.linalg.norm(np.concatenate([u.delta_v, u.delta_sigma]))
            err = np.linalg.norm(np.concatenate([back.delta_v - u.delta_v,
                                                 back.delta_sigma - u.delta_sigma]))
            assert err <= 1e-12 * scale

    def test_grid_and_scalar_inputs(self):
        sys = build_system(2.0, 0.5)
        arr = to_riemann(sys, PerturbationState(np.ones(4), np.zeros(4)))
        assert arr.r_plus.shape == (4,)
        scalar = to_riemann(sys, PerturbationState(1.0, 0.0))
        assert np.isscalar(scalar.r_plus) or scalar.r_plus.ndim == 0
