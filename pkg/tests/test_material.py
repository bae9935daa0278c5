import math

import numpy as np
import pytest

from formstab import (InternalState, MaterialError, MaterialParams,
                      DesiredState, ViscoplasticLaw, compute_S_star,
                      hybrid_law, norton_law)


class ZeroLaw(ViscoplasticLaw):
    """Identically zero plastic rate, for linearization edge cases."""

    def plastic_strain_rate(self, sigma, state=None):
        return np.zeros_like(np.asarray(sigma, dtype=float))

    def internal_state_rate(self, sigma, state, eps_p=0.0):
        return 0.0, 0.0


def make_hybrid(**over):
    kw = dict(
        kocks_mecking={"k1": 1.0, "k2": 0.5},
        avrami={"k": 2.0, "m": 2.0},
        taylor={"sigma0_lam": 50.0, "sigma0_glob": 30.0, "prefactor": 0.5},
        overstress={"sigma_ref": 1.0, "n": 1.0, "t_ref": 1.0},
    )
    kw.update(over)
    return hybrid_law(kw["kocks_mecking"], kw["avrami"], kw["taylor"], kw["overstress"])


class TestMaterialParams:
    def test_valid(self):
        p = MaterialParams(9200.0, 7.5, 109.31)
        assert p.wave_speed == math.sqrt(9200.0)

    @pytest.mark.parametrize("kw", [
        dict(elastic_modulus=0.0, length=1.0, area=1.0),
        dict(elastic_modulus=-1.0, length=1.0, area=1.0),
        dict(elastic_modulus=1.0, length=0.0, area=1.0),
        dict(elastic_modulus=1.0, length=1.0, area=-2.0),
        dict(elastic_modulus=1.0, length=1.0, area=1.0, density=2.0),
    ])
    def test_invalid(self, kw):
        with pytest.raises(MaterialError):
            MaterialParams(**kw)


class TestDesiredState:
    def test_linear_profile(self):
        d = DesiredState.linear_profile(146.0, 0.0, 1.5, 7.5)
        assert d.v_star(0.0) == 0.0
        assert d.v_star(7.5) == pytest.approx(1.5, rel=1e-15)
        d.validate_on(7.5)

    def test_rejects_nonfinite(self):
        with pytest.raises(MaterialError):
            DesiredState.linear_profile(math.nan, 0.0, 1.0, 1.0)
        bad = DesiredState(1.0, lambda x: math.inf)
        with pytest.raises(MaterialError):
            bad.validate_on(1.0)


class TestInternalState:
    def test_bounds_enforced(self):
        InternalState(X=0.5, rho_bar=1.0)
        with pytest.raises(MaterialError):
            InternalState(X=1.5, rho_bar=0.0)
        with pytest.raises(MaterialError):
            InternalState(X=0.0, rho_bar=-1.0)


class TestNortonLaw:
    def test_zero_stress(self):
        law = norton_law(1.0, 1.0, 1.0)
        assert law.plastic_strain_rate(0.0) == 0.0
        assert law.plastic_strain_rate(-5.0) == 0.0

    def test_unit_ratio(self):
        law = norton_law(100.0, 3.0, 1.0)
        assert law.plastic_strain_rate(100.0) == pytest.approx(1.0, rel=1e-15)

    def test_scaled(self):
        # (200/100)^3 / 2 = 4
        law = norton_law(100.0, 3.0, 2.0)
        assert law.plastic_strain_rate(200.0) == pytest.approx(4.0, rel=1e-15)

    @pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, 0.5, 1.0), (1.0, 1.0, 0.0),
                                      (math.nan, 1.0, 1.0)])
    def test_invalid(self, args):
        with pytest.raises(MaterialError):
            norton_law(*args)

    def test_monotone_in_sigma(self):
        for n in (1.0, 2.0, 3.5):
            law = norton_law(80.0, n, 2.0)
            sig = np.linspace(0.0, 400.0, 200)
            rates = law.plastic_strain_rate(sig)
            assert np.all(np.diff(rates) >= 0.0)

    def test_no_internal_evolution(self):
        law = norton_law(1.0, 2.0, 1.0)
        dX, drho = law.internal_state_rate(3.0, InternalState())
        assert dX == 0.0 and drho == 0.0


class TestHybridLaw:
    def test_zero_rate_freezes_state(self):
        law = make_hybrid()
        state = InternalState(X=0.3, rho_bar=4.0)
        # below the mixture stress: no plastic flow, no state evolution
        sigma = law.mixture_stress(state) - 1.0
        assert law.plastic_strain_rate(sigma, state) == 0.0
        dX, drho = law.internal_state_rate(sigma, state, eps_p=0.2)
        assert dX == 0.0 and drho == 0.0

    def test_mixture_endpoint(self):
        law = make_hybrid()
        state = InternalState(X=1.0, rho_bar=9.0)
        # X = 1: mixture equals the globular branch exactly
        assert law.mixture_stress(state) == pytest.approx(
            law.sigma0_glob + law.taylor_prefactor * 3.0, rel=1e-15)

    def test_euler_step_generation(self):
        # drho/dt = k1 sqrt(rho) |ep_rate| with k1=1, k2=0, rho=4, rate=1:
        # one explicit Euler step of 0.1 gives 4.2
        law = make_hybrid(kocks_mecking={"k1": 1.0, "k2": 0.0})
        state = InternalState(X=0.0, rho_bar=4.0)
        sigma = law.mixture_stress(state) + 1.0  # overstress 1 -> rate 1
        assert law.plastic_strain_rate(sigma, state) == pytest.approx(1.0, rel=1e-14)
        _, drho = law.internal_state_rate(sigma, state, eps_p=0.1)
        assert 4.0 + 0.1 * drho == pytest.approx(4.2, rel=1e-14)

    def test_monotone_in_sigma(self):
        law = make_hybrid()
        state = InternalState(X=0.4, rho_bar=2.0)
        sig = np.linspace(0.0, 300.0, 400)
        rates = law.plastic_strain_rate(sig, state)
        assert np.all(np.diff(rates) >= 0.0)

    def test_invalid_coefficients(self):
        with pytest.raises(MaterialError):
            make_hybrid(kocks_mecking={"k1": 1.0, "k2": -1.0})
        with pytest.raises(MaterialError):
            make_hybrid(avrami={"k": math.inf, "m": 1.0})


class TestComputeSStar:
    def test_linear_law(self):
        # n = 1: derivative is 1 / (sigma_ref * t_ref); with E = 1 -> 1.0
        law = norton_law(1.0, 1.0, 1.0)
        params = MaterialParams(1.0, 1.0, 1.0)
        desired = DesiredState.linear_profile(5.0, 0.0, 0.0, 1.0)
        s = compute_S_star(law, params, desired, InternalState())
        assert s == pytest.approx(1.0, rel=1e-9)

    def test_paper_constants_cubic(self):
        # analytic: E n sigma*^(n-1) / sigma_ref^n / t_ref, 4 significant digits
        law = norton_law(100.0, 3.0, 1.0)
        params = MaterialParams(9200.0, 7.5, 109.31)
        desired = DesiredState.linear_profile(146.0, 0.0, 1.5, 7.5)
        s = compute_S_star(law, params, desired, InternalState())
        analytic = 9200.0 * 3.0 * 146.0 ** 2 / 100.0 ** 3
        assert s == pytest.approx(analytic, rel=1e-4)

    def test_zero_law(self):
        params = MaterialParams(10.0, 1.0, 1.0)
        desired = DesiredState.linear_profile(3.0, 0.0, 0.0, 1.0)
        assert compute_S_star(ZeroLaw(), params, desired, InternalState()) == 0.0

    def test_fd_matches_closed_form_over_grid(self):
        params = MaterialParams(100.0, 1.0, 1.0)
        for n in (1.0, 2.0, 3.0, 5.0):
            for sigma_star in (10.0, 50.0, 200.0):
                law = norton_law(75.0, n, 2.0)
                desired = DesiredState.linear_profile(sigma_star, 0.0, 0.0, 1.0)
                s = compute_S_star(law, params, desired, InternalState())
                analytic = params.elastic_modulus * law.rate_derivative(sigma_star)
                assert s == pytest.approx(analytic, rel=1e-8)

    def test_nonnegative_for_provided_laws(self):
        params = MaterialParams(50.0, 1.0, 1.0)
        state = InternalState(X=0.2, rho_bar=1.0)
        for law in (norton_law(10.0, 2.0, 1.0), make_hybrid()):
            for sigma_star in (0.0, 5.0, 60.0, 300.0):
                desired = DesiredState.linear_profile(sigma_star, 0.0, 0.0, 1.0)
                assert compute_S_star(law, params, desired, state) >= 0.0

    def test_nonfinite_law_rejected(self):
        class NanLaw(ZeroLaw):
            def plastic_strain_rate(self, sigma, state=None):
                return math.nan

        params = MaterialParams(1.0, 1.0, 1.0)
        desired = DesiredState.linear_profile(1.0, 0.0, 0.0, 1.0)
        with pytest.raises(MaterialError):
            compute_S_star(NanLaw(), params, desired, InternalState())
