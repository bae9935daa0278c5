"""Compiled kernel vs pure-NumPy fallback: identical semantics."""

import numpy as np
import pytest

from formstab._kernels import _ref

_core = pytest.importorskip(
    "formstab._kernels._core",
    reason="compiled kernel not built; fallback-only environment")


def random_fields(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n), rng.standard_normal(n)


class TestAdvanceLinear:
    @pytest.mark.parametrize("nu", [1.0, 0.9, 0.5])
    @pytest.mark.parametrize("n_steps", [1, 7, 500])
    def test_backends_agree_exactly(self, nu, n_steps):
        rp0, rm0 = random_fields(257, seed=42)
        args = (nu, 0.8, -0.3, 1.01, -0.02, 0.03, 0.99, n_steps)
        a_rp, a_rm = rp0.copy(), rm0.copy()
        b_rp, b_rm = rp0.copy(), rm0.copy()
        _core.advance_linear(a_rp, a_rm, *args)
        _ref.advance_linear(b_rp, b_rm, *args)
        np.testing.assert_array_equal(a_rp, b_rp)
        np.testing.assert_array_equal(a_rm, b_rm)

    def test_in_place_update(self):
        rp, rm = random_fields(32, seed=1)
        before = rp.copy()
        _core.advance_linear(rp, rm, 0.9, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 3)
        assert not np.array_equal(rp, before)


class TestWaveStep:
    @pytest.mark.parametrize("nu", [1.0, 0.75])
    def test_backends_agree_exactly(self, nu):
        v0, s0 = random_fields(128, seed=7)
        a_v, a_s = v0.copy(), s0.copy()
        b_v, b_s = v0.copy(), s0.copy()
        for k in range(200):
            _core.wave_step(a_v, a_s, 3.0, nu, 0.1 * k, -0.05)
            _ref.wave_step(b_v, b_s, 3.0, nu, 0.1 * k, -0.05)
        np.testing.assert_array_equal(a_v, b_v)
        np.testing.assert_array_equal(a_s, b_s)


class TestBackendSelection:
    def test_backend_reported(self):
        import formstab
        assert formstab.kernel_backend in ("compiled", "python")

    def test_fallback_is_importable(self):
        assert _ref.BACKEND == "python"
        assert callable(_ref.advance_linear) and callable(_ref.wave_step)
