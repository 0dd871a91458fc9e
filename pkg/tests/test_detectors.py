import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srlab.analytic import analytic_q
from srlab.detectors import MEMORYLESS_KINDS, DetectorSpec, apply_memoryless, detect, run_lif
from srlab.errors import InvalidArgumentError, WrongOperationError
from srlab.signals import TimeSeries, gen_bipolar, gen_gaussian_noise


def ts(values, dt=1.0):
    return TimeSeries(np.asarray(values, dtype=float), dt)


def zeros(n, dt=1.0):
    return TimeSeries(np.zeros(n), dt)


class TestDetectorSpec:
    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError, match="unknown detector"):
            DetectorSpec("schmitt", 1.0)

    def test_theta_positive(self):
        with pytest.raises(InvalidArgumentError):
            DetectorSpec("discrete_symmetric", 0.0)

    def test_lif_fields_required(self):
        with pytest.raises(InvalidArgumentError, match="tau_m"):
            DetectorSpec("lif", 1.0, dt=0.01)

    def test_lif_fields_rejected_elsewhere(self):
        with pytest.raises(InvalidArgumentError, match="only apply to lif"):
            DetectorSpec("continuous_symmetric", 1.0, tau_m=0.1)

    def test_lif_rest_default(self):
        assert DetectorSpec("lif", 1.0, tau_m=0.1, dt=0.01).x_rest == 0.0


class TestTransferFunctions:
    def test_continuous_symmetric_dead_zone(self):
        spec = DetectorSpec("continuous_symmetric", 1.0)
        assert apply_memoryless(spec, ts([0.5]), zeros(1)).samples.tolist() == [0.0]

    def test_continuous_symmetric_shifts(self):
        spec = DetectorSpec("continuous_symmetric", 1.0)
        out = apply_memoryless(spec, ts([1.0, -1.0]), ts([0.5, -0.5])).samples
        assert out.tolist() == [0.5, -0.5]

    def test_continuous_asymmetric(self):
        spec = DetectorSpec("continuous_asymmetric", 1.0)
        out = apply_memoryless(spec, ts([0.5, 1.0, 2.5, -3.0]), zeros(4)).samples
        assert out.tolist() == [0.0, 0.0, 1.5, 0.0]

    def test_discrete_asymmetric_alphabet(self):
        spec = DetectorSpec("discrete_asymmetric", 1.0)
        out = apply_memoryless(spec, ts([0.5, 1.0, 2.5, -3.0]), zeros(4)).samples
        assert out.tolist() == [0.0, 1.0, 1.0, 0.0]

    def test_discrete_symmetric_supra_threshold(self):
        spec = DetectorSpec("discrete_symmetric", 1.1)
        for seed in range(20):
            assert apply_memoryless(spec, ts([1.0]), ts([0.5]), seed).samples[0] == 1.0

    def test_discrete_symmetric_coin_is_fair(self):
        spec = DetectorSpec("discrete_symmetric", 1.1)
        out = apply_memoryless(spec, zeros(10**5), zeros(10**5), seed=4).samples
        assert set(np.unique(out)) == {-1.0, 1.0}
        assert abs(out.mean()) < 0.01

    def test_coin_seeded(self):
        spec = DetectorSpec("discrete_symmetric", 1.1)
        a = apply_memoryless(spec, zeros(100), zeros(100), seed=1).samples
        b = apply_memoryless(spec, zeros(100), zeros(100), seed=1).samples
        c = apply_memoryless(spec, zeros(100), zeros(100), seed=2).samples
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            apply_memoryless(DetectorSpec("discrete_asymmetric", 1.0), zeros(3), zeros(4))

    def test_lif_rejected(self):
        with pytest.raises(WrongOperationError):
            apply_memoryless(DetectorSpec("lif", 1.0, tau_m=0.1, dt=0.01), zeros(3), zeros(3))


class TestMemorylessProperties:
    @pytest.mark.parametrize("kind", ["continuous_symmetric", "continuous_asymmetric", "discrete_asymmetric"])
    @settings(max_examples=50, deadline=None)
    @given(data=st.lists(st.floats(-5, 5), min_size=2, max_size=40), perm_seed=st.integers(0, 2**16))
    def test_permutation_equivariance(self, kind, data, perm_seed):
        spec = DetectorSpec(kind, 1.0)
        x = np.array(data)
        perm = np.random.default_rng(perm_seed).permutation(x.size)
        out = apply_memoryless(spec, ts(x), zeros(x.size)).samples
        out_perm = apply_memoryless(spec, ts(x[perm]), zeros(x.size)).samples
        assert np.array_equal(out[perm], out_perm)

    def test_discrete_symmetric_permutation_outside_dead_zone(self):
        # coins are drawn per index, so only supra-threshold samples must follow the permutation
        spec = DetectorSpec("discrete_symmetric", 1.0)
        x = np.random.default_rng(0).uniform(-3, 3, 1000)
        perm = np.random.default_rng(1).permutation(x.size)
        out = apply_memoryless(spec, ts(x), zeros(x.size), 5).samples
        out_perm = apply_memoryless(spec, ts(x[perm]), zeros(x.size), 5).samples
        supra = np.abs(x[perm]) > 1.0
        assert np.array_equal(out[perm][supra], out_perm[supra])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=40), st.floats(0.1, 3))
    def test_continuous_symmetric_is_odd(self, data, theta):
        spec = DetectorSpec("continuous_symmetric", theta)
        x = np.array(data)
        pos = apply_memoryless(spec, ts(x), zeros(x.size)).samples
        neg = apply_memoryless(spec, ts(-x), zeros(x.size)).samples
        assert np.array_equal(neg, -pos)

    def test_discrete_symmetric_odd_in_distribution(self):
        spec = DetectorSpec("discrete_symmetric", 1.1)
        x = np.random.default_rng(2).normal(0, 1.5, 10**5)
        pos = apply_memoryless(spec, ts(x), zeros(x.size), 8).samples
        neg = apply_memoryless(spec, ts(-x), zeros(x.size), 9).samples
        assert abs(pos.mean() + neg.mean()) < 0.015

    @pytest.mark.parametrize("sigma", [0.3, 0.85, 2.0])
    def test_empirical_q_matches_analytic(self, sigma):
        n = 10**6
        spec = DetectorSpec("discrete_symmetric", 1.1)
        s = gen_bipolar(0.7, n, 1)
        y = apply_memoryless(spec, s, gen_gaussian_noise(sigma, n, 2), 3)
        assert abs(np.mean(s.samples == y.samples) - analytic_q(1.1, sigma)) < 0.01


def lif(theta=1.0, tau_m=0.1, dt=0.001, x_rest=0.0):
    return DetectorSpec("lif", theta, tau_m=tau_m, dt=dt, x_rest=x_rest)


class TestLIF:
    def test_rest_is_fixed_point(self):
        out = run_lif(lif(), zeros(1000, 0.001), zeros(1000, 0.001))
        assert not out.samples.any()

    def test_subthreshold_drive_never_spikes(self):
        # s * tau_m = 0.95 < theta
        spec = lif()
        out, membrane = run_lif(spec, ts(np.full(20000, 9.5), 0.001), zeros(20000, 0.001), return_membrane=True)
        assert not out.samples.any()
        assert abs(membrane.samples[-1] - 0.95) < 1e-9

    @pytest.mark.parametrize("s", [12.0, 20.0, 50.0])
    def test_isi_matches_closed_form(self, s):
        spec = lif()
        n = 20000
        out = run_lif(spec, ts(np.full(n, s), spec.dt), zeros(n, spec.dt))
        spikes = np.flatnonzero(out.samples)
        isi = np.diff(spikes) * spec.dt
        expected = spec.tau_m * math.log(s * spec.tau_m / (s * spec.tau_m - spec.theta))
        assert spikes.size > 10
        assert np.all(np.abs(isi - expected) <= spec.dt)

    def test_output_binary_and_reset(self):
        spec = lif(x_rest=0.2)
        n = 5000
        noise = gen_gaussian_noise(30.0, n, 3)
        out, membrane = run_lif(spec, ts(np.full(n, 5.0), spec.dt), TimeSeries(noise.samples, spec.dt), True)
        assert set(np.unique(out.samples)) <= {0.0, 1.0}
        assert out.samples.sum() > 0
        assert np.all(membrane.samples < spec.theta)
        assert np.all(membrane.samples[out.samples == 1.0] == 0.2)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            run_lif(lif(), zeros(3), zeros(4))

    def test_wrong_kind(self):
        with pytest.raises(WrongOperationError):
            run_lif(DetectorSpec("discrete_symmetric", 1.0), zeros(3), zeros(3))


@pytest.mark.parametrize("kind", MEMORYLESS_KINDS)
def test_detect_dispatches_memoryless(kind):
    spec = DetectorSpec(kind, 1.0)
    s, n = ts([2.0, 0.2, -2.0]), zeros(3)
    assert np.array_equal(detect(spec, s, n, 7).samples, apply_memoryless(spec, s, n, 7).samples)


def test_detect_dispatches_lif():
    spec = lif()
    s = ts(np.full(500, 20.0), spec.dt)
    n = zeros(500, spec.dt)
    assert np.array_equal(detect(spec, s, n).samples, run_lif(spec, s, n).samples)
