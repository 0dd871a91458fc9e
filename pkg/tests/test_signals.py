import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.io import wavfile

from srlab.errors import AudioFormatError, DegenerateInputError, InvalidArgumentError, NumericOverflowError
from srlab.signals import (
    OuParams,
    RoesslerParams,
    TimeSeries,
    gen_bipolar,
    gen_gaussian_noise,
    gen_ou,
    gen_roessler,
    gen_sine,
    load_audio,
    normalize_amplitude,
    rk4_integrate,
)


def repeat_rate(x):
    return np.mean(x[1:] == x[:-1])


class TestBipolar:
    def test_constant_when_flips_impossible(self):
        for seed in range(5):
            s = gen_bipolar(1.0, 5, seed).samples
            assert set(s) <= {-1.0, 1.0} and len(set(s)) == 1

    def test_alternates_when_flip_forced(self):
        s = gen_bipolar(0.0, 4, 3).samples
        assert np.all(s[1:] == -s[:-1])

    def test_repeat_rate(self):
        s = gen_bipolar(0.7, 10**6, 11).samples
        assert abs(repeat_rate(s) - 0.7) < 0.002

    def test_first_sample_unbiased(self):
        firsts = [gen_bipolar(0.7, 1, seed).samples[0] for seed in range(2000)]
        assert abs(np.mean(firsts)) < 0.1

    def test_lag1_correlation_matches_2q_minus_1(self):
        s = gen_bipolar(0.7, 10**6, 5).samples
        assert abs(np.mean(s[1:] * s[:-1]) - 0.4) < 0.01

    def test_deterministic(self):
        assert np.array_equal(gen_bipolar(0.7, 1000, 9).samples, gen_bipolar(0.7, 1000, 9).samples)

    def test_rejects_empty(self):
        with pytest.raises(InvalidArgumentError):
            gen_bipolar(0.7, 0, 1)


class TestSine:
    def test_starts_at_zero(self):
        assert gen_sine(3.0, 1.0, 0.01, 10).samples[0] == 0.0

    def test_quarter_period_values(self):
        np.testing.assert_allclose(gen_sine(1.0, 2.0, 0.25, 5).samples, [0, 2, 0, -2, 0], atol=1e-12)

    def test_integer_periods_have_zero_mean(self):
        s = gen_sine(440.0, 1.0, 1 / 44100, 44100).samples
        assert abs(s.sum() / s.size) < 1e-3

    @pytest.mark.parametrize("freq,dt", [(0.0, 0.1), (1.0, 0.0), (-1.0, 0.1)])
    def test_rejects_bad_params(self, freq, dt):
        with pytest.raises(InvalidArgumentError):
            gen_sine(freq, 1.0, dt, 10)


class TestRK4:
    def test_exponential_growth(self):
        states = rk4_integrate(lambda y: (y[0],), (1.0,), 0.01, 100)
        assert abs(states[-1][0] - math.e) < 1e-6

    def test_overflow_names_step(self):
        with pytest.raises(NumericOverflowError, match="step"):
            rk4_integrate(lambda y: (y[0] ** 2,), (1.0,), 0.5, 50)


class TestRoessler:
    def test_bounded_attractor(self):
        x = gen_roessler(RoesslerParams(dt=0.01), 10**5).samples
        assert np.max(np.abs(x)) < 20

    def test_matches_reference_integrator(self):
        # short horizon: chaotic divergence makes long-time comparison meaningless
        p = RoesslerParams(dt=0.01, transient_steps=0)
        ours = gen_roessler(p, 1001).samples
        t_eval = np.arange(1001) * p.dt
        ref = solve_ivp(
            lambda t, s: [-(s[1] + s[2]), s[0] + p.a * s[1], p.b + (s[0] - p.c) * s[2]],
            (0, t_eval[-1]), p.initial_state, t_eval=t_eval, rtol=1e-11, atol=1e-12, method="DOP853",
        )
        np.testing.assert_allclose(ours, ref.y[0], atol=1e-6)

    def test_initial_condition_echoed(self):
        x = gen_roessler(RoesslerParams(initial_state=(0.0, 0.0, 0.0), transient_steps=0), 1).samples
        assert x.tolist() == [0.0]

    def test_deterministic(self):
        p = RoesslerParams(transient_steps=100)
        assert np.array_equal(gen_roessler(p, 500).samples, gen_roessler(p, 500).samples)


def _ou_reference(tau, eps, dt, n, seed):
    # Euler-Maruyama with a plain loop, independent of the exact-update path
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n)
    x, out = 0.0, np.empty(n)
    k = math.sqrt(dt) * eps
    for i in range(n):
        x += -x / tau * dt + k * xi[i]
        out[i] = x
    return out


class TestOU:
    def test_noiseless_decay(self):
        x = gen_ou(OuParams(tau=2.0, eps=0.0, dt=0.01, initial_x=1.5), 500, 0).samples
        t = np.arange(500) * 0.01
        np.testing.assert_allclose(x, 1.5 * np.exp(-t / 2.0), rtol=1e-12)

    def test_stationary_variance(self):
        x = gen_ou(OuParams(tau=1.0, eps=1.0, dt=0.01), 10**6, 4).samples
        ref = _ou_reference(1.0, 1.0, 0.01, 10**6, 4)
        assert abs(x.var() / 0.5 - 1) < 0.05
        assert abs(ref.var() / 0.5 - 1) < 0.05

    def test_autocorrelation_at_one_tau(self):
        x = gen_ou(OuParams(tau=1.0, eps=1.0, dt=0.01), 10**6, 8).samples
        d = x - x.mean()
        rho = np.dot(d[100:], d[:-100]) / (d.size - 100) / d.var()
        assert abs(rho - math.exp(-1)) < 0.02

    def test_deterministic(self):
        p = OuParams()
        assert np.array_equal(gen_ou(p, 100, 2).samples, gen_ou(p, 100, 2).samples)

    def test_rejects_bad_tau(self):
        with pytest.raises(InvalidArgumentError):
            OuParams(tau=0.0)


class TestAudio:
    def test_full_scale_sample(self, tmp_path):
        path = tmp_path / "one.wav"
        wavfile.write(path, 44100, np.array([32767], dtype=np.int16))
        ts = load_audio(path)
        assert ts.samples[0] == pytest.approx(1.0, abs=1e-4)
        assert ts.dt == 1 / 44100

    def test_silence(self, tmp_path):
        path = tmp_path / "zeros.wav"
        wavfile.write(path, 8000, np.zeros(100, dtype=np.int16))
        assert np.all(load_audio(path).samples == 0.0)

    def test_float_wav(self, tmp_path):
        path = tmp_path / "f.wav"
        wavfile.write(path, 8000, np.array([0.5, -0.25], dtype=np.float32))
        np.testing.assert_allclose(load_audio(path).samples, [0.5, -0.25])

    def test_stereo_rejected(self, tmp_path):
        path = tmp_path / "stereo.wav"
        wavfile.write(path, 8000, np.zeros((10, 2), dtype=np.int16))
        with pytest.raises(AudioFormatError, match="channels=2"):
            load_audio(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_audio(tmp_path / "nope.wav")

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "bad.wav"
        path.write_bytes(b"not a wav file at all")
        with pytest.raises(AudioFormatError):
            load_audio(path)


class TestNoise:
    def test_zero_sigma(self):
        assert np.all(gen_gaussian_noise(0.0, 10, 1).samples == 0.0)

    def test_moments(self):
        x = gen_gaussian_noise(1.0, 10**6, 21).samples
        assert abs(x.mean()) < 0.004
        assert abs(x.std() - 1) < 0.005

    def test_deterministic(self):
        assert np.array_equal(gen_gaussian_noise(1.0, 50, 5).samples, gen_gaussian_noise(1.0, 50, 5).samples)

    def test_negative_sigma(self):
        with pytest.raises(InvalidArgumentError):
            gen_gaussian_noise(-1.0, 10, 0)


class TestNormalize:
    def test_divide_by_peak(self):
        out = normalize_amplitude(TimeSeries([-2.0, 1.0]), 1.0)
        assert out.samples.tolist() == [-1.0, 0.5]

    def test_identity_at_target(self):
        ts = TimeSeries([0.3, -1.0])
        assert normalize_amplitude(ts, 1.0).samples.tolist() == [0.3, -1.0]

    def test_rescaled_sine(self):
        s = gen_sine(2.5, 3.0, 0.01, 200)
        np.testing.assert_allclose(normalize_amplitude(s, 0.9).samples, 0.3 * s.samples, rtol=1e-12)

    def test_all_zero(self):
        with pytest.raises(DegenerateInputError):
            normalize_amplitude(TimeSeries([0.0, 0.0]), 1.0)


def test_timeseries_is_immutable():
    ts = TimeSeries([1.0, 2.0], 0.5, "x")
    with pytest.raises(ValueError):
        ts.samples[0] = 3.0
    with pytest.raises(InvalidArgumentError):
        TimeSeries([1.0], 0.0)
