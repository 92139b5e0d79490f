"""Unit tests for LMMSE, SINR computation and ordered successive detection."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ntnwave.detection import (
    DetectorConfig,
    detect_lmmse,
    detect_mmse_sd,
    lmmse_weights,
    sinr_per_symbol,
    slice_symbols,
)
from ntnwave.modem import awgn, qam_constellation, snr_to_sigma2


def random_channel(rng, n):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def random_symbols(rng, points, n):
    return points[rng.integers(0, points.size, size=n)]


class TestLmmseWeights:
    def test_identity_channel(self):
        assert_allclose(lmmse_weights(np.eye(4), 1.0), 0.5 * np.eye(4), atol=1e-12)

    def test_scaled_identity(self):
        assert_allclose(lmmse_weights(2.0 * np.eye(4), 1.0), 0.4 * np.eye(4), atol=1e-12)

    def test_low_noise_limit_is_inverse(self):
        rng = np.random.default_rng(0)
        h = random_channel(rng, 8) + 2.0 * np.eye(8)  # keep it well conditioned
        w = lmmse_weights(h, 1e-12)
        assert np.max(np.abs(w - np.linalg.inv(h))) <= 1e-6

    def test_zero_noise_regularized(self):
        h = np.eye(4)
        w = lmmse_weights(h, 0.0)
        assert np.all(np.isfinite(w))
        assert_allclose(w, np.eye(4), atol=1e-9)


class TestSinr:
    def test_identity_channel_unit_sinr(self):
        sinr = sinr_per_symbol(0.5 * np.eye(4), np.eye(4), 1.0, np.arange(4))
        assert_allclose(sinr, np.ones(4), atol=1e-12)

    def test_noise_dominated_limit(self):
        h = np.eye(4)
        sigma2 = 1e12
        sinr = sinr_per_symbol(lmmse_weights(h, sigma2), h, sigma2, np.arange(4))
        assert np.all(sinr < 1e-10)

    def test_matches_bruteforce_sum(self):
        rng = np.random.default_rng(1)
        h = random_channel(rng, 4)
        sigma2 = 0.1
        w = lmmse_weights(h, sigma2)
        active = np.array([0, 2, 3])
        sinr = sinr_per_symbol(w, h, sigma2, active)
        for k in active:
            signal = abs(w[k] @ h[:, k]) ** 2
            interf = sum(abs(w[k] @ h[:, j]) ** 2 for j in active if j != k)
            noise = sigma2 * np.sum(np.abs(w[k]) ** 2)
            assert sinr[k] == pytest.approx(signal / (interf + noise), rel=1e-10)
        assert sinr[1] == -np.inf


class TestSlice:
    def test_exact_point(self):
        points = qam_constellation(16)
        assert slice_symbols(points[7], points)[0] == points[7]

    def test_corner_saturation(self):
        points = qam_constellation(16)
        assert slice_symbols(10 + 10j, points)[0] == pytest.approx((3 + 3j) / np.sqrt(10))

    def test_origin_ties_to_lowest_index(self):
        points = qam_constellation(16)
        inner = [i for i in range(16) if abs(points[i]) == min(abs(p) for p in points)]
        assert slice_symbols(0.0 + 0.0j, points)[0] == points[min(inner)]


class TestDetectLmmse:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(2)
        points = qam_constellation(16)
        h = random_channel(rng, 8) + 2.0 * np.eye(8)
        x = random_symbols(rng, points, 8)
        config = DetectorConfig(kind="lmmse", noise_variance=1e-9, constellation=points)
        result = detect_lmmse(h @ x, h, config)
        assert_allclose(result.symbols, x, atol=1e-9)
        assert np.array_equal(result.detection_order, np.arange(8))

    def test_awgn_ber_matches_closed_form(self, gray_qam_awgn_ber):
        rng = np.random.default_rng(3)
        points = qam_constellation(16)
        snr_db = 15.0
        sigma2 = snr_to_sigma2(snr_db)
        n = 100
        frames = 1000  # 1e5 symbols
        config = DetectorConfig(kind="lmmse", noise_variance=sigma2, constellation=points)
        h = np.eye(n)
        errors = 0
        total = 0
        for _ in range(frames):
            x = random_symbols(rng, points, n)
            y = awgn(h @ x, sigma2, rng)
            detected = detect_lmmse(y, h, config).symbols
            labels_tx = np.argmin(np.abs(x[:, None] - points[None, :]), axis=1)
            labels_rx = np.argmin(np.abs(detected[:, None] - points[None, :]), axis=1)
            errors += sum(bin(a ^ b).count("1") for a, b in zip(labels_tx, labels_rx))
            total += 4 * n
        measured = errors / total
        assert measured == pytest.approx(gray_qam_awgn_ber(snr_db, 16), rel=0.10)

    def test_scalar_case(self):
        points = qam_constellation(4)
        config = DetectorConfig(kind="lmmse", noise_variance=0.5, constellation=points)
        y = np.array([0.9 + 1.1j]) / np.sqrt(2)
        result = detect_lmmse(y, np.eye(1), config)
        assert result.symbols[0] == points[0]

    def test_scale_invariance(self):
        rng = np.random.default_rng(4)
        points = qam_constellation(16)
        h = random_channel(rng, 6)
        x = random_symbols(rng, points, 6)
        y = h @ x + 0.1 * awgn(np.zeros(6, complex), 1.0, rng)
        c = 2.7 - 1.3j
        base = detect_lmmse(y, h, DetectorConfig("lmmse", 0.2, points))
        scaled = detect_lmmse(c * y, c * h, DetectorConfig("lmmse", 0.2 * abs(c) ** 2, points))
        assert_allclose(base.symbols, scaled.symbols, atol=1e-12)


class TestDetectMmseSd:
    @pytest.mark.parametrize("method", ["fast", "direct"])
    def test_scalar_matches_lmmse(self, method):
        points = qam_constellation(16)
        config = DetectorConfig(kind="mmse_sd", noise_variance=0.3, constellation=points)
        y = np.array([0.5 - 0.4j])
        h = np.array([[1.2 + 0.1j]])
        sd = detect_mmse_sd(y, h, config, method=method)
        lm = detect_lmmse(y, h, DetectorConfig("lmmse", 0.3, points))
        assert sd.symbols[0] == lm.symbols[0]

    @pytest.mark.parametrize("method", ["fast", "direct"])
    def test_noiseless_unitary_recovery(self, method):
        rng = np.random.default_rng(5)
        points = qam_constellation(16)
        q, _ = np.linalg.qr(random_channel(rng, 8))
        x = random_symbols(rng, points, 8)
        config = DetectorConfig(kind="mmse_sd", noise_variance=1e-9, constellation=points)
        result = detect_mmse_sd(q @ x, q, config, method=method)
        assert_allclose(result.symbols, x, atol=1e-9)

    @pytest.mark.parametrize("method", ["fast", "direct"])
    def test_matches_independent_oracle(self, method, successive_detector_oracle):
        rng = np.random.default_rng(6)
        points = qam_constellation(16)
        sigma2 = 0.1
        config = DetectorConfig(kind="mmse_sd", noise_variance=sigma2, constellation=points)
        for _ in range(50):
            h = random_channel(rng, 4)
            x = random_symbols(rng, points, 4)
            y = awgn(h @ x, sigma2, rng)
            expected_symbols, expected_order, _ = successive_detector_oracle(y, h, sigma2, points)
            result = detect_mmse_sd(y, h, config, method=method)
            assert list(result.detection_order) == expected_order
            assert_allclose(result.symbols, expected_symbols, atol=1e-10)

    def test_fast_direct_bit_compatible(self):
        rng = np.random.default_rng(7)
        points = qam_constellation(16)
        sigma2 = 0.05
        config = DetectorConfig(kind="mmse_sd", noise_variance=sigma2, constellation=points)
        for _ in range(20):
            h = random_channel(rng, 16)
            x = random_symbols(rng, points, 16)
            y = awgn(h @ x, sigma2, rng)
            trace_fast: list[str] = []
            trace_direct: list[str] = []
            fast = detect_mmse_sd(y, h, config, method="fast", trace=trace_fast)
            direct = detect_mmse_sd(y, h, config, method="direct", trace=trace_direct)
            assert np.array_equal(fast.detection_order, direct.detection_order)
            assert_allclose(fast.symbols, direct.symbols, atol=1e-9)
            sinr_fast = [float(line.split("sinr=")[1]) for line in trace_fast]
            sinr_direct = [float(line.split("sinr=")[1]) for line in trace_direct]
            assert_allclose(sinr_fast, sinr_direct, rtol=1e-6)

    def test_detection_order_is_permutation(self):
        rng = np.random.default_rng(8)
        points = qam_constellation(16)
        config = DetectorConfig(kind="mmse_sd", noise_variance=0.2, constellation=points)
        h = random_channel(rng, 12)
        y = awgn(h @ random_symbols(rng, points, 12), 0.2, rng)
        result = detect_mmse_sd(y, h, config)
        assert sorted(result.detection_order) == list(range(12))

    def test_sinr_trace_is_argmax(self, successive_detector_oracle):
        # at each oracle iteration the selected SINR dominates the undetected set
        rng = np.random.default_rng(9)
        points = qam_constellation(16)
        sigma2 = 0.15
        h = random_channel(rng, 6)
        y = awgn(h @ random_symbols(rng, points, 6), sigma2, rng)
        trace: list[str] = []
        detect_mmse_sd(y, h, DetectorConfig("mmse_sd", sigma2, points), trace=trace)
        sinr_values = [float(line.split("sinr=")[1]) for line in trace]
        # re-derive each iteration's full SINR profile independently
        h_cur = h.copy()
        active = list(range(6))
        for step, line in enumerate(trace):
            q = int(line.split("q=")[1].split()[0])
            gram = h_cur.conj().T @ h_cur + sigma2 * np.eye(6)
            w = np.linalg.inv(gram) @ h_cur.conj().T
            sinrs = {}
            for k in active:
                sig = abs(w[k] @ h_cur[:, k]) ** 2
                interf = sum(abs(w[k] @ h_cur[:, j]) ** 2 for j in active if j != k)
                sinrs[k] = sig / (interf + sigma2 * np.sum(np.abs(w[k]) ** 2))
            assert max(sinrs, key=sinrs.get) == q
            assert sinr_values[step] == pytest.approx(sinrs[q], rel=1e-6)
            h_cur[:, q] = 0.0
            active.remove(q)

    def test_cancellation_identity(self, successive_detector_oracle):
        # with correct slices the residual entering step i equals the
        # remaining channel columns times the remaining symbols plus noise
        rng = np.random.default_rng(10)
        points = qam_constellation(16)
        sigma2 = 1e-6
        h = random_channel(rng, 6) + 2.0 * np.eye(6)
        x = random_symbols(rng, points, 6)
        noise = awgn(np.zeros(6, complex), sigma2, rng)
        y = h @ x + noise
        symbols, order, residuals = successive_detector_oracle(y, h, sigma2, points)
        assert_allclose(symbols, x, atol=1e-9)
        for step, residual in enumerate(residuals):
            remaining = [k for k in range(6) if k not in order[:step]]
            expected = h[:, remaining] @ x[remaining] + noise
            assert_allclose(residual, expected, atol=1e-9)

    def test_zero_noise_regularized(self):
        rng = np.random.default_rng(11)
        points = qam_constellation(16)
        h = random_channel(rng, 5) + 2.0 * np.eye(5)
        x = random_symbols(rng, points, 5)
        config = DetectorConfig(kind="mmse_sd", noise_variance=0.0, constellation=points)
        result = detect_mmse_sd(h @ x, h, config)
        assert_allclose(result.symbols, x, atol=1e-9)

    def test_error_count_dominates_lmmse(self):
        # aggregated over random frames at matched SNR, successive detection
        # makes no more symbol errors than one-shot LMMSE
        rng = np.random.default_rng(12)
        points = qam_constellation(16)
        snr_db = 15.0
        sigma2 = snr_to_sigma2(snr_db)
        lmmse_errors = 0
        sd_errors = 0
        for _ in range(200):
            h = random_channel(rng, 16)
            x = random_symbols(rng, points, 16)
            y = awgn(h @ x, sigma2, rng)
            lm = detect_lmmse(y, h, DetectorConfig("lmmse", sigma2, points))
            sd = detect_mmse_sd(y, h, DetectorConfig("mmse_sd", sigma2, points))
            lmmse_errors += int(np.count_nonzero(lm.symbols != x))
            sd_errors += int(np.count_nonzero(sd.symbols != x))
        assert sd_errors <= lmmse_errors

    def test_unknown_method_rejected(self):
        points = qam_constellation(4)
        config = DetectorConfig(kind="mmse_sd", noise_variance=0.1, constellation=points)
        with pytest.raises(ValueError):
            detect_mmse_sd(np.ones(2), np.eye(2), config, method="magic")


class TestDetectorConfig:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            DetectorConfig(kind="zf", noise_variance=0.1, constellation=qam_constellation(4))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            DetectorConfig(kind="lmmse", noise_variance=0.1, constellation=np.ones(3))

    def test_rejects_negative_noise(self):
        with pytest.raises(ValueError):
            DetectorConfig(kind="lmmse", noise_variance=-1.0, constellation=qam_constellation(4))
