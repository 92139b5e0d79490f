"""Shared oracles for the test suite.

The helpers here are written from the math, independently of the package
implementation, so they can serve as cross-checks: a step-by-step successive
detector and a closed-form Gray QAM AWGN bit error rate.
"""

import math

import numpy as np
import pytest


def _oracle_successive_detector(y, h, sigma2, points):
    """Step-by-step ordered MMSE successive detection, coded from scratch.

    Returns (symbols, detection_order, residuals) where residuals[i] is the
    received vector entering iteration i.
    """
    n = len(y)
    h_cur = np.array(h, dtype=complex, copy=True)
    y_cur = np.array(y, dtype=complex, copy=True)
    detected = np.zeros(n, dtype=complex)
    order = []
    residuals = []
    undetected = list(range(n))
    for _ in range(n):
        residuals.append(y_cur.copy())
        # weight matrix from the current (column-zeroed) channel
        gram = np.conj(h_cur.T) @ h_cur + sigma2 * np.eye(n)
        w = np.linalg.inv(gram) @ np.conj(h_cur.T)
        # per-symbol SINR over undetected indices only
        best_index = None
        best_sinr = -1.0
        for k in undetected:
            wk = w[k, :]
            signal = abs(np.vdot(np.conj(wk), h_cur[:, k])) ** 2
            interference = 0.0
            for j in undetected:
                if j != k:
                    interference += abs(np.vdot(np.conj(wk), h_cur[:, j])) ** 2
            noise = sigma2 * float(np.sum(np.abs(wk) ** 2))
            sinr = signal / (interference + noise)
            if sinr > best_sinr:
                best_sinr = sinr
                best_index = k
        q = best_index
        soft = np.vdot(np.conj(w[q, :]), y_cur)
        distances = [abs(soft - p) for p in points]
        hard = points[int(np.argmin(distances))]
        detected[q] = hard
        order.append(q)
        y_cur = y_cur - hard * h_cur[:, q]
        h_cur[:, q] = 0.0
        undetected.remove(q)
    return detected, order, residuals


@pytest.fixture(scope="session")
def successive_detector_oracle():
    return _oracle_successive_detector


def _gray_code(i):
    return i ^ (i >> 1)


def _hamming(a, b):
    return bin(a ^ b).count("1")


def _qfunc(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _gray_qam_awgn_ber(snr_db, order):
    """Exact AWGN bit error rate of Gray-labeled square QAM.

    Enumerates, per axis, the probability that PAM level i is sliced as
    level j and weights it by the Gray-label Hamming distance.  Both axes
    are identical, so the per-axis average equals the overall BER.
    """
    bits_per_axis = (order.bit_length() - 1) // 2
    levels = 1 << bits_per_axis
    # amplitudes ordered by binary index, unit total symbol energy
    scale = math.sqrt(2.0 * (levels * levels - 1) / 3.0)
    amplitude = [(levels - 1 - 2 * i) / scale for i in range(levels)]
    sigma_axis = math.sqrt(10.0 ** (-snr_db / 10.0) / 2.0)
    # slicing thresholds halfway between adjacent amplitudes (descending)
    thresholds = [(amplitude[i] + amplitude[i + 1]) / 2.0 for i in range(levels - 1)]

    total = 0.0
    for i in range(levels):
        for j in range(levels):
            upper = math.inf if j == 0 else thresholds[j - 1]
            lower = -math.inf if j == levels - 1 else thresholds[j]
            p_hi = _qfunc((lower - amplitude[i]) / sigma_axis) if lower != -math.inf else 1.0
            p_lo = _qfunc((upper - amplitude[i]) / sigma_axis) if upper != math.inf else 0.0
            prob = p_hi - p_lo
            total += prob * _hamming(_gray_code(i), _gray_code(j))
    return total / (levels * bits_per_axis)


@pytest.fixture(scope="session")
def gray_qam_awgn_ber():
    return _gray_qam_awgn_ber


def test_awgn_oracle_matches_published_form():
    # cross-check the enumeration against the standard 16-QAM expression
    # (3 Q(u) + 2 Q(3u) - Q(5u)) / 4 with u = sqrt(gamma / 5)
    for snr_db in (6.0, 10.0, 14.0):
        gamma = 10.0 ** (snr_db / 10.0)
        u = math.sqrt(gamma / 5.0)
        closed = (3 * _qfunc(u) + 2 * _qfunc(3 * u) - _qfunc(5 * u)) / 4
        assert _gray_qam_awgn_ber(snr_db, 16) == pytest.approx(closed, rel=1e-12)
