"""Gray-mapped square QAM, complex AWGN and the SNR convention.

Constellations have unit average energy, so with the channel power also
normalized to one the per-symbol SNR is simply 1/sigma^2 and
``snr_to_sigma2`` is an exact dB inversion.
"""

from functools import lru_cache

import numpy as np

__all__ = [
    "QAM_ORDERS",
    "qam_constellation",
    "qam_map",
    "qam_demap",
    "awgn",
    "snr_to_sigma2",
]

QAM_ORDERS = (4, 16, 64)


def _gray_to_binary(g: int) -> int:
    b = g
    shift = 1
    while (g >> shift) > 0:
        b ^= g >> shift
        shift += 1
    return b


@lru_cache(maxsize=None)
def _axis_levels(bits_per_axis: int) -> np.ndarray:
    # level for Gray label g: descending odd amplitudes ordered by binary index
    size = 1 << bits_per_axis
    levels = np.zeros(size)
    for g in range(size):
        i = _gray_to_binary(g)
        levels[g] = size - 1 - 2 * i
    return levels


@lru_cache(maxsize=None)
def qam_constellation(order: int) -> np.ndarray:
    """Unit-energy Gray-coded square QAM points, indexed by integer bit label.

    The label's high half addresses the in-phase axis, the low half the
    quadrature axis, each as a Gray code over descending amplitudes, so
    label 0 is the most positive corner and neighboring points differ in
    exactly one bit.
    """
    if order not in QAM_ORDERS:
        raise ValueError(f"modulation order must be one of {QAM_ORDERS}, got {order}")
    m = order.bit_length() // 2  # bits per axis
    levels = _axis_levels(m)
    scale = np.sqrt(2.0 * (4**m - 1) / 3.0)
    labels = np.arange(order)
    i_axis = levels[labels >> m]
    q_axis = levels[labels & ((1 << m) - 1)]
    points = (i_axis + 1j * q_axis) / scale
    points.setflags(write=False)
    return points


def qam_map(bits: np.ndarray, order: int) -> np.ndarray:
    """Map a bit vector (MSB first per symbol) to constellation symbols."""
    points = qam_constellation(order)
    bits = np.asarray(bits, dtype=np.int64)
    bps = order.bit_length() - 1
    if bits.size % bps != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {bps} bits/symbol")
    weights = 1 << np.arange(bps - 1, -1, -1)
    labels = bits.reshape(-1, bps) @ weights
    return points[labels]


def qam_demap(symbols: np.ndarray, order: int) -> np.ndarray:
    """Inverse of :func:`qam_map`; off-constellation inputs snap to the nearest point."""
    points = qam_constellation(order)
    symbols = np.asarray(symbols, dtype=complex)
    labels = np.argmin(np.abs(symbols[:, None] - points[None, :]), axis=1)
    bps = order.bit_length() - 1
    shifts = np.arange(bps - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).reshape(-1)


def awgn(signal: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of total per-sample variance sigma2."""
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2}")
    if sigma2 == 0:
        return np.asarray(signal, dtype=complex)
    signal = np.asarray(signal, dtype=complex)
    noise = rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)
    return signal + np.sqrt(sigma2 / 2.0) * noise


def snr_to_sigma2(snr_db: float) -> float:
    """Noise variance for a given symbol SNR in dB (unit signal energy)."""
    return 10.0 ** (-snr_db / 10.0)
