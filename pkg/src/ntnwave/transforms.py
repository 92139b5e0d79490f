"""Unitary matrix building blocks shared by the waveforms and the channel synthesizer.

All transforms are materialized as dense complex matrices with symmetric
1/sqrt(n) normalization, so every forward/inverse pair is exactly unitary
and noise statistics survive a change of domain unchanged.
"""

import numpy as np

__all__ = [
    "dft_matrix",
    "chirp_matrix",
    "daft_matrix",
    "otfs_tx_matrix",
    "otfs_rx_matrix",
    "circular_shift_matrix",
    "unitarity_defect",
]


def _check_dim(n: int) -> None:
    if n < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {n}")


def dft_matrix(n: int) -> np.ndarray:
    """Unitary n-point DFT matrix F with F[m, k] = exp(-2j*pi*m*k/n) / sqrt(n)."""
    _check_dim(n)
    m = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(m, m) / n) / np.sqrt(n)


def chirp_matrix(c: float, n: int) -> np.ndarray:
    """Diagonal chirp matrix diag(exp(-2j*pi*c*k^2)) for k = 0..n-1.

    Unitary for any real rate ``c``; ``c = 0`` gives the identity.
    """
    _check_dim(n)
    k = np.arange(n)
    return np.diag(np.exp(-2j * np.pi * c * k * k))


def daft_matrix(c1: float, c2: float, n: int) -> np.ndarray:
    """Discrete affine Fourier transform chirp(c1) @ F_n @ chirp(c2).

    The right-hand chirp acts on the input (time-sample) side, the left-hand
    chirp on the output side.  ``daft_matrix(0, 0, n)`` reduces to the plain
    DFT; ``c1 = c2 = 1/(2n)`` gives the discrete Fresnel transform used by
    chirp-division multiplexing.  The conjugate transpose is the inverse
    transform.
    """
    _check_dim(n)
    k = np.arange(n)
    left = np.exp(-2j * np.pi * c1 * k * k)
    right = np.exp(-2j * np.pi * c2 * k * k)
    return left[:, None] * dft_matrix(n) * right[None, :]


def _check_pulse(p: np.ndarray, k: int, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.shape != (k, k):
        raise ValueError(f"{name} must be {k}x{k}, got {p.shape}")
    return p


def otfs_tx_matrix(k: int, l: int, p_tx: np.ndarray) -> np.ndarray:
    """Delay-Doppler to time-domain transform kron(F_l^H, p_tx).

    Acts on the column-major vectorization of a k-by-l symbol grid and is
    unitary whenever the k-by-k pulse matrix ``p_tx`` is unitary.
    """
    _check_dim(k)
    _check_dim(l)
    p_tx = _check_pulse(p_tx, k, "p_tx")
    return np.kron(dft_matrix(l).conj().T, p_tx)


def otfs_rx_matrix(k: int, l: int, p_rx: np.ndarray) -> np.ndarray:
    """Time-domain to delay-Doppler transform kron(F_l, p_rx), mirror of the tx side."""
    _check_dim(k)
    _check_dim(l)
    p_rx = _check_pulse(p_rx, k, "p_rx")
    return np.kron(dft_matrix(l), p_rx)


def circular_shift_matrix(shift: int, n: int) -> np.ndarray:
    """Permutation matrix P with (P @ x)[i] = x[(i - shift) mod n].

    ``shift`` is reduced modulo n, so any integer is accepted.
    """
    _check_dim(n)
    shift = shift % n
    i = np.arange(n)
    p = np.zeros((n, n))
    p[i, (i - shift) % n] = 1.0
    return p


def unitarity_defect(m: np.ndarray) -> float:
    """Max-norm distance of m @ m^H from the identity."""
    m = np.asarray(m)
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))
