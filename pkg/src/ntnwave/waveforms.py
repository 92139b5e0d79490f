"""Modulate/demodulate and effective-channel construction for OFDM, AFDM, OCDM, OTFS.

A :class:`WaveformSpec` precomputes the (unitary) demodulation transform T
and its inverse once; modulation is s = T^H x, demodulation is y = T r, and
the channel seen in the symbol domain is H_eff = T H T^H.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import transforms

__all__ = [
    "OFDM",
    "AFDM",
    "OCDM",
    "OTFS",
    "WAVEFORM_KINDS",
    "ChirpRates",
    "afdm_chirp_rates",
    "WaveformSpec",
    "modulate",
    "demodulate",
    "effective_channel",
]

OFDM = "ofdm"
AFDM = "afdm"
OCDM = "ocdm"
OTFS = "otfs"
WAVEFORM_KINDS = (OFDM, AFDM, OCDM, OTFS)

_UNITARY_TOL = 1e-10


class ChirpRates(NamedTuple):
    c1: float
    c2: float
    orthogonality_ok: bool


def afdm_chirp_rates(f_max: int, xi: int, l_max: int, n: int) -> ChirpRates:
    """Chirp rates that keep delay-Doppler paths separable on the chirp grid.

    ``f_max`` is the maximum Doppler in grid units (subcarrier spacings,
    rounded up), ``xi`` the number of extra guard bins, ``l_max`` the largest
    delay tap.  The primary rate is c1 = (2*(f_max + xi) + 1) / (2n); the
    secondary rate only needs to be much smaller than 1/n and defaults to 0.
    ``orthogonality_ok`` reports whether the grid is large enough for the
    requested spread, i.e. 2*(f_max + xi)*(l_max + 1) + l_max <= n; a False
    value is a warning state (paths may alias), not an error.
    """
    if n < 1:
        raise ValueError(f"frame length must be >= 1, got {n}")
    if f_max < 0 or xi < 0 or l_max < 0:
        raise ValueError("f_max, xi and l_max must be non-negative")
    c1 = (2 * (f_max + xi) + 1) / (2 * n)
    ok = 2 * (f_max + xi) * (l_max + 1) + l_max <= n
    return ChirpRates(c1=c1, c2=0.0, orthogonality_ok=ok)


@dataclass
class WaveformSpec:
    """Frame dimensions and transform parameters for one waveform.

    For AFDM, ``c1`` is the chirp rate applied to the time-domain samples
    (the rate constrained by the delay-Doppler geometry) and ``c2`` the
    residual rate applied on the symbol side.  OFDM pins c1 = c2 = 0 and
    OCDM pins c1 = c2 = 1/(2n); both are enforced at construction.  OTFS
    requires n = k*l and unitary k-by-k pulse matrices (identity when not
    given, i.e. rectangular pulses).
    """

    kind: str
    n: int
    k: int = 0
    l: int = 0
    c1: float = 0.0
    c2: float = 0.0
    pulse_tx: np.ndarray | None = None
    pulse_rx: np.ndarray | None = None
    demod_matrix: np.ndarray = field(init=False, repr=False)
    mod_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in WAVEFORM_KINDS:
            raise ValueError(f"unknown waveform kind {self.kind!r}")
        if self.n < 1:
            raise ValueError(f"frame length must be >= 1, got {self.n}")
        if self.kind == OFDM and (self.c1 != 0.0 or self.c2 != 0.0):
            raise ValueError("OFDM requires c1 = c2 = 0")
        if self.kind == OCDM:
            c = 1.0 / (2 * self.n)
            if not (math.isclose(self.c1, c) and math.isclose(self.c2, c)):
                raise ValueError(f"OCDM requires c1 = c2 = 1/(2n) = {c}")
        if self.kind == OTFS:
            if self.k * self.l != self.n:
                raise ValueError(f"OTFS requires n = k*l, got n={self.n}, k={self.k}, l={self.l}")
            if self.pulse_tx is None:
                self.pulse_tx = np.eye(self.k, dtype=complex)
            if self.pulse_rx is None:
                self.pulse_rx = np.eye(self.k, dtype=complex)
            for name, p in (("pulse_tx", self.pulse_tx), ("pulse_rx", self.pulse_rx)):
                if transforms.unitarity_defect(np.asarray(p, dtype=complex)) > _UNITARY_TOL:
                    raise ValueError(f"{name} must be unitary")
            self.mod_matrix = transforms.otfs_tx_matrix(self.k, self.l, self.pulse_tx)
            self.demod_matrix = transforms.otfs_rx_matrix(self.k, self.l, self.pulse_rx)
        else:
            # the chirp next to the time samples carries c1
            self.demod_matrix = transforms.daft_matrix(self.c2, self.c1, self.n)
            self.mod_matrix = self.demod_matrix.conj().T

    @classmethod
    def ofdm(cls, n: int) -> "WaveformSpec":
        return cls(kind=OFDM, n=n)

    @classmethod
    def afdm(cls, n: int, c1: float, c2: float = 0.0) -> "WaveformSpec":
        return cls(kind=AFDM, n=n, c1=c1, c2=c2)

    @classmethod
    def ocdm(cls, n: int) -> "WaveformSpec":
        c = 1.0 / (2 * n)
        return cls(kind=OCDM, n=n, c1=c, c2=c)

    @classmethod
    def otfs(
        cls,
        k: int,
        l: int,
        pulse_tx: np.ndarray | None = None,
        pulse_rx: np.ndarray | None = None,
    ) -> "WaveformSpec":
        return cls(kind=OTFS, n=k * l, k=k, l=l, pulse_tx=pulse_tx, pulse_rx=pulse_rx)


def _check_length(spec: WaveformSpec, v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (spec.n,):
        raise ValueError(f"{what} must have shape ({spec.n},), got {v.shape}")
    return v


def modulate(spec: WaveformSpec, frame: np.ndarray) -> np.ndarray:
    """Map a length-n symbol frame to time-domain samples (energy preserving).

    For OTFS the frame is the column-major vectorization of the k-by-l
    delay-Doppler grid.
    """
    frame = _check_length(spec, frame, "symbol frame")
    return spec.mod_matrix @ frame


def demodulate(spec: WaveformSpec, received: np.ndarray) -> np.ndarray:
    """Map received time-domain samples back to the symbol domain."""
    received = _check_length(spec, received, "received vector")
    return spec.demod_matrix @ received


def effective_channel(spec: WaveformSpec, h: np.ndarray) -> np.ndarray:
    """Symbol-domain channel T @ h @ T^H for a time-domain channel matrix h.

    Consistent with the modulate/demodulate pair: for any frame x,
    ``effective_channel(spec, h) @ x == demodulate(spec, h @ modulate(spec, x))``.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (spec.n, spec.n):
        raise ValueError(f"channel matrix must be {spec.n}x{spec.n}, got {h.shape}")
    return spec.demod_matrix @ h @ spec.mod_matrix
