"""Doubly dispersive LTV channel generation from NTN tapped-delay-line profiles.

The four LEO satellite TDL profiles (TDL-A/B NLOS, TDL-C/D LOS) are embedded
as static tables of normalized delay, power and fading kind per sub-tap.
A realization draws one complex gain, integer delay tap and Doppler shift
per sub-tap; the time-domain channel matrix applies each path as a circular
delay plus a per-sample Doppler phase ramp.
"""

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "RAYLEIGH",
    "LOS",
    "GAIN_PDP_NORMALIZED",
    "GAIN_UNIFORM_INVERSE_PATHS",
    "TDL_MODELS",
    "TdlTap",
    "TdlProfile",
    "DopplerConfig",
    "SatelliteGeometry",
    "PropagationPath",
    "ChannelRealization",
    "builtin_profile",
    "scale_delays",
    "satellite_doppler",
    "jakes_doppler",
    "sample_realization",
    "channel_matrix",
    "export_profiles",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

RAYLEIGH = "rayleigh"
LOS = "los"

GAIN_PDP_NORMALIZED = "pdp"
GAIN_UNIFORM_INVERSE_PATHS = "uniform"
_GAIN_MODES = (GAIN_PDP_NORMALIZED, GAIN_UNIFORM_INVERSE_PATHS)


@dataclass(frozen=True)
class TdlTap:
    """One sub-tap: delay normalized to the RMS delay spread, power in dB."""

    normalized_delay: float
    power_db: float
    fading: str
    k_factor_db: float | None = None


@dataclass(frozen=True)
class TdlProfile:
    model: str
    taps: tuple[TdlTap, ...]


# LEO satellite power delay profiles.  LOS sub-taps carry the Rician K-factor
# relative to the co-located diffuse sub-tap.
_PROFILE_TABLE: dict[str, tuple[TdlTap, ...]] = {
    "tdl_a": (
        TdlTap(0.0, 0.0, RAYLEIGH),
        TdlTap(1.0811, -4.675, RAYLEIGH),
        TdlTap(2.8416, -6.482, RAYLEIGH),
    ),
    "tdl_b": (
        TdlTap(0.0, 0.0, RAYLEIGH),
        TdlTap(0.7249, -1.973, RAYLEIGH),
        TdlTap(0.7410, -4.332, RAYLEIGH),
        TdlTap(5.7392, -11.914, RAYLEIGH),
    ),
    "tdl_c": (
        TdlTap(0.0, -0.394, LOS, 10.224),
        TdlTap(0.0, -10.618, RAYLEIGH),
        TdlTap(14.8124, -23.373, RAYLEIGH),
    ),
    "tdl_d": (
        TdlTap(0.0, -0.284, LOS, 11.707),
        TdlTap(0.0, -11.991, RAYLEIGH),
        TdlTap(0.5596, -9.887, RAYLEIGH),
        TdlTap(7.3340, -16.771, RAYLEIGH),
    ),
}

TDL_MODELS = tuple(_PROFILE_TABLE)


def builtin_profile(model: str) -> TdlProfile:
    """Return the built-in profile for ``model`` (one of ``TDL_MODELS``)."""
    key = model.lower().replace("-", "_")
    if key not in _PROFILE_TABLE:
        raise ValueError(f"unknown TDL model {model!r}; expected one of {TDL_MODELS}")
    return TdlProfile(model=key, taps=_PROFILE_TABLE[key])


@dataclass(frozen=True)
class DopplerConfig:
    """Jakes spread plus an optional deterministic bulk shift, both in Hz."""

    alpha_max_hz: float = 0.0
    bulk_doppler_hz: float = 0.0


@dataclass(frozen=True)
class SatelliteGeometry:
    """LEO link geometry used to evaluate the bulk satellite Doppler shift."""

    v_sat_ms: float
    altitude_m: float
    elevation_deg: float
    carrier_hz: float
    earth_radius_m: float = 6_371_000.0

    def __post_init__(self) -> None:
        if min(self.v_sat_ms, self.altitude_m, self.carrier_hz, self.earth_radius_m) < 0:
            raise ValueError("geometry parameters must be non-negative")
        if not 0.0 < self.elevation_deg <= 90.0:
            raise ValueError(f"elevation must be in (0, 90] degrees, got {self.elevation_deg}")


@dataclass(frozen=True)
class PropagationPath:
    gain: complex
    delay_tap: int
    doppler_hz: float


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[PropagationPath, ...]
    n: int
    sample_period_s: float


def scale_delays(profile: TdlProfile, rms_ds_s: float, sample_period_s: float) -> list[int]:
    """Integer delay taps: round(normalized_delay * rms_ds / sample_period) per sub-tap."""
    if rms_ds_s <= 0:
        raise ValueError(f"RMS delay spread must be > 0, got {rms_ds_s}")
    if sample_period_s <= 0:
        raise ValueError(f"sample period must be > 0, got {sample_period_s}")
    return [int(round(t.normalized_delay * rms_ds_s / sample_period_s)) for t in profile.taps]


def satellite_doppler(geom: SatelliteGeometry) -> float:
    """Bulk Doppler shift (v/c) * (R/(R+h)) * cos(elevation) * f_c in Hz."""
    r = geom.earth_radius_m
    return (
        (geom.v_sat_ms / SPEED_OF_LIGHT)
        * (r / (r + geom.altitude_m))
        * np.cos(np.deg2rad(geom.elevation_deg))
        * geom.carrier_hz
    )


def jakes_doppler(alpha_max_hz: float, theta: float) -> float:
    """Per-path Doppler alpha_max * cos(theta); theta is drawn by the caller."""
    return alpha_max_hz * float(np.cos(theta))


def _linear_powers(profile: TdlProfile, gain_mode: str) -> np.ndarray:
    power_lin = np.array([10.0 ** (t.power_db / 10.0) for t in profile.taps])
    if gain_mode == GAIN_PDP_NORMALIZED:
        return power_lin / power_lin.sum()
    if gain_mode == GAIN_UNIFORM_INVERSE_PATHS:
        return np.full(len(profile.taps), 1.0 / len(profile.taps))
    raise ValueError(f"unknown gain mode {gain_mode!r}; expected one of {_GAIN_MODES}")


def sample_realization(
    profile: TdlProfile,
    delay_taps: list[int],
    doppler: DopplerConfig,
    n: int,
    sample_period_s: float,
    gain_mode: str = GAIN_PDP_NORMALIZED,
    rng: np.random.Generator | None = None,
) -> ChannelRealization:
    """Draw one quasi-static channel realization.

    Rayleigh sub-taps get a CN(0, p) gain and a Jakes Doppler
    bulk + alpha_max*cos(theta) with independent theta ~ U[-pi, pi]; the LOS
    sub-tap gets a deterministic amplitude sqrt(p) with uniform random phase
    and the bulk Doppler only.  Sub-tap powers p follow the profile PDP
    normalized to unit total power in ``"pdp"`` mode, or 1/num_paths in
    ``"uniform"`` mode.

    Draw order is fixed (per sub-tap in profile order) so that a seeded
    generator reproduces the realization exactly.
    """
    if not profile.taps:
        raise ValueError("profile has no taps")
    if len(delay_taps) != len(profile.taps):
        raise ValueError("delay_taps length must match the profile")
    if max(delay_taps) >= n:
        raise ValueError(
            f"delay exceeds frame: tap {max(delay_taps)} >= n = {n}; "
            "increase n or reduce the RMS delay spread"
        )
    if rng is None:
        rng = np.random.default_rng()
    powers = _linear_powers(profile, gain_mode)
    paths = []
    for tap, ltap, p in zip(profile.taps, delay_taps, powers):
        if tap.fading == LOS:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            gain = np.sqrt(p) * np.exp(1j * phase)
            nu = doppler.bulk_doppler_hz
        else:
            gain = np.sqrt(p / 2.0) * complex(rng.standard_normal(), rng.standard_normal())
            theta = rng.uniform(-np.pi, np.pi)
            nu = doppler.bulk_doppler_hz + jakes_doppler(doppler.alpha_max_hz, theta)
        paths.append(PropagationPath(gain=complex(gain), delay_tap=int(ltap), doppler_hz=float(nu)))
    return ChannelRealization(paths=tuple(paths), n=n, sample_period_s=sample_period_s)


def channel_matrix(realization: ChannelRealization) -> np.ndarray:
    """Dense n-by-n time-domain channel matrix.

    Each path contributes gain * D(nu) * P^delay where D(nu) is the diagonal
    Doppler phase ramp exp(-2j*pi*nu*i*Ts) over sample index i and P the
    circular shift, i.e. H[i, (i - delay) mod n] += gain * ramp[i].
    """
    n = realization.n
    ts = realization.sample_period_s
    h = np.zeros((n, n), dtype=complex)
    i = np.arange(n)
    for path in realization.paths:
        if not 0 <= path.delay_tap < n:
            raise ValueError(f"delay tap {path.delay_tap} out of range for n = {n}")
        ramp = np.exp(-2j * np.pi * path.doppler_hz * i * ts)
        h[i, (i - path.delay_tap) % n] += path.gain * ramp
    return h


def export_profiles(path: str) -> None:
    """Write every built-in profile as CSV, one record per sub-tap."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["model", "tap", "normalized_delay", "power_db", "fading", "k_factor_db"])
        for model in TDL_MODELS:
            for idx, tap in enumerate(_PROFILE_TABLE[model]):
                k = "" if tap.k_factor_db is None else repr(tap.k_factor_db)
                writer.writerow([model, idx, repr(tap.normalized_delay), repr(tap.power_db), tap.fading, k])
