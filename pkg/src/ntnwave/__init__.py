"""Waveform-level BER simulation of OFDM/AFDM/OCDM/OTFS over NTN LEO TDL channels."""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    DopplerConfig,
    SatelliteGeometry,
    TdlProfile,
    builtin_profile,
    channel_matrix,
    jakes_doppler,
    sample_realization,
    satellite_doppler,
    scale_delays,
)
from .detection import (
    DetectionResult,
    DetectorConfig,
    detect,
    detect_lmmse,
    detect_mmse_sd,
    lmmse_weights,
    sinr_per_symbol,
    slice_symbols,
)
from .modem import awgn, qam_constellation, qam_demap, qam_map, snr_to_sigma2
from .montecarlo import BerRecord, ConfigError, SimConfig, run_frame, run_sweep
from .waveforms import (
    WaveformSpec,
    afdm_chirp_rates,
    demodulate,
    effective_channel,
    modulate,
)

__all__ = [
    "__version__",
    "ChannelRealization",
    "DopplerConfig",
    "SatelliteGeometry",
    "TdlProfile",
    "builtin_profile",
    "channel_matrix",
    "jakes_doppler",
    "sample_realization",
    "satellite_doppler",
    "scale_delays",
    "DetectionResult",
    "DetectorConfig",
    "detect",
    "detect_lmmse",
    "detect_mmse_sd",
    "lmmse_weights",
    "sinr_per_symbol",
    "slice_symbols",
    "awgn",
    "qam_constellation",
    "qam_demap",
    "qam_map",
    "snr_to_sigma2",
    "BerRecord",
    "ConfigError",
    "SimConfig",
    "run_frame",
    "run_sweep",
    "WaveformSpec",
    "afdm_chirp_rates",
    "demodulate",
    "effective_channel",
    "modulate",
]
