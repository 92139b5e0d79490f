"""Command-line front end: config parsing, sweep orchestration, CSV/plot output.

Configuration is a flat key=value text file whose keys mirror SimConfig
fields one-to-one; every key is also accepted as a ``--key value`` flag
(flags override the file, the file overrides a preset, the preset overrides
package defaults).  A run writes a CSV of per-point records, an optional
gnuplot-style data file, and a JSON manifest that pins everything needed to
reproduce the run.
"""

import argparse
import csv
import hashlib
import json
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, replace

from . import __version__
from .detection import DETECTOR_KINDS, LMMSE, MMSE_SD
from .montecarlo import CHANNEL_KINDS, ConfigError, SimConfig, SimContext, run_sweep
from .waveforms import AFDM, OCDM, OTFS, WAVEFORM_KINDS

__all__ = [
    "SweepRecord",
    "PRESETS",
    "parse_config",
    "parse_snr_spec",
    "emit_csv",
    "read_csv",
    "emit_plotdata",
    "format_ber",
    "main",
]

CSV_HEADER = ["waveform", "channel", "detector", "snr_db", "frames", "bits", "bit_errors", "ber", "seed"]

THREADS_ENV_VAR = "NTNWAVE_THREADS"


@dataclass(frozen=True)
class SweepRecord:
    """One CSV row: a BerRecord tagged with its combo and seed."""

    waveform: str
    channel: str
    detector: str
    snr_db: float
    frames: int
    bits: int
    bit_errors: int
    ber: float
    seed: int


# Figure-reproduction presets: channel model plus the (waveform, detector)
# combinations to sweep.  All bundle the three beyond-OFDM waveforms with
# both detectors.
_CANDIDATE_WAVEFORMS = (AFDM, OCDM, OTFS)
_ALL_COMBOS = tuple((w, d) for w in _CANDIDATE_WAVEFORMS for d in (LMMSE, MMSE_SD))
PRESETS: dict[str, dict] = {
    "fig3-tdlc": {"channel": "tdl_c", "combos": _ALL_COMBOS},
    "fig4-tdla": {"channel": "tdl_a", "combos": _ALL_COMBOS},
    "fig4-tdlb": {"channel": "tdl_b", "combos": _ALL_COMBOS},
    "fig4-tdlc": {"channel": "tdl_c", "combos": _ALL_COMBOS},
    "fig4-tdld": {"channel": "tdl_d", "combos": _ALL_COMBOS},
}

_INT_KEYS = {"order", "n", "k", "l", "guard_xi", "min_bit_errors", "max_frames", "master_seed"}
_FLOAT_KEYS = {
    "c2", "rms_delay_spread_s", "subcarrier_spacing_hz", "carrier_hz",
    "alpha_max_hz", "bulk_doppler_hz",
}
_STR_KEYS = {"waveform", "channel", "detector", "gain_mode"}
_CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | {"c1", "snr_db"}


def parse_snr_spec(text: str) -> tuple[float, ...]:
    """Expand an SNR spec: 'start:step:stop' (inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad SNR range {text!r}; expected start:step:stop")
        try:
            start, step, stop = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad SNR range {text!r}: {exc}") from None
        if step <= 0:
            raise ConfigError(f"SNR range step must be > 0, got {step}")
        count = int(round((stop - start) / step)) + 1
        points = tuple(start + i * step for i in range(count) if start + i * step <= stop + 1e-9)
        return points
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad SNR list {text!r}: {exc}") from None


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key == "snr_db":
        return parse_snr_spec(raw)
    try:
        if key == "c1":
            return None if raw.lower() in ("", "auto", "none") else float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
    return raw.lower()


def _read_kv_file(path: str) -> dict:
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def parse_config(path: str | None = None, overrides: dict | None = None) -> SimConfig:
    """Build a validated SimConfig from an optional file plus overrides."""
    values = {}
    if path is not None:
        values.update(_read_kv_file(path))
    if overrides:
        for key, value in overrides.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
    config = SimConfig(**values)
    config.validate()
    return config


def format_ber(value: float) -> str:
    """Fixed six-digit mantissa with a minimal exponent, e.g. 5.000000e-3."""
    return re.sub(r"e([+-])0*(\d)", r"e\1\2", f"{value:.6e}")


def emit_csv(records: list[SweepRecord], path: str) -> None:
    """Write one header line plus one row per record, newline terminated."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow([
                rec.waveform, rec.channel, rec.detector, repr(rec.snr_db),
                rec.frames, rec.bits, rec.bit_errors, format_ber(rec.ber), rec.seed,
            ])


def read_csv(path: str) -> list[SweepRecord]:
    """Parse a file written by :func:`emit_csv` back into records."""
    records = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header in {path}: {header}")
        for row in reader:
            records.append(SweepRecord(
                waveform=row[0], channel=row[1], detector=row[2],
                snr_db=float(row[3]), frames=int(row[4]), bits=int(row[5]),
                bit_errors=int(row[6]), ber=float(row[7]), seed=int(row[8]),
            ))
    return records


def emit_plotdata(records: list[SweepRecord], path: str) -> int:
    """Write per-curve (snr_db, ber) blocks for generic plotting tools.

    Curves are grouped by (waveform, channel, detector) in first-seen order
    and separated by blank lines.  Zero-BER rows are omitted (log-scale
    ready); the number of omitted rows is returned so callers can flag it.
    """
    curves: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        curves.setdefault((rec.waveform, rec.channel, rec.detector), []).append(rec)
    omitted = 0
    with open(path, "w") as f:
        for index, ((wf, ch, det), curve) in enumerate(curves.items()):
            if index:
                f.write("\n")
            f.write(f"# curve waveform={wf} channel={ch} detector={det}\n")
            for rec in curve:
                if rec.ber == 0.0:
                    omitted += 1
                    continue
                f.write(f"{rec.snr_db!r} {format_ber(rec.ber)}\n")
    return omitted


def _csv_row_checksum(rec: SweepRecord) -> str:
    text = ",".join([
        rec.waveform, rec.channel, rec.detector, repr(rec.snr_db),
        str(rec.frames), str(rec.bits), str(rec.bit_errors), format_ber(rec.ber), str(rec.seed),
    ])
    return hashlib.sha256(text.encode()).hexdigest()


def _write_manifest(path, base_config, combos, records, started, finished, omitted_rows, threads):
    manifest = {
        "tool": "ntnwave",
        "version": __version__,
        "master_seed": base_config.master_seed,
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in asdict(base_config).items()},
        "combos": [list(c) for c in combos],
        "threads": threads,
        "started_utc": started,
        "finished_utc": finished,
        "zero_ber_rows_omitted": omitted_rows,
        "records": [
            {"waveform": r.waveform, "channel": r.channel, "detector": r.detector,
             "snr_db": r.snr_db, "sha256": _csv_row_checksum(r)}
            for r in records
        ],
    }
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ntnwave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a BER sweep and emit CSV/plot data")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--preset", choices=sorted(PRESETS), help="figure-reproduction preset")
    run.add_argument("--out", help="output CSV path")
    run.add_argument("--plot", help="output plot-data path")
    run.add_argument("--seed", type=int, help="master seed (overrides config)")
    run.add_argument("--threads", type=int, default=None,
                     help=f"worker threads (default: ${THREADS_ENV_VAR} or 1)")
    run.add_argument("--waveform", choices=WAVEFORM_KINDS)
    run.add_argument("--channel", choices=CHANNEL_KINDS)
    run.add_argument("--detector", choices=DETECTOR_KINDS)
    run.add_argument("--snr", dest="snr_db", help="SNR points: start:step:stop or comma list")
    for key in sorted(_INT_KEYS - {"master_seed"}):
        run.add_argument(f"--{key.replace('_', '-')}", type=int, dest=key)
    for key in sorted(_FLOAT_KEYS):
        run.add_argument(f"--{key.replace('_', '-')}", type=float, dest=key)
    run.add_argument("--c1", type=str, help="AFDM time-side chirp rate or 'auto'")
    run.add_argument("--gain-mode", dest="gain_mode", choices=("pdp", "uniform"))
    return parser


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key in ("snr_db", "c1") and isinstance(value, str):
            value = _coerce(key, value)
        overrides[key] = value
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    return overrides


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"bad {THREADS_ENV_VAR} value {env!r}") from None
    return 1


def _run_command(args: argparse.Namespace) -> int:
    started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    threads = _resolve_threads(args.threads)
    preset = PRESETS.get(args.preset) if args.preset else None
    overrides = _collect_overrides(args)
    base = SimConfig()
    if preset:
        base = replace(base, channel=preset["channel"])
    file_values = _read_kv_file(args.config) if args.config else {}
    merged = {**file_values, **overrides}
    base = replace(base, **merged)
    base.validate()
    combos = preset["combos"] if preset else ((base.waveform, base.detector),)

    records: list[SweepRecord] = []
    total_points = len(combos) * len(base.snr_db)
    done = 0
    for wf, det in combos:
        config = replace(base, waveform=wf, detector=det)
        config.validate()
        ctx = SimContext(config)
        if ctx.chirp_rates is not None and not ctx.chirp_rates.orthogonality_ok:
            print(f"warning: chirp grid too small for the configured delay/Doppler spread "
                  f"(waveform={wf})", file=sys.stderr)

        def progress(index, record):
            nonlocal done
            done += 1
            print(f"point {done}/{total_points} snr={record.snr_db:g}dB "
                  f"ber={format_ber(record.ber)}", file=sys.stderr)

        for rec in run_sweep(config, threads=threads, progress=progress):
            records.append(SweepRecord(
                waveform=wf, channel=config.channel, detector=det,
                snr_db=rec.snr_db, frames=rec.frames, bits=rec.bits,
                bit_errors=rec.bit_errors, ber=rec.ber, seed=config.master_seed,
            ))

    omitted = 0
    if args.plot:
        omitted = emit_plotdata(records, args.plot)
    if args.out:
        emit_csv(records, args.out)
        finished = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        _write_manifest(args.out + ".manifest.json", base, combos, records,
                        started, finished, omitted, threads)
    if done != total_points:
        print(f"error: completed {done} of {total_points} points", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _run_command(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
