"""Engine configuration: defaults, shipped presets, and JSON file loading.

The config file is a single JSON object.  Every key is optional; anything
omitted falls back to the built-in defaults below.  Unknown keys warn but do
not fail, so configs stay forward-compatible.  Schema:

    {
      "sample_rate": 44100,
      "block_size": 256,
      "scales": [{"id": 0, "name": "major", "intervals": [0,2,4,5,7,9,11]}],
      "presets": {"warm_keys": {"oscillators": [["saw", -6], ["saw", 6]],
                                "attack_s": 0.004, "cutoff_hz": 2600, ...}},
      "instruments": {"touch": {"preset": "warm_keys"}, ...},
      "sync": {"role": "off", "port": 9000,
               "broadcast_addr": "255.255.255.255", "keepalive_ms": 1000},
      "transports": {"sensor_udp_port": 9100, "ws_port": 8765}
    }

Path resolution for loaders: explicit path argument, else the ENGINE_CONFIG
environment variable, else pure defaults.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field, fields, replace

from .core import BUILTIN_SCALES, Scale, ScaleTable
from .dsp.oscillators import SHAPES
from .dsp.synth import SynthPatch

ENV_VAR = "ENGINE_CONFIG"

SYNC_ROLES = ("off", "master", "client")


class ConfigError(ValueError):
    """Configuration file failed validation; the message names the key."""


# Shipped presets. The design brief asks only for a "diverse set of possible
# timbres", so these six are editable starting points, not canon.
DEFAULT_PRESETS: dict[str, SynthPatch] = {
    p.name: p for p in (
        SynthPatch("warm_keys", oscillators=(("saw", -6.0), ("saw", 6.0)),
                   attack_s=0.004, decay_s=0.09, sustain=0.7, release_s=0.3,
                   cutoff_hz=2600.0, resonance=0.15, reverb_send=0.12,
                   gain=0.25),
        SynthPatch("glass_pad", oscillators=(("square", 0.0), ("saw", 5.0)),
                   attack_s=0.12, decay_s=0.2, sustain=0.8, release_s=0.8,
                   cutoff_hz=1800.0, resonance=0.1, reverb_send=0.35,
                   gain=0.22),
        SynthPatch("harp_pluck", oscillators=(("triangle", 0.0),),
                   attack_s=0.002, decay_s=0.3, sustain=0.25, release_s=0.4,
                   cutoff_hz=4200.0, resonance=0.1, pluck_layer=True,
                   reverb_send=0.25, gain=0.28),
        SynthPatch("glide_lead", oscillators=(("saw", 0.0),),
                   attack_s=0.01, decay_s=0.05, sustain=0.9, release_s=0.15,
                   cutoff_hz=2200.0, resonance=0.3, reverb_send=0.18,
                   gain=0.3),
        SynthPatch("sub_bass", oscillators=(("sine", 0.0), ("triangle", 0.0)),
                   attack_s=0.003, decay_s=0.12, sustain=0.8, release_s=0.2,
                   cutoff_hz=900.0, resonance=0.1, reverb_send=0.05,
                   gain=0.35),
        SynthPatch("bright_comp", oscillators=(("square", -4.0), ("square", 4.0)),
                   attack_s=0.002, decay_s=0.06, sustain=0.5, release_s=0.12,
                   cutoff_hz=5200.0, resonance=0.25, reverb_send=0.08,
                   gain=0.24),
    )
}

DEFAULT_INSTRUMENTS: dict[str, dict] = {
    "touch": {"preset": "warm_keys"},
    "head": {"preset": "glass_pad"},
    "harp": {"preset": "harp_pluck"},
    "hand": {"preset": "glide_lead"},
    "drums": {"wet": True},
}


@dataclass(frozen=True)
class SyncSettings:
    role: str = "off"
    port: int = 9000
    broadcast_addr: str = "255.255.255.255"
    keepalive_ms: int = 1000


@dataclass(frozen=True)
class TransportSettings:
    sensor_udp_port: int = 9100
    ws_port: int = 8765


@dataclass(frozen=True)
class EngineConfig:
    sample_rate: int = 44100
    block_size: int = 256
    scales: ScaleTable = field(default_factory=lambda: ScaleTable(BUILTIN_SCALES))
    presets: dict = field(default_factory=lambda: dict(DEFAULT_PRESETS))
    preset_order: tuple = tuple(DEFAULT_PRESETS)
    instruments: dict = field(default_factory=lambda: {
        k: dict(v) for k, v in DEFAULT_INSTRUMENTS.items()})
    sync: SyncSettings = SyncSettings()
    transports: TransportSettings = TransportSettings()

    def preset(self, name: str) -> SynthPatch:
        try:
            return self.presets[name]
        except KeyError:
            raise ConfigError(f"unknown preset {name!r}") from None

    def instrument_preset_name(self, instrument: str) -> str:
        return self.instruments.get(instrument, {}).get(
            "preset", next(iter(self.preset_order)))


def default_config() -> EngineConfig:
    return EngineConfig()


def _expect(cond: bool, key: str, detail: str) -> None:
    if not cond:
        raise ConfigError(f"config key {key!r}: {detail}")


def _parse_scales(items, key: str) -> ScaleTable:
    _expect(isinstance(items, list) and items, key, "must be a non-empty list")
    scales = []
    for i, entry in enumerate(items):
        where = f"{key}[{i}]"
        _expect(isinstance(entry, dict), where, "must be an object")
        for want in ("id", "name", "intervals"):
            _expect(want in entry, where, f"missing {want!r}")
        try:
            scales.append(Scale(int(entry["id"]), str(entry["name"]),
                                tuple(int(v) for v in entry["intervals"])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key {where!r}: {exc}") from exc
    try:
        return ScaleTable(scales)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def _parse_preset(name: str, body, key: str) -> SynthPatch:
    _expect(isinstance(body, dict), key, "must be an object")
    known = {f.name for f in fields(SynthPatch)} - {"name"}
    kwargs = {}
    for k, v in body.items():
        if k not in known:
            warnings.warn(f"ignoring unknown key {key}.{k}")
            continue
        kwargs[k] = v
    if "oscillators" in kwargs:
        oscs = kwargs["oscillators"]
        _expect(isinstance(oscs, list) and oscs, f"{key}.oscillators",
                "must be a non-empty list of [shape, detune_cents] pairs")
        parsed = []
        for pair in oscs:
            _expect(isinstance(pair, (list, tuple)) and len(pair) == 2
                    and pair[0] in SHAPES,
                    f"{key}.oscillators", f"bad oscillator {pair!r}")
            parsed.append((str(pair[0]), float(pair[1])))
        kwargs["oscillators"] = tuple(parsed)
    for k in ("attack_s", "decay_s", "sustain", "release_s", "cutoff_hz",
              "resonance", "reverb_send", "gain"):
        if k in kwargs:
            _expect(isinstance(kwargs[k], (int, float)), f"{key}.{k}",
                    "must be a number")
            kwargs[k] = float(kwargs[k])
    if "pluck_layer" in kwargs:
        _expect(isinstance(kwargs["pluck_layer"], bool), f"{key}.pluck_layer",
                "must be a boolean")
    try:
        return SynthPatch(name, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def _parse_sync(body, base: SyncSettings) -> SyncSettings:
    _expect(isinstance(body, dict), "sync", "must be an object")
    out = base
    for k, v in body.items():
        if k == "role":
            _expect(v in SYNC_ROLES, "sync.role", f"must be one of {SYNC_ROLES}")
            out = replace(out, role=v)
        elif k == "port":
            _expect(isinstance(v, int) and 1 <= v <= 65535, "sync.port",
                    "must be a port number")
            out = replace(out, port=v)
        elif k == "broadcast_addr":
            _expect(isinstance(v, str) and v, "sync.broadcast_addr",
                    "must be a host string")
            out = replace(out, broadcast_addr=v)
        elif k == "keepalive_ms":
            _expect(isinstance(v, int) and v > 0, "sync.keepalive_ms",
                    "must be a positive integer")
            out = replace(out, keepalive_ms=v)
        else:
            warnings.warn(f"ignoring unknown key sync.{k}")
    return out


def _parse_transports(body, base: TransportSettings) -> TransportSettings:
    _expect(isinstance(body, dict), "transports", "must be an object")
    out = base
    for k, v in body.items():
        if k in ("sensor_udp_port", "ws_port"):
            _expect(isinstance(v, int) and 0 <= v <= 65535, f"transports.{k}",
                    "must be a port number")
            out = replace(out, **{k: v})
        else:
            warnings.warn(f"ignoring unknown key transports.{k}")
    return out


def parse_config(data: dict) -> EngineConfig:
    """Validate a decoded JSON object into an EngineConfig."""
    _expect(isinstance(data, dict), "<root>", "config must be a JSON object")
    cfg = default_config()
    updates: dict = {}
    for k, v in data.items():
        if k == "sample_rate":
            _expect(isinstance(v, int) and 8000 <= v <= 192000, k,
                    "must be an integer sample rate in 8000..192000")
            updates[k] = v
        elif k == "block_size":
            _expect(isinstance(v, int) and 16 <= v <= 8192, k,
                    "must be an integer in 16..8192")
            updates[k] = v
        elif k == "scales":
            updates[k] = _parse_scales(v, k)
        elif k == "presets":
            _expect(isinstance(v, dict) and v, k, "must be a non-empty object")
            presets = {name: _parse_preset(name, body, f"presets.{name}")
                       for name, body in v.items()}
            updates["presets"] = presets
            updates["preset_order"] = tuple(presets)
        elif k == "instruments":
            _expect(isinstance(v, dict), k, "must be an object")
            merged = {ik: dict(iv) for ik, iv in cfg.instruments.items()}
            for inst, params in v.items():
                _expect(isinstance(params, dict), f"instruments.{inst}",
                        "must be an object")
                merged.setdefault(inst, {}).update(params)
            updates["instruments"] = merged
        elif k == "sync":
            updates["sync"] = _parse_sync(v, cfg.sync)
        elif k == "transports":
            updates["transports"] = _parse_transports(v, cfg.transports)
        else:
            warnings.warn(f"ignoring unknown config key {k!r}")
    cfg = replace(cfg, **updates)
    # presets referenced by instruments must exist
    for inst, params in cfg.instruments.items():
        name = params.get("preset")
        if name is not None and name not in cfg.presets:
            raise ConfigError(
                f"config key 'instruments.{inst}.preset': unknown preset {name!r}")
    return cfg


def load_config(path: str | None = None) -> EngineConfig:
    """Load a config file; falls back to ENGINE_CONFIG, then to defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return default_config()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return parse_config(data)
