"""Plain-text run configuration.

One ``section.key = value`` assignment per line; ``#`` starts a comment.
Key suffixes name the interface unit (``_nm``, ``_pm``, ``_um``,
``_db_per_cm``). A value may repeat its unit after the number
(``radius_um = 25 um``); a different unit is rejected rather than
converted. Every default that gets applied is recorded in
``RunConfig.provenance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .devices import (
    AwgSpec,
    DeviceSpec,
    FabryPerotSpec,
    GratingSpec,
    MicroringSpec,
    WavelengthGrid,
    alpha_from_db_per_cm,
)
from .errors import ConfigError, DomainError

COMMANDS = ("simulate", "analyze", "fit", "audit", "sweep")
DEVICE_TYPES = ("microring", "fabry_perot", "grating", "awg")
# interface units per metre; dividing by these rounds correctly
PER_UM, PER_NM, PER_PM = 1e6, 1e9, 1e12

_UNIT_ALIASES = {
    "um": "um", "µm": "um", "μm": "um", "micron": "um",
    "nm": "nm", "pm": "pm",
    "db/cm": "db_per_cm", "db_per_cm": "db_per_cm",
}
_SUFFIX_UNITS = {"_um": "um", "_nm": "nm", "_pm": "pm", "_db_per_cm": "db_per_cm"}

# key -> (kind, default); a default of REQUIRED is resolved per command/device
REQUIRED = object()
OPTIONAL = None

SCHEMA: Dict[str, Tuple[str, object]] = {
    "command": ("choice:" + "|".join(COMMANDS), OPTIONAL),
    "device.type": ("choice:" + "|".join(DEVICE_TYPES), REQUIRED),
    # microring
    "device.radius_um": ("float", OPTIONAL),
    "device.n_eff": ("float", OPTIONAL),
    "device.kappa": ("float", OPTIONAL),
    "device.kappa1": ("float", OPTIONAL),
    "device.kappa2": ("float", OPTIONAL),
    "device.alpha_db_per_cm": ("float", 0.0),
    "device.margin_um": ("float", 2.5),
    # fabry-perot
    "device.n": ("float", OPTIONAL),
    "device.length_um": ("float", OPTIONAL),
    "device.mirror_reflectance": ("float", OPTIONAL),
    "device.aperture_um": ("float", 100.0),
    # grating / awg
    "device.order": ("int", OPTIONAL),
    "device.lines": ("int", OPTIONAL),
    "device.arms": ("int", OPTIONAL),
    "device.delta_l_um": ("float", OPTIONAL),
    "device.pitch_um": ("float", OPTIONAL),
    # wavelength grid
    "grid.start_nm": ("float", OPTIONAL),
    "grid.stop_nm": ("float", OPTIONAL),
    "grid.step_pm": ("float", 0.5),
    # simulation
    "simulate.port": ("choice:through|drop", "through"),
    "simulate.noise_sigma": ("float", 0.0),
    "input.spectrum": ("str", OPTIONAL),
    # analysis
    "analysis.prominence": ("float", 0.1),
    "analysis.refine": ("bool", True),
    "analysis.window_fwhm": ("float", 1.5),
    # fitting
    "fit.free": ("list", "kappa, alpha, n_eff"),
    "fit.max_iter": ("int", 500),
    "fit.init.kappa": ("float", OPTIONAL),
    "fit.init.kappa1": ("float", OPTIONAL),
    "fit.init.kappa2": ("float", OPTIONAL),
    "fit.init.alpha_db_per_cm": ("float", OPTIONAL),
    "fit.init.n_eff": ("float", OPTIONAL),
    "fit.init.radius_um": ("float", OPTIONAL),
    "fit.bounds.kappa": ("pair", OPTIONAL),
    "fit.bounds.kappa1": ("pair", OPTIONAL),
    "fit.bounds.kappa2": ("pair", OPTIONAL),
    "fit.bounds.alpha_db_per_cm": ("pair", OPTIONAL),
    "fit.bounds.n_eff": ("pair", OPTIONAL),
    "fit.bounds.radius_um": ("pair", OPTIONAL),
    # audit
    "audit.wavelength_nm": ("float", OPTIONAL),
    "audit.linewidth_pm": ("float", OPTIONAL),
    "audit.finesse": ("float", OPTIONAL),
    # sweep
    "sweep.parameter": ("str", OPTIONAL),
    "sweep.start": ("float", OPTIONAL),
    "sweep.stop": ("float", OPTIONAL),
    "sweep.points": ("int", 10),
    # output
    "output.format": ("choice:text|structured", "text"),
}

SWEEPABLE = {
    "microring": ("radius_um", "n_eff", "kappa", "kappa1", "kappa2", "alpha_db_per_cm"),
    "fabry_perot": ("n", "length_um", "mirror_reflectance"),
}
DEVICE_REQUIRED = {
    "microring": ("device.radius_um", "device.n_eff"),
    "fabry_perot": ("device.n", "device.length_um", "device.mirror_reflectance"),
    "grating": ("device.order", "device.lines"),
    "awg": ("device.arms", "device.delta_l_um", "device.n_eff"),
}
DEVICE_KEYS = {
    "microring": ("radius_um", "n_eff", "kappa", "kappa1", "kappa2", "alpha_db_per_cm", "margin_um"),
    "fabry_perot": ("n", "length_um", "mirror_reflectance", "aperture_um"),
    "grating": ("order", "lines", "pitch_um", "length_um"),
    "awg": ("arms", "delta_l_um", "n_eff", "pitch_um", "length_um"),
}


@dataclass
class RunConfig:
    command: str
    device_type: str
    values: Dict[str, object]
    lines: Dict[str, int]
    provenance: List[str] = field(default_factory=list)

    def get(self, key: str):
        return self.values.get(key)

    @property
    def device(self) -> DeviceSpec:
        return build_device(self.device_type, self.values)

    @property
    def grid(self) -> Optional[WavelengthGrid]:
        start, stop = self.get("grid.start_nm"), self.get("grid.stop_nm")
        if start is None or stop is None:
            return None
        return WavelengthGrid.from_step(start / PER_NM, stop / PER_NM, self.get("grid.step_pm") / PER_PM)

    @property
    def format(self) -> str:
        return self.get("output.format")

    def explicit_text(self) -> str:
        """The configuration with every default written out."""
        out = []
        for key in SCHEMA:
            value = self.values.get(key)
            if value is None:
                continue
            out.append(f"{key} = {_render(value)}")
        return "\n".join(out) + "\n"


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_render(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _key_unit(key: str) -> Optional[str]:
    for suffix, unit in _SUFFIX_UNITS.items():
        if key.endswith(suffix):
            return unit
    return None


def _split_unit(key: str, raw: str, line: int) -> str:
    """Strip and check a trailing unit token; return the bare value text."""
    parts = raw.rsplit(None, 1)
    expected = _key_unit(key)
    if len(parts) == 2:
        token = parts[1].strip().lower()
        unit = _UNIT_ALIASES.get(token)
        if unit is not None:
            if unit != expected:
                want = expected or "no unit"
                raise ConfigError(f"unit mismatch: got '{parts[1]}', key expects {want}", key, line)
            return parts[0]
    return raw


def _convert(key: str, kind: str, raw: str, line: int):
    text = raw.strip()
    try:
        if kind == "float":
            value = float(_split_unit(key, text, line))
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == "int":
            return int(_split_unit(key, text, line))
        if kind == "bool":
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
        if kind == "list":
            return tuple(p.strip() for p in text.split(",") if p.strip())
        if kind == "pair":
            parts = [float(_split_unit(key, p.strip(), line)) for p in text.split(",")]
            if len(parts) != 2:
                raise ValueError
            return (parts[0], parts[1])
        if kind.startswith("choice:"):
            options = kind.split(":", 1)[1].split("|")
            if text not in options:
                raise ConfigError(f"expected one of {', '.join(options)}, got '{text}'", key, line)
            return text
        return text
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"cannot read '{text}' as {kind}", key, line) from None


def _tokenize(text: str):
    seen: Dict[str, int] = {}
    entries = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=number)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key", key, number)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", key, number)
        seen[key] = number
        entries.append((key, value, number))
    return entries


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """Parse and validate a configuration document.

    ``command`` overrides the document's ``command`` key (the CLI passes
    its subcommand here).
    """
    values: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    for key, raw, number in _tokenize(text):
        values[key] = _convert(key, SCHEMA[key][0], raw, number)
        lines[key] = number
    _check_ranges(values, lines)

    if command is not None:
        if command not in COMMANDS:
            raise ConfigError(f"unknown command '{command}'", "command")
        values["command"] = command
    missing = [k for k in ("command", "device.type") if values.get(k) is None]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    command = values["command"]
    dtype = values["device.type"]

    required = list(DEVICE_REQUIRED[dtype])
    manual_audit = command == "audit" and values.get("audit.linewidth_pm") is not None
    needs_spectrum = not manual_audit and dtype in ("microring", "fabry_perot")
    if needs_spectrum and values.get("input.spectrum") is None:
        required += ["grid.start_nm", "grid.stop_nm"]
    if command == "sweep":
        required += ["grid.start_nm", "grid.stop_nm", "sweep.parameter", "sweep.start", "sweep.stop"]
    if manual_audit:
        required += ["audit.wavelength_nm"]
        if dtype in ("microring", "fabry_perot"):
            required += ["audit.finesse"]
    if command == "fit" and dtype != "microring":
        raise ConfigError("fitting is only available for device.type = microring", "device.type",
                          lines.get("device.type"))
    if command == "simulate" and dtype not in ("microring", "fabry_perot"):
        raise ConfigError(f"cannot simulate a {dtype} spectrum", "device.type", lines.get("device.type"))
    missing = [k for k in dict.fromkeys(required) if values.get(k) is None]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    for key, value in values.items():
        if key.startswith("device.") and key != "device.type" and key.split(".", 1)[1] not in DEVICE_KEYS[dtype]:
            raise ConfigError(f"not a parameter of device.type = {dtype}", key, lines.get(key))

    provenance = []
    for key, (kind, default) in SCHEMA.items():
        if key in values or default is None or default is REQUIRED:
            continue
        if key.startswith("device.") and key.split(".", 1)[1] not in DEVICE_KEYS[dtype]:
            continue
        value = _convert(key, kind, default, 0) if isinstance(default, str) and kind != "str" else default
        values[key] = value
        provenance.append(f"default {key} = {_render(value)}")

    if dtype == "microring":
        symmetric = values.get("device.kappa")
        k1, k2 = values.get("device.kappa1"), values.get("device.kappa2")
        if symmetric is not None and (k1 is not None or k2 is not None):
            raise ConfigError("give either device.kappa or device.kappa1/kappa2, not both", "device.kappa",
                              lines.get("device.kappa"))
        if symmetric is None and (k1 is None or k2 is None):
            raise ConfigError("missing required keys: device.kappa (or device.kappa1 and device.kappa2)")

    config = RunConfig(command, dtype, values, lines, provenance)
    _validate(config)
    return config


def _check(lines: Dict[str, int], key: str, ok: bool, message: str):
    if not ok:
        raise ConfigError(message, key, lines.get(key))


def _check_ranges(v: Dict[str, object], lines: Dict[str, int]):
    """Per-key range checks on the values present in the document."""
    for key in ("device.radius_um", "device.length_um", "device.delta_l_um", "device.pitch_um",
                "device.aperture_um", "grid.step_pm", "grid.start_nm", "grid.stop_nm",
                "analysis.window_fwhm", "audit.linewidth_pm", "audit.finesse", "audit.wavelength_nm"):
        if v.get(key) is not None:
            _check(lines, key, v[key] > 0, f"must be positive, got {_render(v[key])}")
    for key in ("device.n_eff", "device.n"):
        if v.get(key) is not None:
            _check(lines, key, v[key] >= 1, f"must be >= 1, got {_render(v[key])}")
    for key in ("device.kappa", "device.kappa1", "device.kappa2"):
        if v.get(key) is not None:
            _check(lines, key, 0 <= v[key] <= 1, f"must lie in [0, 1], got {_render(v[key])}")
    for key in ("device.alpha_db_per_cm", "device.margin_um", "simulate.noise_sigma"):
        if v.get(key) is not None:
            _check(lines, key, v[key] >= 0, f"must be non-negative, got {_render(v[key])}")
    for key in ("device.order", "device.lines", "fit.max_iter"):
        if v.get(key) is not None:
            _check(lines, key, v[key] >= 1, f"must be >= 1, got {v[key]}")
    for key in ("device.arms", "sweep.points"):
        if v.get(key) is not None:
            _check(lines, key, v[key] >= 2, f"must be >= 2, got {v[key]}")
    if v.get("device.mirror_reflectance") is not None:
        _check(lines, "device.mirror_reflectance", 0 < v["device.mirror_reflectance"] < 1,
               "must lie in (0, 1)")
    if v.get("analysis.prominence") is not None:
        _check(lines, "analysis.prominence", 0 < v["analysis.prominence"] < 1, "must lie in (0, 1)")
    if v.get("grid.start_nm") is not None and v.get("grid.stop_nm") is not None:
        _check(lines, "grid.stop_nm", v["grid.stop_nm"] > v["grid.start_nm"], "must exceed grid.start_nm")


def _validate(config: RunConfig):
    v = config.values
    if config.command == "sweep":
        allowed = SWEEPABLE.get(config.device_type, ())
        _check(config.lines, "sweep.parameter", v["sweep.parameter"] in allowed,
               f"cannot sweep '{v['sweep.parameter']}' (choose from {', '.join(allowed) or 'nothing'})")
    try:
        config.device
        config.grid
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def build_device(dtype: str, v: Dict[str, object]) -> DeviceSpec:
    """Device spec in SI units from interface-unit config values."""
    if dtype == "microring":
        k = v.get("device.kappa")
        k1 = k if k is not None else v["device.kappa1"]
        k2 = k if k is not None else v["device.kappa2"]
        return MicroringSpec(
            radius=v["device.radius_um"] / PER_UM,
            n_eff=v["device.n_eff"],
            kappa1=k1,
            kappa2=k2,
            alpha=alpha_from_db_per_cm(v.get("device.alpha_db_per_cm") or 0.0),
        )
    if dtype == "fabry_perot":
        return FabryPerotSpec(v["device.n"], v["device.length_um"] / PER_UM, v["device.mirror_reflectance"])
    pitch = v.get("device.pitch_um")
    length = v.get("device.length_um")
    pitch = None if pitch is None else pitch / PER_UM
    length = None if length is None else length / PER_UM
    if dtype == "grating":
        return GratingSpec(v["device.order"], v["device.lines"], pitch, length)
    return AwgSpec(v["device.arms"], v["device.delta_l_um"] / PER_UM, v["device.n_eff"], pitch, length)
