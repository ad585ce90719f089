"""Run configuration: an INI-style file with ``[params]`` and ``[scenario]`` sections.

Key names carry their unit (``_mm``, ``_nm``, ``_ghz``, ``_mw``, ``_ng``,
``_mk``, ``_hz``, ``_us``); values are plain numbers. Conversion to SI
happens here and nowhere else.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .params import DEFAULT_QUALITY_FLOOR, PhysicalParams

COMMANDS = ("derive", "fidelity-sweep", "wigner", "phonon-stats", "temp-sweep", "entanglement")
FORMATS = ("csv", "json", "svg")

PARAM_KEYS = (
    "cavity_length_mm",
    "laser_wavelength_nm",
    "mech_freq_ghz",
    "laser_power_mw",
    "mirror_mass_ng",
    "finesse",
    "bath_temp_mk",
    "mech_damping_hz",
    "detuning_ratio",
)
OPTIONAL_PARAM_KEYS = ("cavity_freq_equals_laser", "quality_floor")

SCENARIO_KEYS = (
    "command",
    "times_us",
    "time_us",
    "temps_mk",
    "extent",
    "resolution",
    "n_max",
    "out_dir",
    "formats",
    "ideal_fock",
    "workers",
)

REQUIRED_SCENARIO_KEYS = {
    "derive": (),
    "fidelity-sweep": ("times_us",),
    "wigner": ("time_us",),
    "phonon-stats": ("time_us",),
    "temp-sweep": ("temps_mk", "times_us"),
    "entanglement": ("times_us",),
}


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    lab_params: dict
    command: str | None = None
    times_us: tuple[float, ...] = ()
    time_us: float | None = None
    temps_mk: tuple[float, ...] = ()
    extent: float = 3.0
    resolution: int = 201
    n_max: int = 4
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    ideal_fock: int | None = None
    workers: int = 1
    present: frozenset = field(default_factory=frozenset)

    def require(self, command: str) -> None:
        """Check that every key ``command`` needs was given."""
        if self.command is not None and self.command != command:
            raise ConfigError(f"config is for command {self.command!r}, not {command!r}")
        needed = REQUIRED_SCENARIO_KEYS[command]
        if command in ("wigner", "phonon-stats") and self.ideal_fock is not None:
            needed = ()
        missing = [k for k in needed if k not in self.present]
        if missing:
            raise ConfigError(f"[scenario] is missing required key(s) for {command}: {', '.join(missing)}")
        for key in needed:
            if key.endswith("s_us") or key.endswith("s_mk"):
                if not getattr(self, key):
                    raise ConfigError(f"[scenario] {key} must not be empty")


def _float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None


def _float_list(section: str, key: str, raw: str) -> tuple[float, ...]:
    items = [s.strip() for s in raw.replace(";", ",").split(",")]
    return tuple(_float(section, key, s) for s in items if s)


def _bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected true/false, got {raw!r}")


def parse_formats(raw: str) -> tuple[str, ...]:
    fmts = tuple(s.strip().lower() for s in raw.split(",") if s.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown output format(s): {', '.join(bad)}; choose from {', '.join(FORMATS)}")
    return fmts


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case so typos are reported verbatim
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    unknown_sections = [s for s in cp.sections() if s not in ("params", "scenario")]
    if unknown_sections:
        raise ConfigError(f"unknown section(s): {', '.join(unknown_sections)}")
    if not cp.has_section("params"):
        raise ConfigError("missing [params] section")

    params = dict(cp.items("params"))
    unknown = [k for k in params if k not in PARAM_KEYS + OPTIONAL_PARAM_KEYS]
    if unknown:
        raise ConfigError(f"[params] unknown key(s): {', '.join(unknown)}")
    missing = [k for k in PARAM_KEYS if k not in params]
    if missing:
        raise ConfigError(f"[params] missing key(s): {', '.join(missing)}")

    lab: dict = {k: _float("params", k, params[k]) for k in PARAM_KEYS}
    if "cavity_freq_equals_laser" in params:
        lab["cavity_freq_equals_laser"] = _bool("params", "cavity_freq_equals_laser", params["cavity_freq_equals_laser"])
    lab["quality_floor"] = (
        _float("params", "quality_floor", params["quality_floor"]) if "quality_floor" in params else DEFAULT_QUALITY_FLOOR
    )
    physical = PhysicalParams.from_lab_units(**lab)

    scen = dict(cp.items("scenario")) if cp.has_section("scenario") else {}
    unknown = [k for k in scen if k not in SCENARIO_KEYS]
    if unknown:
        raise ConfigError(f"[scenario] unknown key(s): {', '.join(unknown)}")

    kw: dict = {}
    if "command" in scen:
        if scen["command"] not in COMMANDS:
            raise ConfigError(f"[scenario] command must be one of {', '.join(COMMANDS)}")
        kw["command"] = scen["command"]
    for key in ("times_us", "temps_mk"):
        if key in scen:
            kw[key] = _float_list("scenario", key, scen[key])
    for key in ("time_us", "extent"):
        if key in scen:
            kw[key] = _float("scenario", key, scen[key])
    for key in ("resolution", "n_max", "ideal_fock", "workers"):
        if key in scen:
            kw[key] = _int("scenario", key, scen[key])
    if "out_dir" in scen:
        kw["out_dir"] = scen["out_dir"].strip()
    if "formats" in scen:
        kw["formats"] = parse_formats(scen["formats"])
    _check_ranges(kw)
    return RunConfig(params=physical, lab_params=lab, present=frozenset(scen), **kw)


def _check_ranges(kw: dict) -> None:
    limits = {
        "extent": (lambda x: x > 0, "must be > 0"),
        "resolution": (lambda x: x >= 2, "must be >= 2"),
        "n_max": (lambda x: x >= 1, "must be >= 1"),
        "workers": (lambda x: x >= 1, "must be >= 1"),
        "ideal_fock": (lambda x: x >= 0, "must be >= 0"),
    }
    for key, (ok, msg) in limits.items():
        if key in kw and not ok(kw[key]):
            raise ConfigError(f"[scenario] {key} {msg}, got {kw[key]!r}")


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
