"""Experiment configuration: an INI file with five sections, every key
defaulted, unknown keys rejected.

The same table drives parsing, validation, the ``config.resolved`` echo,
and the shipped ``config_schema.json``.  CLI ``--set section.key=value``
overrides are applied after file load, before validation.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import LinkParams
from .dynamics import DynamicsConfig, ForceConfig
from .errors import ConfigError
from .estimator import Requirements
from .scheduler import POLICY_ORDER, Policy

# Total in-band noise power for -11.5 dBm.
_NOISE_POWER_W = 10.0 ** (-11.5 / 10.0) * 1e-3

# key -> (type tag, default, help). Type tags: float, int, bool, str,
# choice:<a|b>, policies.
SCHEMA: dict[str, dict[str, tuple[str, object, str]]] = {
    "dynamics": {
        "amp_x_n": ("float", 15.0, "driving force amplitude, x axis (N)"),
        "amp_y_n": ("float", 15.0, "driving force amplitude, y axis (N)"),
        "freq_x_per_qi": ("float", 0.005, "driving force frequency, x axis (1/QI)"),
        "freq_y_per_qi": ("float", 0.004, "driving force frequency, y axis (1/QI)"),
        "restore_gain_n": ("float", -250.0, "restoring gain (N); negative pulls to center"),
        "region_radius_m": ("float", 25.0, "admissible disk radius (m)"),
        "center_x_m": ("float", 0.0, "disk center x (m); AP location"),
        "center_y_m": ("float", 0.0, "disk center y (m); AP location"),
        "mass_kg": ("float", 100.0, "PA mass (kg)"),
        "step_s": ("float", 0.2, "QI duration T (s)"),
        "sigma_sq_pos": ("float", 0.04, "process noise variance, position (m^2)"),
        "sigma_sq_vel": ("float", 0.01, "process noise variance, velocity ((m/s)^2)"),
        "init_x_m": ("float", 0.0, "initial mean x (m)"),
        "init_y_m": ("float", 0.0, "initial mean y (m)"),
        "init_vx_mps": ("float", 0.0, "initial mean vx (m/s)"),
        "init_vy_mps": ("float", 0.0, "initial mean vy (m/s)"),
        "init_var_pos": ("float", 1.0, "initial belief variance, position (m^2)"),
        "init_var_vel": ("float", 0.1, "initial belief variance, velocity ((m/s)^2)"),
        "known_input": ("bool", False, "feed deterministic forces as a control term"),
    },
    "fleet": {
        "n_position": ("int", 30, "number of position sensors"),
        "n_velocity": ("int", 30, "number of velocity sensors"),
        "d_max_m": ("float", 20.0, "sensing range (m)"),
        "noise_dist": (
            "choice:uniform|loguniform|twotier",
            "twotier",
            "distribution of per-sensor noise variance",
        ),
        "pos_var_lo": ("float", 0.008, "position sensor variance, lower bound (m^2)"),
        "pos_var_hi": ("float", 0.018, "position sensor variance, upper bound (m^2)"),
        "vel_var_lo": ("float", 0.003, "velocity sensor variance, lower bound ((m/s)^2)"),
        "vel_var_hi": ("float", 0.0065, "velocity sensor variance, upper bound ((m/s)^2)"),
        "elite_frac": ("float", 0.11, "twotier: fraction of precision sensors per kind"),
        "bulk_scale": ("float", 60.0, "twotier: variance multiplier for bulk sensors"),
    },
    "link": {
        "carrier_freq_hz": ("float", 2.4e9, "carrier frequency (Hz); informational"),
        "bandwidth_hz": ("float", 5e6, "channel bandwidth W (Hz)"),
        "rate_threshold_bps": ("float", 250e3, "fixed uplink rate R_th (bit/s)"),
        "noise_power_w": ("float", _NOISE_POWER_W, "total in-band noise power (W)"),
        "rician_g_db": ("float", 15.0, "Rician factor G (dB)"),
        "outage_eps": ("float", 1e-4, "outage probability target"),
        "mu0": ("float", 1e-4, "mean channel gain at 1 m"),
        "path_loss_exp": ("float", 2.5, "path loss exponent"),
        "ptx_max_w": ("float", 1000.0, "per-agent transmit power sanity bound (W)"),
    },
    "requirements": {
        "xi_sq_pos": ("float", 0.015, "max posterior variance, position features (m^2)"),
        "xi_sq_vel": ("float", 0.005, "max posterior variance, velocity features ((m/s)^2)"),
    },
    "harness": {
        "n_qi": ("int", 100, "query intervals per episode"),
        "runs": ("int", 500, "Monte Carlo runs per policy"),
        "base_seed": ("int", 20240817, "root seed for all streams"),
        "policies": ("policies", "voi,cost_bg,confidence_bg,random,bcs", "policies to run"),
        "alpha": ("float", 0.5, "objective weight between accuracy and power"),
        "slot_budget": ("int", 10, "uplink slot budget C per QI"),
        "regularize": ("bool", False, "regularize ill-conditioned innovations instead of failing"),
    },
}


def _parse_value(section: str, key: str, tag: str, raw: object):
    text = str(raw).strip()
    where = f"[{section}] {key}"
    try:
        if tag == "float":
            return float(text)
        if tag == "int":
            v = int(text)
            return v
        if tag == "bool":
            low = text.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if tag.startswith("choice:"):
            choices = tag.split(":", 1)[1].split("|")
            if text not in choices:
                raise ValueError(f"must be one of {choices}")
            return text
        if tag == "policies":
            names = [p.strip() for p in text.split(",") if p.strip()]
            if not names:
                raise ValueError("empty policy list")
            if names == ["all"]:
                return [p.value for p in POLICY_ORDER]
            out = []
            for name in names:
                Policy(name)  # raises ValueError on unknown
                if name in out:
                    raise ValueError(f"duplicate policy {name!r}")
                out.append(name)
            return out
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid value {text!r} ({exc})") from None
    raise ConfigError(f"{where}: unknown schema tag {tag!r}")


def _canonicalize(section: str, key: str, tag: str, value: object):
    """Accept either raw strings (file, CLI, schema defaults) or already
    canonical values; always return the canonical type."""
    if tag == "float" and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if tag == "int" and isinstance(value, int) and not isinstance(value, bool):
        return value
    if tag == "bool" and isinstance(value, bool):
        return value
    if tag == "policies" and isinstance(value, (list, tuple)):
        value = ",".join(value)
    return _parse_value(section, key, tag, value)


def _format_value(tag: str, value: object) -> str:
    if tag == "bool":
        return "true" if value else "false"
    if tag == "float":
        # repr round-trips exactly; the 9-digit rule applies to CSVs only.
        return repr(float(value))
    if tag == "policies":
        return ",".join(value)
    return str(value)


@dataclass
class SimConfig:
    """Fully-resolved experiment configuration.

    ``values[section][key]`` holds parsed values for every schema key.
    The typed accessors below build the domain objects consumed by the
    simulation modules.
    """

    values: dict[str, dict[str, object]] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[str, dict[str, object]] = {}
        for section, keys in SCHEMA.items():
            merged[section] = {}
            given = self.values.get(section, {})
            for key, (tag, default, _help) in keys.items():
                merged[section][key] = _canonicalize(
                    section, key, tag, given.get(key, default)
                )
        self.values = merged
        self._validate()

    def _validate(self):
        v = self.values
        positive = [
            ("dynamics", "mass_kg"),
            ("dynamics", "region_radius_m"),
            ("dynamics", "step_s"),
            ("fleet", "d_max_m"),
            ("fleet", "pos_var_lo"),
            ("fleet", "vel_var_lo"),
            ("requirements", "xi_sq_pos"),
            ("requirements", "xi_sq_vel"),
            ("harness", "runs"),
            ("harness", "n_qi"),
        ]
        for section, key in positive:
            if v[section][key] <= 0:
                raise ConfigError(f"[{section}] {key} must be positive")
        for section, lo, hi in (
            ("fleet", "pos_var_lo", "pos_var_hi"),
            ("fleet", "vel_var_lo", "vel_var_hi"),
        ):
            if v[section][hi] < v[section][lo]:
                raise ConfigError(f"[{section}] {hi} must be >= {lo}")
        for section, key in (("fleet", "n_position"), ("fleet", "n_velocity")):
            if v[section][key] < 0:
                raise ConfigError(f"[{section}] {key} must be >= 0")
        if not 0.0 <= v["fleet"]["elite_frac"] <= 1.0:
            raise ConfigError("[fleet] elite_frac must lie in [0, 1]")
        if v["fleet"]["bulk_scale"] < 1.0:
            raise ConfigError("[fleet] bulk_scale must be >= 1")
        if v["harness"]["slot_budget"] < 0:
            raise ConfigError("[harness] slot_budget must be >= 0")
        if not 0.0 <= v["harness"]["alpha"] <= 1.0:
            raise ConfigError("[harness] alpha must lie in [0, 1]")
        # Constructing LinkParams runs the feasibility checks; surface
        # those as config problems since the values came from here.
        try:
            self.link_params()
        except ValueError as exc:
            raise ConfigError(f"[link] {exc}") from None

    # -- typed views -------------------------------------------------

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    def force_config(self) -> ForceConfig:
        d = self.values["dynamics"]
        return ForceConfig(
            amp_n=np.array([d["amp_x_n"], d["amp_y_n"]]),
            freq_per_qi=np.array([d["freq_x_per_qi"], d["freq_y_per_qi"]]),
            restore_gain_n=d["restore_gain_n"],
            region_radius_m=d["region_radius_m"],
            center_m=np.array([d["center_x_m"], d["center_y_m"]]),
            mass_kg=d["mass_kg"],
        )

    def dynamics_config(self) -> DynamicsConfig:
        d = self.values["dynamics"]
        return DynamicsConfig(
            force=self.force_config(),
            step_s=d["step_s"],
            sigma_sq_pos=d["sigma_sq_pos"],
            sigma_sq_vel=d["sigma_sq_vel"],
            init_mean=np.array(
                [d["init_x_m"], d["init_y_m"], d["init_vx_mps"], d["init_vy_mps"]]
            ),
            init_var_pos=d["init_var_pos"],
            init_var_vel=d["init_var_vel"],
            known_input=d["known_input"],
        )

    def link_params(self) -> LinkParams:
        li = self.values["link"]
        return LinkParams(
            bandwidth_hz=li["bandwidth_hz"],
            noise_power_w=li["noise_power_w"],
            rician_g=10.0 ** (li["rician_g_db"] / 10.0),
            mu0=li["mu0"],
            path_loss_exp=li["path_loss_exp"],
            rate_threshold_bps=li["rate_threshold_bps"],
            outage_eps=li["outage_eps"],
        )

    def requirements(self) -> Requirements:
        r = self.values["requirements"]
        return Requirements(
            xi_sq=np.array(
                [r["xi_sq_pos"], r["xi_sq_pos"], r["xi_sq_vel"], r["xi_sq_vel"]]
            )
        )

    def policies(self) -> list[Policy]:
        return [Policy(p) for p in self.values["harness"]["policies"]]

    # -- IO ----------------------------------------------------------

    def to_ini_text(self) -> str:
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key, (tag, _default, _help) in keys.items():
                lines.append(f"{key} = {_format_value(tag, self.values[section][key])}")
            lines.append("")
        return "\n".join(lines)

    def with_overrides(self, assignments: list[str]) -> "SimConfig":
        """Apply ``section.key=value`` strings on top of this config."""
        values = {s: dict(kv) for s, kv in self.values.items()}
        for item in assignments:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(
                    f"override {item!r} must look like section.key=value"
                )
            target, raw = item.split("=", 1)
            section, key = target.split(".", 1)
            section = section.strip()
            key = key.strip()
            if section not in SCHEMA or key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
            tag = SCHEMA[section][key][0]
            values[section][key] = _parse_value(section, key, tag, raw)
        return SimConfig(values=values)


def default_config() -> SimConfig:
    return SimConfig()


def load_config(path: str | Path | None, overrides: list[str] | None = None) -> SimConfig:
    """Load an INI file (or defaults when path is None) and apply
    overrides.  Unknown sections or keys fail with their location."""
    values: dict[str, dict[str, object]] = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        read = parser.read(str(path))
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            values[section] = {}
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                tag = SCHEMA[section][key][0]
                values[section][key] = _parse_value(section, key, tag, raw)
    cfg = SimConfig(values=values)
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg


def schema_as_json() -> dict:
    out: dict[str, dict[str, dict[str, object]]] = {}
    for section, keys in SCHEMA.items():
        out[section] = {}
        for key, (tag, default, help_text) in keys.items():
            out[section][key] = {"type": tag, "default": default, "help": help_text}
    return out


def packaged_schema() -> dict:
    with resources.files("voisched").joinpath("config_schema.json").open() as fh:
        return json.load(fh)
