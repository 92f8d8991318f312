"""Scenario, channel, timing and energy parameters.

Every scenario and power-model value has a default. The absolute scale of the
large-scale gain is set by ``SystemConfig.d_ref``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

PATHLOSS_MODES = ("normalized-reference", "paper-db")
SIC_MODES = ("edge-reference", "paper-eq11")
POWER_COUNTS = ("configured", "served")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


@dataclass(frozen=True)
class EnergyParams:
    """Power-consumption model coefficients (watts unless noted)."""

    P0: float = 2.0
    Psyn: float = 2.0
    Pcod: float = 4.0
    Pdec: float = 0.5
    Prx: float = 0.3
    Ptx: float = 1.0
    amp_eff: float = 0.3
    L: float = 1e9  # operations per joule

    def validate(self) -> None:
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"energy parameter {f.name} must be positive")
        if self.amp_eff > 1:
            raise ConfigError("amplifier efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class SystemConfig:
    """Single-cell downlink scenario.

    ``d_ref`` is the distance at which the noise-normalized large-scale gain
    equals one in ``normalized-reference`` mode. The default of 280 m is a
    least-squares fit of the sum-rate scale to the reported trade-off table;
    ``scripts/calibrate_reference.py`` reproduces the fit.
    """

    M: int = 64
    K: int = 64
    d_min: float = 50.0
    d1: float = 100.0
    d2: float = 150.0
    d_max: float = 350.0
    xi: float = 3.78
    beta0_db: float = 130.0
    pathloss_mode: str = "normalized-reference"
    noise_norm_db: float = 0.0
    d_ref: float = 280.0
    T_symbols: int = 512
    P_rf: float = 1.0
    zeta: int = 2
    sic_mode: str = "edge-reference"
    fairness_population: str = "devices"
    power_count: str = "configured"
    energy: EnergyParams = field(default_factory=EnergyParams)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.M < 1:
            raise ConfigError("M must be a positive integer")
        if self.K < 1 or self.K % 2:
            raise ConfigError(f"K must be a positive even integer, got {self.K}")
        if self.zeta != 2:
            raise ConfigError("only two devices per cluster are supported")
        if not 0 < self.d_min < self.d1 < self.d2 < self.d_max:
            raise ConfigError("geometry requires 0 < d_min < d1 < d2 < d_max")
        if self.xi <= 0:
            raise ConfigError("pathloss exponent must be positive")
        if self.d_ref <= 0:
            raise ConfigError("d_ref must be positive")
        if self.T_symbols < 1:
            raise ConfigError("T_symbols must be >= 1")
        if not self.P_rf > 0:
            raise ConfigError("P_rf must be positive")
        if self.pathloss_mode not in PATHLOSS_MODES:
            raise ConfigError(f"unknown pathloss mode {self.pathloss_mode!r}")
        if self.sic_mode not in SIC_MODES:
            raise ConfigError(f"unknown SIC mode {self.sic_mode!r}")
        if self.fairness_population not in ("devices", "antennas"):
            raise ConfigError("fairness_population must be 'devices' or 'antennas'")
        if self.power_count not in POWER_COUNTS:
            raise ConfigError(f"power_count must be one of {POWER_COUNTS}")
        self.energy.validate()

    @property
    def rho(self) -> float:
        return self.K / self.M

    def with_devices(self, K: int) -> "SystemConfig":
        return dataclasses.replace(self, K=K)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """sha256 of the canonical JSON form, used to tag sweep outputs."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


_PRESETS = {"paper-m64": 64, "paper-m128": 128, "paper-m256": 256}

# [sweep] section defaults
SWEEP_DEFAULTS = {"trials": 1000, "seed": 42}


def preset(name: str) -> SystemConfig:
    try:
        M = _PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    return SystemConfig(M=M, K=M)


def from_dict(data: dict[str, Any], base: SystemConfig | None = None
              ) -> tuple[SystemConfig, dict[str, Any]]:
    """Build a config from ``{"scenario": ..., "energy": ..., "sweep": ...}``.

    Returns the config and the resolved sweep section. Unknown keys raise.
    """
    base = base or SystemConfig()
    unknown = set(data) - {"scenario", "energy", "sweep"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    scen = dict(data.get("scenario", {}))
    energy_kw = dict(data.get("energy", {}))
    sweep = dict(SWEEP_DEFAULTS)
    sweep.update(data.get("sweep", {}))
    if set(sweep) - set(SWEEP_DEFAULTS):
        raise ConfigError(f"unknown sweep keys: {sorted(set(sweep) - set(SWEEP_DEFAULTS))}")

    scen_fields = {f.name: f.type for f in dataclasses.fields(SystemConfig)}
    scen_fields.pop("energy")
    for key in scen:
        if key not in scen_fields:
            raise ConfigError(f"unknown scenario key {key!r}")
    energy_names = {f.name for f in dataclasses.fields(EnergyParams)}
    for key in energy_kw:
        if key not in energy_names:
            raise ConfigError(f"unknown energy key {key!r}")
    try:
        energy = dataclasses.replace(base.energy, **{k: float(v) for k, v in energy_kw.items()})
        if "M" in scen and "K" not in scen:
            scen["K"] = scen["M"]
        cfg = dataclasses.replace(base, energy=energy, **scen)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return cfg, sweep


def load_config(path: str | Path, base: SystemConfig | None = None
                ) -> tuple[SystemConfig, dict[str, Any]]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return from_dict(data, base)
