"""Total consumed power and energy efficiency.

The compute terms divide by ``L * T`` with T taken as the coherence interval
in symbols, which keeps them far below a milliwatt for realistic M and K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nomamimo.config import EnergyParams, SystemConfig


@dataclass(frozen=True)
class PowerBreakdown:
    amplifier: float
    fixed: float
    per_device: float
    per_antenna: float
    precoding: float

    @property
    def total(self) -> float:
        return (self.amplifier + self.fixed + self.per_device
                + self.per_antenna + self.precoding)


def total_power(config: SystemConfig, energy: EnergyParams | None = None,
                served=None) -> PowerBreakdown:
    """Consumed power split into its five terms.

    ``served`` overrides the device count in the device-dependent and
    precoding terms (e.g. devices still active after water-filling); it may
    be an array, in which case those terms are arrays too.
    """
    energy = energy or config.energy
    energy.validate()
    M = config.M
    K = config.K if served is None else np.asarray(served, dtype=float)
    T, L = config.T_symbols, energy.L
    return PowerBreakdown(
        amplifier=config.P_rf / energy.amp_eff,
        fixed=energy.P0 + energy.Psyn,
        per_device=K * (energy.Pcod + energy.Pdec + energy.Prx) + K**3 * 2.0 / (3.0 * L * T),
        per_antenna=M * energy.Ptx,
        precoding=M * K * (3.0 + T) / (T * L) + M * K**2 * 2.0 / (T * L),
    )


def energy_efficiency(sum_rate, p_tot):
    """bits/Joule/Hz."""
    p_tot = np.asarray(p_tot, dtype=float)
    if np.any(p_tot <= 0):
        raise ValueError("total power must be positive")
    return np.asarray(sum_rate, dtype=float) / p_tot
