"""Downlink massive-MIMO versus power-domain NOMA under four power-allocation
policies, evaluated across device loading 0 < rho <= 2."""

from nomamimo.config import ConfigError, EnergyParams, SystemConfig, preset
from nomamimo.geometry import (Clustering, DeviceDrop, drop_devices,
                               partition_and_pair, pathloss_linear)
from nomamimo.allocation import (AllocationResult, dwf_noma, epa_mimo,
                                 epa_noma, picpa_mimo, picpa_noma,
                                 sic_feasibility, wf_mimo)
from nomamimo.rates import RateReport, data_fraction, mimo_rates, noma_rates
from nomamimo.energy import PowerBreakdown, energy_efficiency, total_power
from nomamimo.metrics import (CurveSamples, area_under_curve, jain_index,
                              tradeoff_point)

__version__ = "0.1.0"

__all__ = [
    "AllocationResult", "Clustering", "ConfigError", "CurveSamples",
    "DeviceDrop", "EnergyParams", "PowerBreakdown", "RateReport",
    "SystemConfig", "area_under_curve", "data_fraction", "drop_devices",
    "dwf_noma", "energy_efficiency", "epa_mimo", "epa_noma", "jain_index",
    "mimo_rates", "noma_rates", "partition_and_pair", "pathloss_linear",
    "picpa_mimo", "picpa_noma", "preset", "sic_feasibility", "total_power",
    "tradeoff_point", "wf_mimo",
]
