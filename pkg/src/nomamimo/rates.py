"""Closed-form ergodic rates for ZF-mMIMO and ZF-NOMA (bits/s/Hz)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from nomamimo.allocation import MMIMO, NOMA, AllocationResult, cluster_powers
from nomamimo.config import ConfigError, SystemConfig
from nomamimo.geometry import Clustering, DeviceDrop

_LN2 = np.log(2.0)


def log2_1p(x):
    return np.log1p(x) / _LN2


@dataclass(frozen=True)
class RateReport:
    per_device_rate: np.ndarray
    sum_rate: np.ndarray
    tau: float
    cluster_rate: np.ndarray | None = None


def data_fraction(config: SystemConfig, K: int | None = None) -> float:
    """Share of the coherence interval left for data after K pilot symbols."""
    K = config.K if K is None else K
    tau = 1.0 - K / config.T_symbols
    if tau < 0:
        warnings.warn(f"K={K} pilots exceed the coherence interval of "
                      f"{config.T_symbols} symbols; no data is sent", RuntimeWarning)
        return 0.0
    return tau


def mimo_array_gain(config: SystemConfig) -> int:
    return max(config.M - config.K, 0)


def noma_array_gain(config: SystemConfig) -> float:
    return config.M + 1 - config.K / 2


def mimo_rates(config: SystemConfig, drop: DeviceDrop,
               allocation: AllocationResult) -> RateReport:
    """Per-device rate ``tau * log2(1 + (M - K) p b)``; all zero once K >= M."""
    if allocation.system != MMIMO:
        raise ValueError("mimo_rates needs an mMIMO allocation")
    tau = data_fraction(config)
    gain = mimo_array_gain(config)
    rate = tau * log2_1p(gain * allocation.power * drop.beta)
    return RateReport(per_device_rate=rate, sum_rate=rate.sum(axis=-1), tau=tau)


def noma_rates(config: SystemConfig, clustering: Clustering,
               allocation: AllocationResult) -> RateReport:
    """Center term with array gain ``M + 1 - K/2``, edge term interference-limited
    by the center's power on the shared beam."""
    if allocation.system != NOMA:
        raise ValueError("noma_rates needs a NOMA allocation")
    if config.K >= 2 * config.M - 1:
        raise ConfigError(f"NOMA closed form undefined for K={config.K} >= 2M-1="
                          f"{2 * config.M - 1}")
    tau = data_fraction(config)
    m_bar = noma_array_gain(config)
    p_c, p_e = cluster_powers(clustering, allocation)
    b_c, b_e = clustering.beta_center, clustering.beta_edge
    r_c = tau * log2_1p(m_bar * b_c * p_c)
    r_e = tau * log2_1p(b_e * p_e / (b_e * p_c + 1.0))
    per_device = np.zeros(r_c.shape[:-1] + (clustering.K,))
    np.put_along_axis(per_device, clustering.center_ids, r_c, axis=-1)
    np.put_along_axis(per_device, clustering.edge_ids, r_e, axis=-1)
    cluster = r_c + r_e
    return RateReport(per_device_rate=per_device, sum_rate=cluster.sum(axis=-1),
                      tau=tau, cluster_rate=cluster)
