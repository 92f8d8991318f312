"""Power allocation for ZF-mMIMO and ZF-NOMA.

Four policies: equal power (EPA), proportional channel inversion (PICPA),
classical water-filling over devices (WF, mMIMO only) and water-filling over
clusters on the pair gain gap (DWF, NOMA only). Every function accepts
leading batch dimensions on its gain arrays and returns per-device powers in
the original device order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nomamimo.config import ConfigError, SystemConfig
from nomamimo.geometry import Clustering, DeviceDrop, partition_and_pair

MMIMO, NOMA = "MMIMO", "NOMA"
EPA, PICPA, WF, DWF = "EPA", "PICPA", "WF", "DWF"
POLICIES = {MMIMO: (EPA, PICPA, WF), NOMA: (EPA, PICPA, DWF)}


@dataclass(frozen=True)
class AllocationResult:
    power: np.ndarray
    active: np.ndarray
    policy: str
    system: str
    water_level: np.ndarray | None = None
    cluster_power: np.ndarray | None = None

    @property
    def active_fraction(self) -> np.ndarray:
        return self.active.mean(axis=-1)


def water_fill(gain, budget: float):
    """Iteratively water-fill ``budget`` over parallel channels.

    Each pass sets the level ``mu = (budget + sum 1/g) / n_active`` over the
    currently active channels, assigns ``(mu - 1/g)^+`` and removes every
    channel left at exactly zero power. Stops when a pass removes nothing.

    Parameters
    ----------
    gain : array_like
        Positive channel gains, shape ``(..., n)``.
    budget : float
        Total power to distribute.

    Returns
    -------
    power, active, mu
        Powers ``(..., n)``, activity mask ``(..., n)`` and final water
        level ``(...)``.
    """
    gain = np.asarray(gain, dtype=float)
    if np.any(gain <= 0):
        raise ValueError("water-filling requires strictly positive gains")
    inv = 1.0 / gain
    active = np.ones(gain.shape, dtype=bool)
    while True:
        n = active.sum(axis=-1)
        mu = (budget + np.where(active, inv, 0.0).sum(axis=-1)) / n
        power = np.where(active, np.maximum(mu[..., None] - inv, 0.0), 0.0)
        keep = active & (power > 0)
        if np.array_equal(keep, active):
            return power, active, mu
        active = keep


def _scatter(clustering: Clustering, center_vals, edge_vals):
    shape = clustering.center_ids.shape[:-1] + (clustering.K,)
    out = np.zeros(shape, dtype=np.result_type(center_vals, edge_vals))
    np.put_along_axis(out, clustering.center_ids, center_vals, axis=-1)
    np.put_along_axis(out, clustering.edge_ids, edge_vals, axis=-1)
    return out


def _check_even(K: int) -> None:
    if K % 2:
        raise ConfigError(f"NOMA needs an even number of devices, got {K}")


def epa_mimo(config: SystemConfig, shape: tuple[int, ...] = (),
             K: int | None = None) -> AllocationResult:
    """Uniform split over ``K`` devices (``config.K`` unless given).

    mMIMO places no parity constraint on the population, so an explicit
    ``K`` may be odd.
    """
    K = config.K if K is None else K
    if K < 1:
        raise ValueError("need at least one device")
    power = np.full(shape + (K,), config.P_rf / K)
    return AllocationResult(power, np.ones(power.shape, bool), EPA, MMIMO)


def epa_noma(config: SystemConfig, clustering: Clustering) -> AllocationResult:
    _check_even(clustering.K)
    p_ref = 2.0 * config.P_rf / clustering.K
    cluster_power = np.full(clustering.center_ids.shape, p_ref)
    half = cluster_power / 2.0
    power = _scatter(clustering, half, half)
    return AllocationResult(power, np.ones(power.shape, bool), EPA, NOMA,
                            cluster_power=cluster_power)


def picpa_mimo(config: SystemConfig, drop: DeviceDrop) -> AllocationResult:
    beta = np.asarray(drop.beta, dtype=float)
    if np.any(beta <= 0):
        raise ValueError("PICPA requires strictly positive gains")
    w = 1.0 / beta
    power = config.P_rf * w / w.sum(axis=-1, keepdims=True)
    return AllocationResult(power, np.ones(power.shape, bool), PICPA, MMIMO)


def picpa_noma(config: SystemConfig, clustering: Clustering) -> AllocationResult:
    """Equal cluster budgets, split inside each pair in favour of the edge.

    The center share ``p_ref * b_e / (b_c - b_e)`` exceeds the cluster budget
    when ``b_c < 2 b_e``; such pairs fall back to an equal split.
    """
    _check_even(clustering.K)
    gap = clustering.delta_beta
    if np.any(gap <= 0):
        raise ValueError("degenerate cluster: center and edge gains are equal")
    p_ref = 2.0 * config.P_rf / clustering.K
    p_center = p_ref * clustering.beta_edge / gap
    p_center = np.where(p_center > p_ref, p_ref / 2.0, p_center)
    p_edge = p_ref - p_center
    power = _scatter(clustering, p_center, p_edge)
    return AllocationResult(power, np.ones(power.shape, bool), PICPA, NOMA,
                            cluster_power=np.full(gap.shape, p_ref))


def wf_mimo(config: SystemConfig, drop: DeviceDrop) -> AllocationResult:
    power, active, mu = water_fill(drop.beta, config.P_rf)
    return AllocationResult(power, active, WF, MMIMO, water_level=mu)


def dwf_noma(config: SystemConfig, clustering: Clustering) -> AllocationResult:
    """Water-fill over clusters using the pair gap as gain, then halve.

    Clusters are only ever dropped whole; both members of a surviving
    cluster receive half of its power.
    """
    _check_even(clustering.K)
    gap = clustering.delta_beta
    if np.any(gap <= 0):
        raise ValueError("degenerate cluster: center and edge gains are equal")
    cluster_power, cluster_active, mu = water_fill(gap, config.P_rf)
    half = cluster_power / 2.0
    power = _scatter(clustering, half, half)
    active = _scatter(clustering, cluster_active, cluster_active)
    return AllocationResult(power, active, DWF, NOMA, water_level=mu,
                            cluster_power=cluster_power)


def cluster_powers(clustering: Clustering, allocation: AllocationResult):
    """(center, edge) powers per cluster, shape ``(..., K/2)`` each."""
    p = allocation.power
    return (np.take_along_axis(p, clustering.center_ids, axis=-1),
            np.take_along_axis(p, clustering.edge_ids, axis=-1))


def sic_feasibility(clustering: Clustering, allocation: AllocationResult,
                    config: SystemConfig, mode: str | None = None):
    """Check per cluster that the center device can decode the edge signal.

    ``edge-reference`` compares the center's decode-the-edge SINR with the
    edge device's own SINR (the usual decodability condition).
    ``paper-eq11`` compares it with the center device's own SINR instead.

    Returns
    -------
    margin, feasible : np.ndarray
        Shape ``(..., K/2)``; ``feasible = margin >= 0``.
    """
    if allocation.system != NOMA:
        raise ValueError("SIC feasibility only applies to NOMA allocations")
    mode = mode or config.sic_mode
    m_bar = config.M + 1 - clustering.K / 2
    p_c, p_e = cluster_powers(clustering, allocation)
    b_c, b_e = clustering.beta_center, clustering.beta_edge
    s_ce = m_bar * b_c * p_e / (m_bar * b_c * p_c + 1.0)
    if mode == "edge-reference":
        ref = b_e * p_e / (b_e * p_c + 1.0)
    elif mode == "paper-eq11":
        ref = m_bar * b_c * p_c
    else:
        raise ValueError(f"unknown SIC mode {mode!r}")
    margin = s_ce - ref
    return margin, margin >= 0


def allocate(system: str, policy: str, config: SystemConfig, drop: DeviceDrop,
             clustering: Clustering | None = None) -> AllocationResult:
    """Dispatch a (system, policy) combination."""
    if policy not in POLICIES.get(system, ()):
        raise ValueError(f"policy {policy!r} is not defined for system {system!r}")
    if system == MMIMO:
        if policy == EPA:
            return epa_mimo(config, drop.beta.shape[:-1], drop.beta.shape[-1])
        if policy == PICPA:
            return picpa_mimo(config, drop)
        return wf_mimo(config, drop)
    clustering = clustering if clustering is not None else partition_and_pair(drop)
    if policy == EPA:
        return epa_noma(config, clustering)
    if policy == PICPA:
        return picpa_noma(config, clustering)
    return dwf_noma(config, clustering)

