"""Device drops in the two-annulus cell, large-scale gains, and NOMA pairing.

All array-valued containers accept leading batch dimensions: a single drop
has ``distances.shape == (K,)``, a stack of trials ``(trials, K)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nomamimo.config import ConfigError, SystemConfig


@dataclass(frozen=True)
class DeviceDrop:
    """Distances (m), polar angles (rad) and linear large-scale gains.

    The first K/2 entries on the device axis are the center-annulus devices,
    the remaining K/2 the edge-annulus devices. Angles are only kept for
    plotting; paired devices are assumed aligned with the base station.
    """

    distances: np.ndarray
    beta: np.ndarray
    angles: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.beta.shape[-1]


@dataclass(frozen=True)
class Clustering:
    """Sorted center/edge partitions and their (center, edge) pairing.

    ``center_ids[..., k]`` is the k-th strongest device and ``edge_ids[..., k]``
    the k-th weakest, so cluster k joins them; ``delta_beta[..., k]`` is the
    gain difference of that pair and is non-increasing in k.
    """

    center_ids: np.ndarray
    edge_ids: np.ndarray
    beta_center: np.ndarray
    beta_edge: np.ndarray

    @property
    def delta_beta(self) -> np.ndarray:
        return self.beta_center - self.beta_edge

    @property
    def pairs(self) -> np.ndarray:
        """(..., K/2, 2) array of (center, edge) device indices."""
        return np.stack([self.center_ids, self.edge_ids], axis=-1)

    @property
    def n_clusters(self) -> int:
        return self.center_ids.shape[-1]

    @property
    def K(self) -> int:
        return 2 * self.n_clusters


def pathloss_linear(d, config: SystemConfig):
    """Noise-normalized linear large-scale gain at distance ``d`` (m)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if config.pathloss_mode == "normalized-reference":
        return (d / config.d_ref) ** (-config.xi)
    atten_db = config.beta0_db + 10.0 * config.xi * np.log10(d)
    return 10.0 ** (-(atten_db + config.noise_norm_db) / 10.0)


def _annulus_radii(u, r_in, r_out):
    # inverse CDF of the area-uniform radial law
    return np.sqrt(r_in**2 + u * (r_out**2 - r_in**2))


def drop_devices(config: SystemConfig, rng: np.random.Generator,
                 trials: int | None = None) -> DeviceDrop:
    """Drop K/2 devices uniformly over each annulus.

    With ``trials`` given, returns a stacked drop of shape ``(trials, K)``.
    """
    config.validate()
    half = config.K // 2
    shape = (half,) if trials is None else (trials, half)
    r_c = _annulus_radii(rng.random(shape), config.d_min, config.d1)
    r_e = _annulus_radii(rng.random(shape), config.d2, config.d_max)
    angles = rng.uniform(0.0, 2 * np.pi, size=shape[:-1] + (config.K,))
    d = np.concatenate([r_c, r_e], axis=-1)
    return DeviceDrop(distances=d, beta=pathloss_linear(d, config), angles=angles)


def partition_and_pair(drop: DeviceDrop) -> Clustering:
    """Sort devices by gain and pair the k-th strongest with the k-th weakest.

    Ties are broken by device index (stable sort), so equal gains are
    deterministic but produce a zero gap.
    """
    beta = np.asarray(drop.beta)
    K = beta.shape[-1]
    if K % 2:
        raise ConfigError(f"pairing needs an even number of devices, got {K}")
    order = np.argsort(-beta, axis=-1, kind="stable")
    half = K // 2
    center = order[..., :half]
    edge = order[..., ::-1][..., :half]
    return Clustering(
        center_ids=center,
        edge_ids=edge,
        beta_center=np.take_along_axis(beta, center, axis=-1),
        beta_edge=np.take_along_axis(beta, edge, axis=-1),
    )
