"""Monte-Carlo check of the closed-form ZF array gains.

Channels are drawn explicitly, precoded with the multi-user pseudo-inverse
(unit-norm columns) and pushed through the per-symbol SINR expression. The
exact ZF gain is Gamma(M - N + 1, 1) distributed, so its mean M - N + 1 is
the reference; the closed forms use M - K (mMIMO) and M + 1 - K/2 (NOMA),
which sit at the two ends of the bracket [M - N, M - N + 1].
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from nomamimo.allocation import MMIMO, NOMA, AllocationResult, cluster_powers
from nomamimo.config import SystemConfig
from nomamimo.geometry import DeviceDrop, partition_and_pair
from nomamimo.rates import (data_fraction, log2_1p, mimo_array_gain,
                            mimo_rates, noma_array_gain, noma_rates)

_CHUNK = 2048


def rayleigh_channels(rng: np.random.Generator, M: int, N: int, trials: int):
    """i.i.d. CN(0, 1) entries, shape ``(trials, M, N)``; column k is h'_k."""
    re = rng.standard_normal((trials, M, N))
    im = rng.standard_normal((trials, M, N))
    return (re + 1j * im) * np.sqrt(0.5)


def zf_precoder(H: np.ndarray):
    """Unit-norm ZF beams for the received-signal model ``y_i = h_i^T x``.

    With ``conj(H) = Q R`` the pseudo-inverse of ``H^T`` is ``Q R^{-H}``, so
    the Gram inverse never has to be formed explicitly.

    Returns
    -------
    G : np.ndarray
        ``(..., M, N)`` precoder with unit-norm columns.
    gain : np.ndarray
        ``(..., N)`` effective gains ``|h_k^T g_k|^2``.
    """
    Q, R = np.linalg.qr(np.conj(H))
    n = R.shape[-1]
    eye = np.broadcast_to(np.eye(n), R.shape)
    R_inv_h = np.linalg.solve(np.conj(np.swapaxes(R, -1, -2)), eye)
    G = Q @ R_inv_h
    norms = np.linalg.norm(G, axis=-2)
    return G / norms[..., None, :], 1.0 / norms**2


def empirical_array_gain(M: int, N: int, trials: int,
                         rng: np.random.Generator, k: int = 0):
    """Sample mean and standard error of the ZF gain seen by beam ``k``."""
    if not 1 <= N < M:
        raise ValueError(f"need 1 <= N < M, got M={M}, N={N}")
    if trials < 100:
        raise ValueError("use at least 100 trials")
    gains = []
    for start in range(0, trials, _CHUNK):
        H = rayleigh_channels(rng, M, N, min(_CHUNK, trials - start))
        gains.append(zf_precoder(H)[1][:, k])
    g = np.concatenate(gains)
    return float(g.mean()), float(g.std(ddof=1) / np.sqrt(trials))


@dataclass
class ValidationReport:
    system: str
    M: int
    N: int
    trials: int
    empirical_rate: list
    closed_form_rate: list
    relative_error: list
    mean_gain: list
    gain_stderr: list
    closed_form_gain: float
    bracket: tuple
    gain_in_bracket: bool
    closed_form_in_bracket: bool
    convention_gap: float

    def to_dict(self) -> dict:
        return asdict(self)


def _rel_err(emp, closed):
    denom = np.maximum(np.abs(emp), 1e-300)
    return np.where((emp == 0) & (closed == 0), 0.0, np.abs(closed - emp) / denom)


def validate_closed_form(config: SystemConfig, drop: DeviceDrop,
                         allocation: AllocationResult, trials: int,
                         rng: np.random.Generator) -> ValidationReport:
    """Compare closed-form rates against explicit-precoding Monte Carlo.

    For NOMA the beams are built from the cluster-head (center) channels.
    Edge devices see their cluster's beam through an independent Rayleigh
    channel; inter-cluster leakage at the edge is ignored, as the closed
    form assumes. Only the center devices carry an array gain and enter the
    bracket check.
    """
    K, M = config.K, config.M
    tau = data_fraction(config)
    beta = np.asarray(drop.beta, dtype=float)
    power = np.asarray(allocation.power, dtype=float)
    if beta.ndim != 1:
        raise ValueError("validate_closed_form works on a single drop")

    if allocation.system == MMIMO:
        N = K
        if N >= M:
            raise ValueError("mMIMO validation needs K < M")
        closed = mimo_rates(config, drop, allocation).per_device_rate
        closed_gain = float(mimo_array_gain(config))
        b_own, p_own = beta, power
    elif allocation.system == NOMA:
        N = K // 2
        if N >= M:
            raise ValueError("NOMA validation needs K/2 < M")
        cl = partition_and_pair(drop)
        closed = noma_rates(config, cl, allocation).per_device_rate
        closed_gain = float(noma_array_gain(config))
        p_c, p_e = cluster_powers(cl, allocation)
        b_c, b_e = cl.beta_center, cl.beta_edge
        b_own, p_own = b_c, p_c
    else:
        raise ValueError(f"unknown system {allocation.system!r}")

    rate_sum = np.zeros(K)
    gain_sum = np.zeros(N)
    gain_sq = np.zeros(N)
    beam_power = p_own if allocation.system == MMIMO else p_c + p_e
    for start in range(0, trials, _CHUNK):
        t = min(_CHUNK, trials - start)
        H = rayleigh_channels(rng, M, N, t)
        G, gain = zf_precoder(H)
        E = np.abs(np.einsum("tmi,tmk->tik", H, G)) ** 2
        leak = (E * beam_power).sum(-1) - gain * beam_power
        sinr = b_own * p_own * gain / (b_own * leak + 1.0)
        gain_sum += gain.sum(0)
        gain_sq += (gain**2).sum(0)
        if allocation.system == MMIMO:
            rate_sum += log2_1p(sinr).sum(0)
        else:
            h_edge = rayleigh_channels(rng, M, N, t)
            a = np.abs(np.einsum("tmk,tmk->tk", h_edge, G)) ** 2
            sinr_e = b_e * p_e * a / (b_e * p_c * a + 1.0)
            np.add.at(rate_sum, cl.center_ids, log2_1p(sinr).sum(0))
            np.add.at(rate_sum, cl.edge_ids, log2_1p(sinr_e).sum(0))
    empirical = tau * rate_sum / trials
    mean_gain = gain_sum / trials
    stderr = np.sqrt(np.maximum(gain_sq / trials - mean_gain**2, 0.0)
                     * trials / (trials - 1) / trials)
    lo, hi = M - N, M - N + 1
    in_bracket = bool(np.all((mean_gain >= lo - 3 * stderr)
                             & (mean_gain <= hi + 3 * stderr)))
    return ValidationReport(
        system=allocation.system, M=M, N=N, trials=trials,
        empirical_rate=empirical.tolist(),
        closed_form_rate=np.asarray(closed).tolist(),
        relative_error=_rel_err(empirical, np.asarray(closed)).tolist(),
        mean_gain=mean_gain.tolist(), gain_stderr=stderr.tolist(),
        closed_form_gain=closed_gain, bracket=(lo, hi),
        gain_in_bracket=in_bracket,
        closed_form_in_bracket=lo <= closed_gain <= hi,
        convention_gap=1.0 / (M - N),
    )
