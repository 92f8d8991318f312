"""Fairness, per-antenna area under a loading curve, SE/EE trade-off points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_PRODUCT, NORM_CROSSING = "norm-product", "norm-crossing"


@dataclass(frozen=True)
class CurveSamples:
    """A curve sampled on an ascending loading grid in (0, 2]."""

    rho: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        value = np.asarray(self.value, dtype=float)
        if rho.ndim != 1 or rho.shape != value.shape:
            raise ValueError("rho and value must be 1-D and of equal length")
        if np.any(np.diff(rho) <= 0):
            raise ValueError("rho must be strictly increasing")
        if not np.all(np.isfinite(value)) or np.any(value < 0):
            raise ValueError("curve values must be finite and non-negative")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "value", value)

    @classmethod
    def dropping_missing(cls, rho, value) -> "CurveSamples":
        """Build from samples that may contain NaN gap markers."""
        rho = np.asarray(rho, dtype=float)
        value = np.asarray(value, dtype=float)
        ok = np.isfinite(value)
        return cls(rho[ok], value[ok])


def jain_index(rates, population: int | None = None):
    """Jain's index ``(sum R)^2 / (N sum R^2)`` over the last axis.

    ``population`` defaults to the number of rates; dropped devices should be
    passed as zeros. Returns 0 where every rate is zero.
    """
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0 or rates.shape[-1] == 0:
        raise ValueError("jain_index needs at least one rate")
    n = rates.shape[-1] if population is None else population
    if n < 1:
        raise ValueError("population must be >= 1")
    s = rates.sum(axis=-1)
    s2 = np.square(rates).sum(axis=-1)
    safe = np.where(s2 > 0, s2, 1.0)
    out = np.where(s2 > 0, s * s / (n * safe), 0.0)
    return out[()] if out.ndim == 0 else out


def area_under_curve(curve: CurveSamples, M: int) -> float:
    """Trapezoidal area under the curve divided by M.

    A zero sample at rho = 0 is prepended since sweeps start at K = 2.
    """
    if curve.rho.size < 2:
        raise ValueError("area_under_curve needs at least two samples")
    if M < 1:
        raise ValueError("M must be positive")
    rho, val = curve.rho, curve.value
    if rho[0] > 0:
        rho = np.concatenate([[0.0], rho])
        val = np.concatenate([[0.0], val])
    return float(np.trapezoid(val, rho)) / M


@dataclass(frozen=True)
class TradeoffPoint:
    rho: float
    se: float
    ee: float
    index: int
    criterion: str


def _minmax(x: np.ndarray, what: str) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi <= lo:
        raise ValueError(f"{what} curve is constant; normalization is degenerate")
    return (x - lo) / (hi - lo)


def tradeoff_point(se: CurveSamples, ee: CurveSamples,
                   criterion: str = NORM_CROSSING) -> TradeoffPoint:
    """Pick the loading that balances spectral and energy efficiency.

    Both curves are min-max normalized. ``norm-product`` maximizes their
    product. ``norm-crossing`` looks only at the stretch between the EE peak
    and the SE peak, where one curve rises while the other falls, and takes
    the grid point where they are closest.
    """
    if se.rho.shape != ee.rho.shape or not np.array_equal(se.rho, ee.rho):
        raise ValueError("SE and EE curves must share the same loading grid")
    s = _minmax(se.value, "SE")
    e = _minmax(ee.value, "EE")
    if criterion == NORM_PRODUCT:
        i = int(np.argmax(s * e))
    elif criterion == NORM_CROSSING:
        lo, hi = sorted((int(np.argmax(e)), int(np.argmax(s))))
        i = lo + int(np.argmin(np.abs(s - e)[lo:hi + 1]))
    else:
        raise ValueError(f"unknown trade-off criterion {criterion!r}")
    return TradeoffPoint(rho=float(se.rho[i]), se=float(se.value[i]),
                         ee=float(ee.value[i]), index=i, criterion=criterion)
