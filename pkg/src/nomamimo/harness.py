"""Loading sweep: Monte-Carlo averages per (system, policy) on K = 2, 4, ..., 2M.

Every trial at a grid point draws its drop from its own stream seeded with
``(master_seed, K, trial)``. All policies at that point see the same drops,
so comparisons between them are paired. Output is a pure function of the
config, combos, trial count and seed, whatever the thread count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nomamimo import __version__
from nomamimo.allocation import (DWF, EPA, MMIMO, NOMA, PICPA, POLICIES, WF,
                                 allocate, sic_feasibility)
from nomamimo.config import SystemConfig
from nomamimo.energy import total_power
from nomamimo.geometry import DeviceDrop, drop_devices, partition_and_pair
from nomamimo.metrics import (NORM_CROSSING, NORM_PRODUCT, CurveSamples,
                              area_under_curve, jain_index, tradeoff_point)
from nomamimo.rates import mimo_rates, noma_rates

SCHEMA_VERSION = 1
CSV_FIELDS = ["rho", "K", "system", "policy", "se_mean", "se_stderr", "ee_mean",
              "fairness_mean", "active_frac", "sic_violation_rate"]
STAT_FIELDS = CSV_FIELDS[4:]

DEFAULT_COMBOS = [(MMIMO, EPA), (MMIMO, PICPA), (MMIMO, WF),
                  (NOMA, EPA), (NOMA, PICPA), (NOMA, DWF)]
# NOMA policy compared against each mMIMO policy when forming area ratios
RATIO_PAIRS = [(EPA, EPA), (PICPA, PICPA), (WF, DWF)]


def combo_name(combo) -> str:
    return f"{combo[0]}-{combo[1]}"


def check_combos(combos) -> list[tuple[str, str]]:
    out = []
    for system, policy in combos:
        if policy not in POLICIES.get(system, ()):
            raise ValueError(f"incompatible combination {system}/{policy}")
        out.append((system, policy))
    if len(set(out)) != len(out):
        raise ValueError("duplicate combinations")
    return out


def trial_rng(master_seed: int, K: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, K, trial])


def paired_drops(config: SystemConfig, trials: int, master_seed: int) -> DeviceDrop:
    """Stack ``trials`` independent drops for ``config.K`` devices."""
    drops = [drop_devices(config, trial_rng(master_seed, config.K, t))
             for t in range(trials)]
    return DeviceDrop(distances=np.stack([d.distances for d in drops]),
                      beta=np.stack([d.beta for d in drops]),
                      angles=np.stack([d.angles for d in drops]))


def noma_valid(config: SystemConfig) -> bool:
    return config.K < 2 * config.M - 1


def _stderr(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


def evaluate_point(config: SystemConfig, combos, trials: int, master_seed: int
                   ) -> dict[tuple[str, str], dict[str, float]]:
    """Average every combination over ``trials`` shared drops at ``config.K``."""
    drop = paired_drops(config, trials, master_seed)
    clustering = partition_and_pair(drop)
    population = config.K if config.fairness_population == "devices" else config.M
    out = {}
    for system, policy in combos:
        if system == NOMA and not noma_valid(config):
            out[(system, policy)] = {f: math.nan for f in STAT_FIELDS}
            continue
        alloc = allocate(system, policy, config, drop, clustering)
        if system == MMIMO:
            report = mimo_rates(config, drop, alloc)
        else:
            report = noma_rates(config, clustering, alloc)
        se = report.sum_rate
        if config.power_count == "served":
            p_tot = total_power(config, served=alloc.active.sum(axis=-1)).total
        else:
            p_tot = total_power(config).total
        ee = se / p_tot
        fair = jain_index(report.per_device_rate, population)
        sic = math.nan
        if system == NOMA:
            _, feasible = sic_feasibility(clustering, alloc, config)
            cluster_active = np.take_along_axis(alloc.active, clustering.center_ids, -1)
            n_active = cluster_active.sum()
            sic = float((cluster_active & ~feasible).sum() / n_active) if n_active else 0.0
        out[(system, policy)] = {
            "se_mean": float(se.mean()),
            "se_stderr": _stderr(se),
            "ee_mean": float(np.mean(ee)),
            "fairness_mean": float(np.mean(fair)),
            "active_frac": float(alloc.active_fraction.mean()),
            "sic_violation_rate": sic,
        }
    return out


@dataclass
class SweepResult:
    """Per-combination statistics on the loading grid.

    ``stats[combo][field]`` is an array over ``K_grid``; NaN marks grid
    points where the combination is undefined (NOMA at K >= 2M - 1, and SIC
    rates for mMIMO).
    """

    M: int
    K_grid: np.ndarray
    combos: list
    stats: dict
    metadata: dict = field(default_factory=dict)

    @property
    def rho(self) -> np.ndarray:
        return self.K_grid / self.M

    def curve(self, combo, what: str = "se_mean") -> CurveSamples:
        return CurveSamples.dropping_missing(self.rho, self.stats[tuple(combo)][what])

    def aligned_curves(self, combo):
        """SE and EE curves restricted to the grid points where both exist."""
        se = np.asarray(self.stats[tuple(combo)]["se_mean"])
        ee = np.asarray(self.stats[tuple(combo)]["ee_mean"])
        ok = np.isfinite(se) & np.isfinite(ee)
        return CurveSamples(self.rho[ok], se[ok]), CurveSamples(self.rho[ok], ee[ok])

    def value_at(self, combo, what: str, rho: float) -> float:
        i = int(np.argmin(np.abs(self.rho - rho)))
        return float(self.stats[tuple(combo)][what][i])


def run_sweep(config: SystemConfig, combos=None, trials: int = 1000,
              master_seed: int = 42, threads: int = 1,
              K_grid=None) -> SweepResult:
    """Evaluate every combination on K = 2, 4, ..., 2M (or ``K_grid``)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    combos = check_combos(combos or DEFAULT_COMBOS)
    K_grid = np.arange(2, 2 * config.M + 1, 2) if K_grid is None else np.asarray(K_grid)
    configs = [config.with_devices(int(K)) for K in K_grid]

    def work(cfg):
        return evaluate_point(cfg, combos, trials, master_seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(work, configs))
    else:
        points = [work(cfg) for cfg in configs]

    stats = {c: {f: np.array([p[c][f] for p in points]) for f in STAT_FIELDS}
             for c in combos}
    metadata = {
        "master_seed": master_seed,
        "trials": trials,
        "config_hash": config.digest(),
        "config": config.to_dict(),
        "pathloss_mode": config.pathloss_mode,
        "paired_drops": True,
        "coherence_units": "symbols",
        "sic_mode": config.sic_mode,
        "fairness_population": config.fairness_population,
        "power_count": config.power_count,
        "tool_version": __version__,
    }
    return SweepResult(M=config.M, K_grid=K_grid, combos=combos, stats=stats,
                       metadata=metadata)


def area_table(result: SweepResult) -> dict:
    return {combo_name(c): {"area_se": area_under_curve(result.curve(c, "se_mean"), result.M),
                            "area_ee": area_under_curve(result.curve(c, "ee_mean"), result.M)}
            for c in result.combos}


def ratio_table(result: SweepResult, areas: dict | None = None) -> list[dict]:
    areas = areas or area_table(result)
    rows = []
    for m_pol, n_pol in RATIO_PAIRS:
        a, b = combo_name((MMIMO, m_pol)), combo_name((NOMA, n_pol))
        if a in areas and b in areas:
            rows.append({
                "M": result.M, "mmimo": a, "noma": b,
                "se_ratio": areas[b]["area_se"] / areas[a]["area_se"],
                "ee_ratio": areas[b]["area_ee"] / areas[a]["area_ee"],
            })
    return rows


def tradeoff_rows(result: SweepResult, criterion: str = NORM_CROSSING) -> list[dict]:
    rows = []
    for c in result.combos:
        se, ee = result.aligned_curves(c)
        try:
            tp = tradeoff_point(se, ee, criterion)
        except ValueError:
            continue
        rows.append({
            "M": result.M, "combo": combo_name(c), "criterion": criterion,
            "rho": tp.rho, "se": tp.se, "ee": tp.ee,
            "active_frac": result.value_at(c, "active_frac", tp.rho),
            "fairness": result.value_at(c, "fairness_mean", tp.rho),
        })
    return rows


def summarize(result: SweepResult) -> dict:
    """Areas, NOMA/mMIMO area ratios, peak SE and trade-off tables."""
    areas = area_table(result)
    per_combo = []
    for c in result.combos:
        se = result.curve(c, "se_mean")
        i = int(np.argmax(se.value))
        per_combo.append({"combo": combo_name(c), **areas[combo_name(c)],
                          "peak_se": float(se.value[i]), "peak_rho": float(se.rho[i])})
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": result.metadata,
        "M": result.M,
        "combos": per_combo,
        "ratios": ratio_table(result, areas),
        "tradeoff": {crit: tradeoff_rows(result, crit)
                     for crit in (NORM_CROSSING, NORM_PRODUCT)},
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for i, K in enumerate(result.K_grid):
            for c in result.combos:
                st = result.stats[c]
                w.writerow([_fmt(float(K / result.M)), int(K), c[0], c[1]]
                           + [_fmt(float(st[f][i])) for f in STAT_FIELDS])


def read_sweep_csv(path) -> SweepResult:
    """Rebuild a :class:`SweepResult` from ``sweep.csv`` (metadata is lost)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    Ks = sorted({int(r["K"]) for r in rows})
    r0 = next(r for r in rows if float(r["rho"]) > 0)
    M = round(int(r0["K"]) / float(r0["rho"]))
    combos = []
    for r in rows:
        c = (r["system"], r["policy"])
        if c not in combos:
            combos.append(c)
    index = {K: i for i, K in enumerate(Ks)}
    stats = {c: {f: np.full(len(Ks), math.nan) for f in STAT_FIELDS} for c in combos}
    for r in rows:
        st = stats[(r["system"], r["policy"])]
        for f in STAT_FIELDS:
            st[f][index[int(r["K"])]] = float(r[f]) if r[f] != "" else math.nan
    return SweepResult(M=M, K_grid=np.array(Ks), combos=combos, stats=stats,
                       metadata={"source": str(path)})


def write_summary(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=False) + "\n")
