"""Command-line entry point: ``nomamimo {sweep,areas,tradeoff,validate,plot-data}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from nomamimo import __version__
from nomamimo.allocation import MMIMO, NOMA, POLICIES, allocate
from nomamimo.config import (PATHLOSS_MODES, SWEEP_DEFAULTS, ConfigError,
                             SystemConfig, from_dict, load_config, preset)
from nomamimo.geometry import drop_devices
from nomamimo.harness import (DEFAULT_COMBOS, area_table, combo_name,
                              ratio_table, read_sweep_csv, run_sweep, summarize,
                              tradeoff_rows, write_summary, write_sweep_csv)
from nomamimo.metrics import NORM_CROSSING, NORM_PRODUCT
from nomamimo.oracle import empirical_array_gain, validate_closed_form


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _snapshot(cfg: SystemConfig, sweep: dict) -> dict:
    d = cfg.to_dict()
    energy = d.pop("energy")
    return {"scenario": d, "energy": energy, "sweep": sweep}


def _resolve_config(args) -> tuple[SystemConfig, dict]:
    if getattr(args, "replay", None):
        manifest = json.loads(Path(args.replay).read_text())
        cfg, sweep = from_dict(manifest["config"])
    elif args.config:
        base = preset(args.preset) if args.preset else None
        cfg, sweep = load_config(args.config, base)
    elif args.preset:
        cfg, sweep = preset(args.preset), dict(SWEEP_DEFAULTS)
    else:
        cfg, sweep = SystemConfig(), dict(SWEEP_DEFAULTS)
    if getattr(args, "pathloss_mode", None):
        cfg = dataclasses.replace(cfg, pathloss_mode=args.pathloss_mode)
    for key in ("seed", "trials"):
        val = getattr(args, key, None)
        if val is not None:
            sweep[key] = val
    return cfg, sweep


def _print_table(rows: list[dict], cols: list[str], out=None) -> None:
    out = out or sys.stdout

    def cell(v):
        return f"{v:.6g}" if isinstance(v, float) else str(v)
    widths = [max(len(c), *(len(cell(r[c])) for r in rows)) for c in cols]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)), file=out)
    for r in rows:
        print("  ".join(cell(r[c]).ljust(w) for c, w in zip(cols, widths)), file=out)


def _write_rows(path: Path, rows: list[dict], cols: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n",
                           extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def cmd_sweep(args) -> int:
    cfg, sweep = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    t0 = time.perf_counter()
    result = run_sweep(cfg, DEFAULT_COMBOS, trials=int(sweep["trials"]),
                       master_seed=int(sweep["seed"]), threads=args.threads)
    write_sweep_csv(result, out / "sweep.csv")
    write_summary(summarize(result), out / "summary.json")
    manifest = {
        "command": ["sweep", *args.argv],
        "config_path": str(args.config) if args.config else None,
        "preset": args.preset,
        "config": _snapshot(cfg, sweep),
        "output_dir": str(out),
        "started": started,
        "finished": _now(),
        "elapsed_s": round(time.perf_counter() - t0, 3),
        "threads": args.threads,
        "tool_version": __version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {out / 'sweep.csv'}, summary.json, manifest.json "
          f"(M={cfg.M}, trials={sweep['trials']}, seed={sweep['seed']})")
    return 0


def cmd_areas(args) -> int:
    result = read_sweep_csv(args.input)
    areas = area_table(result)
    rows = [{"M": result.M, "combo": k, **v} for k, v in areas.items()]
    _print_table(rows, ["M", "combo", "area_se", "area_ee"])
    ratios = ratio_table(result, areas)
    if ratios:
        print()
        _print_table(ratios, ["M", "noma", "mmimo", "se_ratio", "ee_ratio"])
    out = Path(args.out) if args.out else Path(args.input).with_name("areas.csv")
    _write_rows(out, rows, ["M", "combo", "area_se", "area_ee"])
    return 0


def cmd_tradeoff(args) -> int:
    result = read_sweep_csv(args.input)
    crits = [NORM_CROSSING, NORM_PRODUCT] if args.criterion == "both" else [args.criterion]
    rows = [r for c in crits for r in tradeoff_rows(result, c)]
    cols = ["M", "combo", "criterion", "rho", "se", "ee", "active_frac", "fairness"]
    _print_table(rows, cols)
    if args.out:
        _write_rows(Path(args.out), rows, cols)
    return 0


def cmd_validate(args) -> int:
    base = preset(args.preset) if args.preset else SystemConfig()
    system = args.system.upper()
    cfg = dataclasses.replace(base, M=args.m, K=args.k)
    rng = np.random.default_rng(args.seed)
    drop = drop_devices(cfg, rng)
    alloc = allocate(system, args.policy.upper(), cfg, drop)
    n = cfg.K if system == MMIMO else cfg.K // 2
    mean, se = empirical_array_gain(cfg.M, n, args.trials, rng)
    report = validate_closed_form(cfg, drop, alloc, args.trials, rng)
    lo, hi = report.bracket
    single_ok = lo - 3 * se <= mean <= hi + 3 * se
    ok = single_ok and report.gain_in_bracket and report.closed_form_in_bracket
    print(f"system={system} M={cfg.M} K={cfg.K} N={n} trials={args.trials}")
    print(f"empirical ZF gain (beam 0): {mean:.4f} +- {se:.4f}  "
          f"exact mean M-N+1 = {cfg.M - n + 1}")
    print(f"bracket [M-N, M-N+1] = [{lo}, {hi}]  closed-form gain = "
          f"{report.closed_form_gain:g}  convention gap = {report.convention_gap:.4f}")
    print(f"per-beam gains in bracket: {report.gain_in_bracket}  "
          f"closed form in bracket: {report.closed_form_in_bracket}")
    err = np.asarray(report.relative_error)
    print(f"rate relative error: max {err.max():.4f}  mean {err.mean():.4f}")
    print("bracket check:", "PASS" if ok else "FAIL")
    if args.out:
        payload = {"empirical_gain": mean, "empirical_gain_stderr": se,
                   "bracket_check": ok, **report.to_dict()}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return 0 if ok else 1


# (figure tag, statistic, [(system, policy), ...]) ; one CSV per panel
_PANELS = [
    ("fig3a_se_epa", "se_mean", [(MMIMO, "EPA"), (NOMA, "EPA")]),
    ("fig3b_se_picpa", "se_mean", [(MMIMO, "PICPA"), (NOMA, "PICPA")]),
    ("fig3c_se_wf", "se_mean", [(MMIMO, "WF"), (NOMA, "DWF")]),
    ("fig4_active", "active_frac", DEFAULT_COMBOS),
    ("fig5_se_surface", "se_mean", [(NOMA, "EPA"), (MMIMO, "WF"), (NOMA, "DWF")]),
    ("fig6a_fairness_epa", "fairness_mean", [(MMIMO, "EPA"), (NOMA, "EPA")]),
    ("fig6b_fairness_picpa", "fairness_mean", [(MMIMO, "PICPA"), (NOMA, "PICPA")]),
    ("fig6c_fairness_wf", "fairness_mean", [(MMIMO, "WF"), (NOMA, "DWF")]),
    ("fig7a_ee_epa", "ee_mean", [(MMIMO, "EPA"), (NOMA, "EPA")]),
    ("fig7b_ee_picpa", "ee_mean", [(MMIMO, "PICPA"), (NOMA, "PICPA")]),
    ("fig7c_ee_wf", "ee_mean", [(MMIMO, "WF"), (NOMA, "DWF")]),
    ("fig8_ee_surface", "ee_mean", [(NOMA, "EPA"), (MMIMO, "WF"), (NOMA, "DWF")]),
]


def cmd_plot_data(args) -> int:
    results = [read_sweep_csv(p) for p in args.input]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for tag, stat, combos in _PANELS:
        cols = ["M", "rho"] + [combo_name(c) for c in combos]
        path = out / f"{tag}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for res in results:
                for i, r in enumerate(res.rho):
                    vals = []
                    for c in combos:
                        v = res.stats[c][stat][i] if c in res.stats else float("nan")
                        vals.append("" if np.isnan(v) else repr(float(v)))
                    w.writerow([res.M, repr(float(r)), *vals])
        written.append((tag, cols))
    if args.gnuplot:
        lines = ["set datafile separator ','", "set key autotitle columnhead",
                 "set xlabel 'loading rho'", "set terminal pngcairo size 900,600"]
        for tag, cols in written:
            lines.append(f"set output '{tag}.png'")
            plots = ", ".join(f"'{tag}.csv' using 2:{j + 1} with lines"
                              for j in range(2, len(cols)))
            lines.append(f"plot {plots}")
        (out / "plots.gp").write_text("\n".join(lines) + "\n")
    print(f"wrote {len(written)} panel files to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nomamimo", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run the loading sweep")
    s.add_argument("--config", type=Path)
    s.add_argument("--preset", choices=["paper-m64", "paper-m128", "paper-m256"])
    s.add_argument("--replay", type=Path, help="re-run from a manifest.json")
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--pathloss-mode", choices=PATHLOSS_MODES)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("areas", help="area table from a persisted sweep.csv")
    a.add_argument("--in", dest="input", required=True, type=Path)
    a.add_argument("--out", type=Path)
    a.set_defaults(func=cmd_areas)

    t = sub.add_parser("tradeoff", help="SE-EE trade-off table from sweep.csv")
    t.add_argument("--in", dest="input", required=True, type=Path)
    t.add_argument("--criterion", default=NORM_CROSSING,
                   choices=[NORM_CROSSING, NORM_PRODUCT, "both"])
    t.add_argument("--out", type=Path)
    t.set_defaults(func=cmd_tradeoff)

    v = sub.add_parser("validate", help="Monte-Carlo check of the ZF array gains")
    v.add_argument("--m", type=int, default=16)
    v.add_argument("--k", type=int, default=8)
    v.add_argument("--system", choices=["mmimo", "noma"], default="mmimo")
    v.add_argument("--policy", default="EPA")
    v.add_argument("--trials", type=int, default=10000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--preset", choices=["paper-m64", "paper-m128", "paper-m256"])
    v.add_argument("--out", type=Path)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("plot-data", help="per-figure CSV panels")
    d.add_argument("--in", dest="input", required=True, type=Path, action="append")
    d.add_argument("--out", required=True, type=Path)
    d.add_argument("--gnuplot", action="store_true")
    d.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv[1:]
    try:
        if getattr(args, "threads", 1) < 1:
            raise ConfigError("--threads must be >= 1")
        return args.func(args)
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"nomamimo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
