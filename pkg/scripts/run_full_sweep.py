"""Run the loading sweep for M = 64, 128 and 256 and emit per-figure CSVs.

Usage::

    python3 scripts/run_full_sweep.py --out results --trials 1000 --threads 4

Each M lands in ``<out>/m<M>/`` (sweep.csv, summary.json, manifest.json);
the combined panel files go to ``<out>/plots/``.
"""

import argparse
import sys

from nomamimo.cli import main as cli


def run(out: str, trials: int, seed: int, threads: int, config: str | None) -> int:
    inputs = []
    for M in (64, 128, 256):
        target = f"{out}/m{M}"
        argv = ["sweep", "--preset", f"paper-m{M}", "--out", target,
                "--trials", str(trials), "--seed", str(seed), "--threads", str(threads)]
        if config:
            argv += ["--config", config]
        code = cli(argv)
        if code:
            return code
        cli(["areas", "--in", f"{target}/sweep.csv"])
        cli(["tradeoff", "--in", f"{target}/sweep.csv", "--criterion", "both",
             "--out", f"{target}/tradeoff.csv"])
        inputs += ["--in", f"{target}/sweep.csv"]
    return cli(["plot-data", *inputs, "--out", f"{out}/plots", "--gnuplot"])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--config", help="TOML overrides applied on top of each preset")
    a = ap.parse_args()
    sys.exit(run(a.out, a.trials, a.seed, a.threads, a.config))
