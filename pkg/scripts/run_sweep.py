"""Run a sweep from a TOML config and print a compact MSE table per attack.

    python scripts/run_sweep.py configs/protocol_synth.toml --out results/protocol_synth
"""
import argparse
from collections import defaultdict

from reconbench import config, experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=None)
    args = ap.parse_args()

    cfg = config.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out or cfg.output_dir
    manifest = experiment.run_experiment(cfg, out_dir=out, jobs=args.jobs)
    print(f"theta accuracy on originals: {manifest.acc_original:.4f}  error rows: {manifest.error_rows}")

    table = defaultdict(dict)
    for row in experiment.read_csv(f"{out}/robustness.csv"):
        if row["status"].startswith("ok"):
            table[(row["attack"], row["method"])][int(row["k"])] = float(row["mse"])
    grid = cfg.grid
    print(f"{'attack':8s} {'method':18s} " + " ".join(f"{k:>9d}" for k in grid))
    for (attack, method), by_k in sorted(table.items()):
        cells = " ".join(f"{by_k.get(k, float('nan')):9.4g}" for k in grid)
        print(f"{attack:8s} {method:18s} {cells}")
    raise SystemExit(manifest.exit_code)


if __name__ == "__main__":
    main()
