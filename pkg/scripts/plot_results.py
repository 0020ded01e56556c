"""Plot accuracy and robustness curves from a results directory (needs matplotlib).

    python scripts/plot_results.py results/protocol_synth
"""
import argparse
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from reconbench.experiment import read_csv  # noqa: E402


def curves(rows, key, series):
    out = defaultdict(list)
    for r in rows:
        if r["status"].startswith("ok") and r[key]:
            out[tuple(r[s] for s in series)].append((int(r["k"]), float(r[key])))
    return {name: sorted(points) for name, points in out.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("results")
    args = ap.parse_args()
    root = Path(args.results)

    acc = curves(read_csv(root / "accuracy.csv"), "accuracy", ("classifier", "method"))
    classifiers = sorted({c for c, _ in acc})
    fig, axes = plt.subplots(1, len(classifiers), figsize=(5 * len(classifiers), 4), squeeze=False)
    for ax, clf in zip(axes[0], classifiers):
        for (c, method), pts in sorted(acc.items()):
            if c == clf:
                ax.plot(*zip(*pts), marker="o", label=method)
        ax.set(xscale="log", xlabel="K", ylabel="test accuracy", title=clf)
        ax.legend()
    fig.tight_layout()
    fig.savefig(root / "accuracy.png", dpi=120)

    rob = read_csv(root / "robustness.csv")
    for metric in ("mse", "arr"):
        data = curves(rob, metric, ("attack", "method"))
        attacks = sorted({a for a, _ in data})
        fig, axes = plt.subplots(1, len(attacks), figsize=(4 * len(attacks), 4), squeeze=False, sharey=True)
        for ax, attack in zip(axes[0], attacks):
            for (a, method), pts in sorted(data.items()):
                if a == attack:
                    ax.plot(*zip(*pts), marker="o", label=method)
            ax.set(xscale="log", xlabel="K", title=attack)
        axes[0][0].set_ylabel(metric.upper())
        axes[0][0].legend()
        fig.tight_layout()
        fig.savefig(root / f"{metric}.png", dpi=120)
    print(f"wrote accuracy.png, mse.png and arr.png to {root}")


if __name__ == "__main__":
    main()
