#!/usr/bin/env python3
"""Plot a sweep CSV produced by `dudecap sweep`.

One line per association policy (the closed-form lower bound), a dashed
line for the saturating-integral approximation where the sweep emitted it,
and markers with 3-standard-error bars for the Monte Carlo columns when
the sweep was run with a simulation rider.

Usage:
    dudecap sweep --spec configs/rate_vs_distance.json --out sweep.csv
    python3 scripts/plot_sweep.py sweep.csv [-o sweep.png]
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # pragma: no cover - environment-dependent
    sys.exit("matplotlib is required: pip install matplotlib")

POLICY_LABELS = {
    "macro": "macro only",
    "sc": "small cell only",
    "decoupled": "decoupled",
    "coupled": "coupled",
}
POLICY_COLORS = {
    "macro": "tab:red",
    "sc": "tab:green",
    "decoupled": "tab:blue",
    "coupled": "tab:orange",
}


def parse_float(field):
    """CSV floats, with empty fields as None and 'inf'/'-inf' honored."""
    if field == "":
        return None
    return float(field)  # float() accepts 'inf' and '-inf' directly


def load_rows(path):
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        rows = list(reader)
    if not rows:
        sys.exit(f"{path}: no data rows")
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv_path", type=Path, help="sweep CSV file")
    parser.add_argument(
        "-o",
        "--out",
        type=Path,
        default=None,
        help="output image (default: CSV path with .png suffix)",
    )
    args = parser.parse_args()

    rows = load_rows(args.csv_path)
    out_path = args.out or args.csv_path.with_suffix(".png")

    # The swept axis is whichever of the two scenario coordinates varies.
    d0_values = {row["d0_m"] for row in rows}
    if len(d0_values) > 1:
        axis_key, axis_label, log_x = "d0_m", "macro distance $d_0$ [m]", False
    else:
        axis_key, axis_label, log_x = (
            "lambda_sc",
            "small-cell density $\\lambda$ [SC/m$^2$]",
            True,
        )

    by_policy = defaultdict(list)
    for row in rows:
        by_policy[row["policy"]].append(row)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for policy, policy_rows in by_policy.items():
        policy_rows.sort(key=lambda row: float(row[axis_key]))
        x = [float(row[axis_key]) for row in policy_rows]
        bound = [parse_float(row["bound_nats"]) for row in policy_rows]
        color = POLICY_COLORS.get(policy, "tab:gray")
        label = POLICY_LABELS.get(policy, policy)
        ax.plot(x, bound, color=color, label=f"{label} (bound)")

        approx = [parse_float(row["approx_bound_nats"]) for row in policy_rows]
        if any(value is not None for value in approx):
            xs = [xi for xi, a in zip(x, approx) if a is not None]
            ys = [a for a in approx if a is not None]
            ax.plot(xs, ys, color=color, linestyle="--", alpha=0.7,
                    label=f"{label} (approx)")

        mc = [parse_float(row["mc_mean_nats"]) for row in policy_rows]
        if any(value is not None for value in mc):
            xs = [xi for xi, m in zip(x, mc) if m is not None]
            ys = [m for m in mc if m is not None]
            err = [
                3.0 * parse_float(row["mc_stderr_nats"])
                for row in policy_rows
                if parse_float(row["mc_mean_nats"]) is not None
            ]
            ax.errorbar(xs, ys, yerr=err, color=color, marker="o",
                        markersize=3.5, linestyle="none", capsize=2,
                        alpha=0.8, label=f"{label} (simulated)")

    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel(axis_label)
    ax.set_ylabel("ergodic uplink rate [nats / channel use]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
