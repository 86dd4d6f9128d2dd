/// Standalone matplotlib script copied next to every run's outputs. It
/// draws whichever figures the directory has data for.
pub const PLOT_SCRIPT: &str = r##"#!/usr/bin/env python3
"""Plot results written by `twostage run`. Usage: plot_figures.py [DIR]"""
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

PCCM = 0.5 + 1.0 / math.sqrt(8.0)
root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent


def read(name):
    path = root / name
    return pd.read_csv(path, comment="#") if path.exists() else None


sweep = read("layer_sweep.csv")
if sweep is not None:
    rows = sweep[sweep["state"] == "all"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for baseline, g in rows.groupby("baseline"):
        med = g.groupby("layers")["avg"].median()
        ax.plot(med.index, med.values, marker="o", label=baseline)
    ax.axhline(PCCM, color="k", ls="--", lw=1, label="PCCM")
    ax.set_xlabel("layers")
    ax.set_ylabel("average fidelity (median over seeds)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(root / "fidelity_vs_layers.png", dpi=150)

curve = read("iteration_curve.csv")
if curve is not None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    curve["stage"] = curve["stage"].astype(str)
    body = curve[curve["stage"] != "final"]
    for (baseline, seed), g in body.groupby(["baseline", "seed"]):
        ax.plot(g["iter"], g["avg"], lw=1, label=f"{baseline} seed {seed}")
        switch = g[g["stage"] == "2"]
        if len(switch) and (g["stage"] == "1").any():
            ax.axvline(switch["iter"].iloc[0], color="grey", ls=":", lw=1)
    ax.axhline(PCCM, color="k", ls="--", lw=1, label="PCCM")
    ax.set_xlabel("iteration")
    ax.set_ylabel("average fidelity")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(root / "fidelity_vs_iteration.png", dpi=150)

var = read("gradient_variance.csv")
if var is not None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for (init, obs), g in var.groupby(["init", "observable"]):
        ax.semilogy(g["n"], g["variance"], marker="o", label=f"{init} / {obs}")
    ax.set_xlabel("qubits")
    ax.set_ylabel("Var[dL/dtheta_1]")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(root / "gradient_variance.png", dpi=150)
"##;
