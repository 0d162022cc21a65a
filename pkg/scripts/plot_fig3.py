"""Render the four squeezing panels for a parameter file (needs matplotlib).

    python3 scripts/plot_fig3.py configs/fig3.json fig3.png
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from darkpair.cli import load_config
from darkpair.gaussian import build_model, evolve, excitations, minimal_variance, variances
from darkpair.params import derive_rates, predict_optimal_detuning, predict_optimal_time, predict_variance
from darkpair.sweep import Axis, SweepSpec, run_sweep


def main(config, out):
    p = load_config(config)
    d = derive_rates(p)
    t_star = predict_optimal_time(d)
    fig, ax = plt.subplots(2, 2, figsize=(10, 8))

    spec = SweepSpec(Axis("delta_big", 0.2, 5, 40, log=True, relative=True), p,
                     Axis("t", 0.1, 2, 40, relative=True), outputs=("min_var",))
    rows = run_sweep(spec, jobs=4)
    grid = np.array([r["min_var"] for r in rows]).reshape(40, 40)
    x = spec.axis_values(spec.axis1) / predict_optimal_detuning(p)
    y = spec.axis_values(spec.axis2) / t_star
    mesh = ax[0, 0].pcolormesh(x, y, np.log10(grid.T), shading="auto")
    fig.colorbar(mesh, ax=ax[0, 0], label="log10 min_var")
    ax[0, 0].set(xscale="log", xlabel="Delta / Delta_opt", ylabel="t / t*")

    states = evolve(build_model(p, d), 2 * t_star)
    t = np.array([s.time for s in states])
    ax[0, 1].semilogy(d.xi * t, [variances(s)[0] for s in states], label="engine var Y+")
    ax[0, 1].semilogy(d.xi * t, [minimal_variance(s) for s in states], label="engine min_var")
    ax[0, 1].semilogy(d.xi * t[t > 0], predict_variance(d, t[t > 0]), "--", label="closed form")
    ax[0, 1].set(xlabel="xi t", ylabel="variance", ylim=(1e-2, 1))
    ax[0, 1].legend()

    ax[1, 0].semilogy(d.xi * t, [sum(excitations(s)) for s in states])
    ax[1, 0].set(xlabel="xi t", ylabel="total excitations")

    spec = SweepSpec(Axis("delta_bar", -3, 3, 61, relative=True), p, outputs=("min_var",))
    rows = run_sweep(spec, jobs=4)
    ax[1, 1].plot(spec.axis_values(spec.axis1) / d.xi, [r["min_var"] for r in rows])
    ax[1, 1].set(xlabel="delta_bar / xi", ylabel="min_var at t*")

    fig.tight_layout()
    fig.savefig(out, dpi=120)


if __name__ == "__main__":
    main(*sys.argv[1:3])
