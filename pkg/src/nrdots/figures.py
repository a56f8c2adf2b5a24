"""Datasets behind each reference figure, built from fixed configuration templates.

Every dataset is CSV only; ladders (several parameter values on one plot)
are written in wide format with one column per ladder value.
"""

from __future__ import annotations

import math
import os

from .config import RunConfig, header_lines, parse_config, with_rel_tol
from .sweeps import (
    CURRENT_COLUMNS,
    SCATTER_COLUMNS,
    current_rows,
    emit,
    scatter_rows,
    write_csv,
)

THREE_DOT = """
[model]
kind = three_dot
eps_d = {eps_d}
lambda = {lam}
kappa = 100
{extra}
[leads]
temperature = 0.5
mu_a = -50
"""

FOUR_DOT = """
[model]
kind = four_dot
eps_d = {eps_d}
lambda = {lam}
kappa = {kappa}
delta = {delta}
{extra}
[leads]
temperature = 1
mu_u = -60
mu_d = -60
"""

VOLTAGE = "[sweep]\nkind = voltage\nstart = -40\nstop = 40\npoints = 41\n"
OMEGA = "[sweep]\nkind = omega\nstart = -4\nstop = 6\npoints = 201\n"
G_RATIO = "[sweep]\nkind = g_ratio\nstart = 0\nstop = 3\npoints = 301\n"

ALPHA_LADDER = (1.0, 4.0, 8.0)
NU_LADDER = (0.0, 0.08, 0.2, 0.4)
OMEGA_C = 10.0

FIGURES = {
    "fig3a": ("scatter", THREE_DOT.format(eps_d=1, lam=10, extra="") + G_RATIO),
    "fig3b": ("scatter", THREE_DOT.format(eps_d=1, lam=10, extra="") + OMEGA),
    "fig5a": ("scatter", FOUR_DOT.format(eps_d=1, lam=1, kappa=10, delta=0, extra="") + OMEGA),
    "fig5b": ("scatter", FOUR_DOT.format(eps_d=1, lam=1, kappa=10, delta=5, extra="") + OMEGA),
    "fig6a": ("current", THREE_DOT.format(eps_d=1, lam=10, extra="") + VOLTAGE),
    "fig6b": ("current", THREE_DOT.format(eps_d=20, lam=10, extra="") + VOLTAGE),
    "fig8": (
        "current",
        THREE_DOT.format(
            eps_d=1,
            lam=1,
            extra="g_mode = explicit\ng_abs = 1\ng_phase = %r\ngamma_mode = explicit\ngamma = 1\ntransport = lb"
            % math.pi,
        )
        + VOLTAGE,
    ),
    "fig9a": ("current", FOUR_DOT.format(eps_d=1, lam=1, kappa=30, delta=30, extra="") + VOLTAGE),
    "fig9b": ("current", FOUR_DOT.format(eps_d=20, lam=1, kappa=30, delta=30, extra="") + VOLTAGE),
    "fig10": (
        "current",
        FOUR_DOT.format(
            eps_d=1,
            lam=2,
            kappa=30,
            delta=30,
            extra="g_mode = explicit\nphi = %r\ngamma_mode = explicit\ngamma = 1\ntransport = lb" % math.pi,
        )
        + VOLTAGE,
    ),
}
LADDERS = ("fig7", "fig11")
FIGURE_IDS = tuple(sorted(list(FIGURES) + list(LADDERS), key=lambda s: (int(s[3:].rstrip("ab")), s)))


def figure_config(fig_id: str) -> RunConfig:
    return parse_config(FIGURES[fig_id][1])


def alpha_config(alpha: float) -> RunConfig:
    lam = math.sqrt(100.0 * alpha)
    extra = "gamma_mode = explicit\ngamma = 1"
    return parse_config(THREE_DOT.format(eps_d=1, lam=repr(lam), extra=extra) + VOLTAGE)


def nu_config(nu: float) -> RunConfig:
    text = THREE_DOT.format(eps_d=1, lam=10, extra="") + VOLTAGE
    text += f"[phonon]\nnu = {nu!r}\nomega_c = {OMEGA_C!r}\nonsite = renormalized\n"
    return parse_config(text)


def _ladder(configs, threads):
    rows = [current_rows(c, threads) for c in configs]
    converged = all(r.ok for block in rows for r in block)
    return rows, converged


def _wide(xs, blocks, index):
    out = []
    for i, x in enumerate(xs):
        out.append((x,) + tuple(block[i].values[index] for block in blocks))
    return out


def build_figure(fig_id: str, out_dir: str, threads: int = 1, rel_tol: float | None = None):
    """Write the dataset(s) for ``fig_id`` into ``out_dir``; returns (paths, converged)."""
    if fig_id not in FIGURES and fig_id not in LADDERS:
        raise KeyError(f"unknown figure id {fig_id!r}; choose from {', '.join(FIGURE_IDS)}")
    os.makedirs(out_dir, exist_ok=True)

    def tune(cfg):
        return cfg if rel_tol is None else with_rel_tol(cfg, rel_tol)

    if fig_id in FIGURES:
        kind, text = FIGURES[fig_id]
        cfg = tune(parse_config(text))
        path = os.path.join(out_dir, f"{fig_id}.csv")
        if kind == "scatter":
            rows, cols = scatter_rows(cfg, threads), SCATTER_COLUMNS
        else:
            rows, cols = current_rows(cfg, threads), CURRENT_COLUMNS
        with open(path, "w", newline="\n") as fh:
            emit(fh, cfg, rows, cols)
        return [path], all(r.ok for r in rows)

    if fig_id == "fig7":
        configs = [tune(alpha_config(a)) for a in ALPHA_LADDER]
        blocks, ok = _ladder(configs, threads)
        xs = [r.x for r in blocks[0]]
        cols = ["V"]
        for a in ALPHA_LADDER:
            cols += [f"J_L[alpha={a:g}]", f"J_R[alpha={a:g}]"]
        rows = [
            (x,) + tuple(v for block in blocks for v in block[i].values[:2]) for i, x in enumerate(xs)
        ]
        header = [f"## ladder: alpha = lambda^2/(kappa gamma) in {', '.join('%g' % a for a in ALPHA_LADDER)}; "
                  "the config below is the first rung"] + header_lines(configs[0])
        path = os.path.join(out_dir, "fig7.csv")
        with open(path, "w", newline="\n") as fh:
            write_csv(fh, header, cols, rows)
        return [path], ok

    configs = [tune(nu_config(nu)) for nu in NU_LADDER]
    blocks, ok = _ladder(configs, threads)
    xs = [r.x for r in blocks[0]]
    header = [f"## ladder: nu in {', '.join('%g' % n for n in NU_LADDER)}; the config below is the first rung"]
    header += header_lines(configs[0])
    paths = []
    for name, index in (("JL", 0), ("JR", 1)):
        cols = ["V"] + [f"{name[0]}_{name[1]}[nu={n:g}]" for n in NU_LADDER]
        path = os.path.join(out_dir, f"fig11_{name}.csv")
        with open(path, "w", newline="\n") as fh:
            write_csv(fh, header, cols, _wide(xs, blocks, index))
        paths.append(path)
    return paths, ok
