"""Command line: ``scatter``, ``current``, ``design`` and ``figure`` subcommands.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence
(rows are still written).
"""

from __future__ import annotations

import argparse
import cmath
import math
import sys
from typing import TextIO

import numpy as np

from .config import ConfigError, RunConfig, parse_config, with_rel_tol
from .scattering import (
    NoPhaseSolutionError,
    directional_coupling,
    directional_phase,
    four_dot_closed_form,
    four_dot_couplings,
    matched_gamma_four_dot,
    matched_gamma_three_dot,
    three_dot_closed_form,
)
from .sweeps import CURRENT_COLUMNS, SCATTER_COLUMNS, current_rows, emit, scatter_rows

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def cmd_scatter(cfg: RunConfig, stream: TextIO, threads: int = 1) -> int:
    rows = scatter_rows(cfg, threads)
    emit(stream, cfg, rows, SCATTER_COLUMNS)
    return EXIT_OK


def cmd_current(cfg: RunConfig, stream: TextIO, threads: int = 1) -> int:
    rows = current_rows(cfg, threads)
    emit(stream, cfg, rows, CURRENT_COLUMNS)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_NUMERIC


def _c(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}j"


def design_report(cfg: RunConfig) -> str:
    m = cfg.model
    lines = [f"model: {m.kind}"]
    lines += [f"note: {n}" for n in cfg.notes]
    if m.kind == "three_dot":
        fwd = directional_coupling(m.lam, m.kappa)
        rev = directional_coupling(m.lam, m.kappa, reverse=True)
        S = three_dot_closed_form(m.three_dot(), m.eps_d)
        lines += [
            f"lambda = {m.lam:.12g}, kappa = {m.kappa:.12g}, gamma = {m.gamma:.12g}, eps_d = {m.eps_d:.12g}",
            f"directional coupling g = {_c(fwd)} (d1 -> d2)",
            f"reverse coupling g* = {_c(rev)} (d2 -> d1)",
            f"matched gamma = {matched_gamma_three_dot(m.lam, m.kappa):.12g}",
            f"alpha = lambda^2/(kappa gamma) = {m.lam**2 / (m.kappa * m.gamma):.12g}",
            f"used coupling g = {_c(m.g)}",
            f"|S21(eps_d)|^2 = {abs(S['d2', 'd1'])**2:.12g}",
            f"|S12(eps_d)|^2 = {abs(S['d1', 'd2'])**2:.12g}",
            f"|S11(eps_d)|^2 = {abs(S['d1', 'd1'])**2:.12g}",
        ]
        Srev = three_dot_closed_form(type(m.three_dot())(m.eps_d, m.lam, m.kappa, m.gamma, rev), m.eps_d)
        lines.append(
            "reversed direction: S12 and S21 swap roles, "
            f"|S12(eps_d)|^2 = {abs(Srev['d1', 'd2'])**2:.12g}, |S21(eps_d)|^2 = {abs(Srev['d2', 'd1'])**2:.12g}"
        )
    elif m.kind == "four_dot":
        try:
            fwd = directional_phase(m.lam1, m.lam2, m.delta1, m.delta2, m.kappa)
            rev = directional_phase(m.lam1, m.lam2, m.delta1, m.delta2, m.kappa, reverse=True)
        except NoPhaseSolutionError as exc:
            raise ConfigError(f"model: {exc}") from None
        p = m.four_dot()
        c = four_dot_couplings(p)
        S = four_dot_closed_form(p, c["Delta"].real)
        lines += [
            f"lambda1 = {m.lam1:.12g}, lambda2 = {m.lam2:.12g}, delta1 = {m.delta1:.12g}, "
            f"delta2 = {m.delta2:.12g}, kappa = {m.kappa:.12g}, gamma = {m.gamma:.12g}",
            f"directional loop phase phi = {fwd:.12g} (d1 -> d2)",
            f"reverse loop phase phi = {rev:.12g} (d2 -> d1)",
            f"matched gamma = {matched_gamma_four_dot(m.lam1, m.lam2, m.delta1, m.delta2, m.kappa):.12g}",
            f"Delta = {c['Delta'].real:.12g}, Sigma = {c['Sigma'].real:.12g}",
            f"used loop phase phi = {m.phi:.12g}",
            f"|S21(Delta)|^2 = {abs(S['d2', 'd1'])**2:.12g}",
            f"|S12(Delta)|^2 = {abs(S['d1', 'd2'])**2:.12g}",
            f"|S11(Delta)|^2 = {abs(S['d1', 'd1'])**2:.12g}",
        ]
        if m.lam1 == m.lam2 and m.delta1 == -m.delta2:
            d, k = m.delta1, m.kappa
            lines.append(f"predicted |S21(Delta)|^2 = delta^2/(kappa^2+delta^2) = {d*d/(k*k+d*d):.12g}")
            lines.append(f"pi + 2 arctan(delta/kappa) = {cmath.phase(cmath.exp(1j*(math.pi+2*math.atan(d/k)))):.12g}")
        lines.append("reversed direction: S12 and S21 swap roles")
    else:
        raise ConfigError("model.kind: design needs three_dot or four_dot")
    return "\n".join(lines) + "\n"


def cmd_design(cfg: RunConfig, stream: TextIO) -> int:
    stream.write(design_report(cfg))
    return EXIT_OK


def cmd_figure(fig_id: str, out_dir: str, threads: int = 1, rel_tol: float | None = None,
               stream: TextIO = sys.stdout) -> int:
    from .figures import FIGURE_IDS, build_figure

    ids = FIGURE_IDS if fig_id == "all" else (fig_id,)
    status = EXIT_OK
    for fid in ids:
        try:
            paths, ok = build_figure(fid, out_dir, threads, rel_tol)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        for p in paths:
            stream.write(p + "\n")
        if not ok:
            status = EXIT_NUMERIC
    return status


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nrdots", description="Nonreciprocal quantum-dot transport")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", help="output file (figure: output directory)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--rel-tol", type=float, default=None)

    common(sub.add_parser("scatter", help="scattering-matrix sweep"))
    common(sub.add_parser("current", help="current-voltage (or nu) sweep"))
    common(sub.add_parser("design", help="resolve optimal conditions and report"))
    fig = sub.add_parser("figure", help="write the dataset behind a figure")
    fig.add_argument("id", help="figure id (fig3a ... fig11) or 'all'")
    common(fig, needs_config=False)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "figure":
            return cmd_figure(args.id, args.out or ".", args.threads, args.rel_tol)
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
        if args.rel_tol is not None:
            cfg = with_rel_tol(cfg, args.rel_tol)
        out_path = args.out or cfg.output
        stream = open(out_path, "w", newline="\n") if out_path else sys.stdout
        try:
            if args.command == "scatter":
                return cmd_scatter(cfg, stream, args.threads)
            if args.command == "current":
                return cmd_current(cfg, stream, args.threads)
            return cmd_design(cfg, stream)
        finally:
            if out_path:
                stream.close()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
