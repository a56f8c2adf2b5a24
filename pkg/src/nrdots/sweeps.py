"""Sweep execution and CSV emission shared by the command line and the figure builders."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence, TextIO

import numpy as np

from .circuit import assemble_drift
from .config import ConfigError, RunConfig, header_lines
from .phonon import OhmicBath, PolaronParams, polaron_currents
from .quadrature import LeadState
from .scattering import (
    SingularResolventError,
    directional_coupling,
    directional_phase,
    four_dot_closed_form,
    matched_gamma_three_dot,
    scattering_matrix,
    three_dot_closed_form,
)
from .transport import CurrentResult, current_four_dot, current_three_dot, lb_current

SCATTER_COLUMNS = ("S11", "S12", "S21", "S22", "flag")
CURRENT_COLUMNS = ("J_L", "J_R", "J_aux", "error", "converged")
SWEEP_LABEL = {"omega": "omega", "g_ratio": "g_ratio", "voltage": "V", "nu": "nu"}


@dataclass(frozen=True)
class SweepRow:
    x: float
    values: tuple

    @property
    def ok(self) -> bool:
        return self.values[-1] not in ("singular", 0)


def parallel_map(fn: Callable, xs: Sequence, threads: int = 1) -> list:
    """Ordered map; rows come back in sweep order whatever the thread count."""
    if threads <= 1:
        return [fn(x) for x in xs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, xs))


def fmt_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.12g" % float(v)


def write_csv(stream: TextIO, header: Sequence[str], columns: Sequence[str], rows: Sequence[Sequence]):
    for line in header:
        stream.write(line + "\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt_value(v) for v in row) + "\n")


# scattering


def _primary_block(cfg: RunConfig, omega: float, g=None) -> np.ndarray:
    m = cfg.model
    if m.scatter == "closed_form":
        if m.kind == "three_dot":
            params = m.three_dot() if g is None else replace(m.three_dot(), g=g)
            return three_dot_closed_form(params, omega).entries
        return four_dot_closed_form(m.four_dot(), omega).entries
    spec = m.spec() if g is None else replace(m.three_dot(), g=g).spec()
    S = scattering_matrix(assemble_drift(spec), omega)
    prim = [d.label for d in spec.primaries][:2]
    return S.block(prim).entries


def scatter_row(cfg: RunConfig, x: float) -> SweepRow:
    m = cfg.model
    if cfg.sweep.kind == "omega":
        omega, g = x, None
    else:
        unit = m.lam**2 / m.kappa
        g = x * unit * np.exp(1j * np.angle(m.g))
        omega = m.eps_d
    try:
        P = np.abs(_primary_block(cfg, omega, g)) ** 2
    except SingularResolventError:
        return SweepRow(x, (math.nan,) * 4 + ("singular",))
    return SweepRow(x, (P[0, 0], P[0, 1], P[1, 0], P[1, 1], "ok"))


def scatter_rows(cfg: RunConfig, threads: int = 1) -> list[SweepRow]:
    if cfg.sweep is None:
        raise ConfigError("sweep: missing required section")
    if cfg.sweep.kind not in ("omega", "g_ratio"):
        raise ConfigError(f"sweep.kind: scatter needs omega or g_ratio, got {cfg.sweep.kind!r}")
    return parallel_map(lambda x: scatter_row(cfg, x), list(cfg.sweep.grid()), threads)


# currents


def _check_current_route(cfg: RunConfig):
    m = cfg.model
    if cfg.phonon is not None:
        if m.transport != "giom":
            raise ConfigError("model.transport: phonon currents use transport = giom")
    if m.transport == "lb" or m.kind == "custom":
        return
    if m.kind == "three_dot":
        want = directional_coupling(m.lam, m.kappa, m.reverse)
        if abs(m.g - want) > 1e-12 * abs(want):
            raise ConfigError(
                "model.g_abs: closed-form currents need the directional coupling; "
                "use g_mode = auto or transport = lb"
            )
        if cfg.phonon is not None and abs(m.gamma - matched_gamma_three_dot(m.lam, m.kappa)) > 1e-9 * m.gamma:
            raise ConfigError("model.gamma: phonon currents need gamma = lambda^2/kappa")
    elif m.kind == "four_dot":
        want = directional_phase(m.lam1, m.lam2, m.delta1, m.delta2, m.kappa, m.reverse)
        if abs(np.exp(1j * m.phi) - np.exp(1j * want)) > 1e-9:
            raise ConfigError("model.phi: closed-form currents need the directional phase; use transport = lb")


def _swap(res: CurrentResult) -> CurrentResult:
    swapped = {("R" + k[1:] if k.startswith("L.") else "L" + k[1:] if k.startswith("R.") else k): v
               for k, v in res.breakdown.items()}
    return CurrentResult(res.J_R, res.J_L, res.J_aux, swapped, res.error, res.converged)


def currents_at(cfg: RunConfig, V: float, nu: float | None = None) -> CurrentResult:
    m, T = cfg.model, cfg.leads.temperature
    L, R = LeadState(V / 2.0, T, "L"), LeadState(-V / 2.0, T, "R")
    aux = {lab: LeadState(mu, T, lab) for lab, mu in cfg.leads.aux_mu.items()}
    q = cfg.quadrature
    if m.transport == "lb":
        spec = m.spec()
        prim = [d.label for d in spec.primaries]
        leads = {prim[0]: L, prim[1]: R}
        for d in spec.dots:
            if d.role != "primary":
                continue
            leads.setdefault(d.label, LeadState(0.0, T, d.label))
        if m.kind == "three_dot":
            leads["a"] = aux["a"]
        elif m.kind == "four_dot":
            leads["a1"], leads["a2"] = aux["u"], aux["d"]
        else:
            leads.update(aux)
        return lb_current(spec, leads, q)
    # reversed circuits route R -> L: evaluate the forward formulas with the leads exchanged
    if m.reverse:
        L, R = LeadState(R.mu, T, "L"), LeadState(L.mu, T, "R")
    if cfg.phonon is not None:
        bath = OhmicBath(cfg.phonon.nu if nu is None else nu, cfg.phonon.omega_c, T)
        make = PolaronParams.from_renormalized if cfg.phonon.onsite == "renormalized" else PolaronParams.from_bare
        params = make(m.eps_d, bath, m.lam, m.kappa, m.gamma)
        res = polaron_currents(params, bath, {"L": L, "R": R, "a": aux["a"]}, q)
    elif m.kind == "three_dot":
        res = current_three_dot(m.three_dot(), {"L": L, "R": R, "a": aux["a"]}, q)
    else:
        p = m.four_dot()
        if m.reverse:
            p = replace(p, phi=None)
        res = current_four_dot(p, {"L": L, "R": R, "u": aux["u"], "d": aux["d"]}, q)
    return _swap(res) if m.reverse else res


def current_row(cfg: RunConfig, x: float) -> SweepRow:
    if cfg.sweep.kind == "nu":
        res = currents_at(cfg, cfg.sweep.bias, nu=x)
    else:
        res = currents_at(cfg, x)
    return SweepRow(x, (res.J_L, res.J_R, res.J_aux, res.error, int(res.converged)))


def current_rows(cfg: RunConfig, threads: int = 1) -> list[SweepRow]:
    if cfg.sweep is None:
        raise ConfigError("sweep: missing required section")
    if cfg.sweep.kind not in ("voltage", "nu"):
        raise ConfigError(f"sweep.kind: current needs voltage or nu, got {cfg.sweep.kind!r}")
    _check_current_route(cfg)
    return parallel_map(lambda x: current_row(cfg, x), list(cfg.sweep.grid()), threads)


def emit(stream: TextIO, cfg: RunConfig, rows: Sequence[SweepRow], columns: Sequence[str], extra=()):
    label = SWEEP_LABEL[cfg.sweep.kind]
    write_csv(stream, list(extra) + header_lines(cfg), (label,) + tuple(columns),
              [(r.x,) + tuple(r.values) for r in rows])
