"""Fermi functions and the adaptive energy-quadrature engine shared by all current calculations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import expit

EXP_CLAMP = 700.0


@dataclass(frozen=True)
class LeadState:
    mu: float
    temperature: float
    label: str = ""

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"lead {self.label!r}: temperature must be positive")


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    window_pad_T: float = 50.0
    window_pad_G: float = 50.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.window_pad_T < 10 or self.window_pad_G < 10:
            raise ValueError("window pads must be at least 10")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: float
    converged: bool
    intervals: int


def fermi_dirac(eps, lead: LeadState):
    """Occupation 1 / (exp((eps - mu) / T) + 1), safe for any argument."""
    x = np.clip((np.asarray(eps, dtype=float) - lead.mu) / lead.temperature, -EXP_CLAMP, EXP_CLAMP)
    out = expit(-x)
    return float(out) if out.ndim == 0 else out


def integration_windows(
    leads: Iterable[LeadState],
    centers: Sequence[float],
    widths: Sequence[float] | float,
    cfg: QuadratureConfig,
) -> list[tuple[float, float]]:
    """Merged intervals covering the Fermi window of the leads and every resonance window."""
    leads = list(leads)
    centers = list(np.atleast_1d(np.asarray(centers, dtype=float)))
    widths = np.broadcast_to(np.asarray(widths, dtype=float), (len(centers),))
    spans = []
    if leads:
        t_max = max(ld.temperature for ld in leads)
        spans.append(
            (
                min(ld.mu for ld in leads) - cfg.window_pad_T * t_max,
                max(ld.mu for ld in leads) + cfg.window_pad_T * t_max,
            )
        )
    for c, w in zip(centers, widths):
        spans.append((c - cfg.window_pad_G * w, c + cfg.window_pad_G * w))
    if not spans:
        raise ValueError("integration window is empty: give leads or resonance centers")
    spans.sort()
    merged = [list(spans[0])]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def integrate(
    kernel: Callable[[float], float | np.ndarray],
    leads: Iterable[LeadState] = (),
    centers: Sequence[float] = (),
    widths: Sequence[float] | float = (),
    cfg: QuadratureConfig = QuadratureConfig(),
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of ``kernel`` over the union energy window.

    ``kernel`` may return an array; all components share one subdivision so
    linear relations between them survive integration. Chemical potentials,
    resonance centers (with their widths) and ``breakpoints`` seed the
    initial subdivision.
    """
    leads = list(leads)
    windows = integration_windows(leads, centers, widths, cfg)
    seeds = list(breakpoints)
    for ld in leads:
        seeds += [ld.mu + s * ld.temperature for s in (-10.0, 0.0, 10.0)]
    ws = np.broadcast_to(np.asarray(widths, dtype=float), (len(np.atleast_1d(centers)),))
    for c, w in zip(np.atleast_1d(centers), ws):
        seeds += [c + s * w for s in (-10.0, -1.0, 0.0, 1.0, 10.0)]
    total = None
    error = 0.0
    converged = True
    intervals = 0
    budget = max(1, cfg.max_subdivisions // len(windows))
    for lo, hi in windows:
        pts = sorted({float(p) for p in seeds if lo < p < hi})
        value, err, info = quad_vec(
            kernel,
            lo,
            hi,
            epsabs=cfg.abs_tol,
            epsrel=cfg.rel_tol,
            limit=budget,
            points=pts or None,
            quadrature="gk21",
            norm="max",
            full_output=True,
        )
        total = value if total is None else total + value
        error += float(err)
        intervals += int(info.intervals.shape[0])
        converged = converged and info.status == 0
    if np.ndim(total) == 0:
        total = float(total)
    return QuadResult(total, error, converged, intervals)
