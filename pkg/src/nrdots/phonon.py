"""Local electron-phonon coupling for the three-dot circuit in the polaron frame.

All three dots see identical Ohmic baths I(w) = pi nu w exp(-w / w_c). The
bath enters through the level shift Delta = nu w_c and the correlation
function B(tau) = exp(-phi(tau)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import newton

from .quadrature import LeadState, QuadratureConfig, fermi_dirac, integrate, integration_windows
from .transport import CurrentResult, _result

GRID_ORDER = 16
# largest |energy| * panel length kept per 16-point Gauss-Legendre panel
PHASE_PER_PANEL = 8.0
TAU_DECAY_UNITS = 30.0


@dataclass(frozen=True)
class OhmicBath:
    nu: float
    omega_c: float
    temperature: float

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("coupling nu must be non-negative")
        if not (self.omega_c > 0 and self.temperature > 0):
            raise ValueError("cutoff and temperature must be positive")

    def spectral_density(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.pi * self.nu * omega * np.exp(-omega / self.omega_c)


def reorganization_shift(bath: OhmicBath) -> float:
    """Polaron level shift: integral of I(w) / (pi w) over w > 0, i.e. nu * w_c."""
    return bath.nu * bath.omega_c


def _thermal_integrand(omega: float, tau: np.ndarray, T: float, omega_c: float) -> np.ndarray:
    # e^{-w/wc} n_B(w) (1 - cos w tau) / w, finite as w -> 0 (limit T tau^2 / 2)
    if omega < 1e-12 * T:
        return 0.5 * T * tau * tau
    nb = 1.0 / math.expm1(omega / T)
    s = np.sin(0.5 * omega * tau)
    return 2.0 * math.exp(-omega / omega_c) * nb * s * s / omega


def correlation_exponent(bath: OhmicBath, tau, rel_tol: float = 1e-11) -> np.ndarray | complex:
    """phi(tau) with B(tau) = exp(-phi(tau)).

    Real part = nu/2 ln(1 + (w_c tau)^2) from the zero-temperature piece plus
    a thermal piece integrated adaptively in frequency; imaginary part
    = nu arctan(w_c tau) exactly.
    """
    scalar = np.ndim(tau) == 0
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    nu, wc, T = bath.nu, bath.omega_c, bath.temperature
    x = wc * tau
    re = 0.5 * nu * np.log1p(x * x)
    im = nu * np.arctan(x)
    if nu > 0:
        w_max = 40.0 / (1.0 / wc + 1.0 / T)
        thermal, _ = quad_vec(
            lambda w: _thermal_integrand(w, tau, T, wc),
            0.0,
            w_max,
            epsrel=rel_tol,
            epsabs=1e-15,
            norm="max",
            limit=20000,
        )
        re = re + 2.0 * nu * thermal
    out = re + 1j * im
    return complex(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class CorrelationGrid:
    """B(tau) tabulated at composite Gauss-Legendre nodes on [0, tau_max]."""

    tau_nodes: np.ndarray
    weights: np.ndarray
    phi_values: np.ndarray
    B_values: np.ndarray
    tau_max: float


def grid_nodes_for(tau_max: float, energy_span: float, omega_c: float) -> int:
    """Node count that resolves exp(i E tau) for |E| <= energy_span and the bath time scale."""
    h = min(PHASE_PER_PANEL / max(energy_span, 1e-12), 2.0 / omega_c, tau_max / 32.0)
    return GRID_ORDER * (int(math.ceil(tau_max / h)) + 3)


def _panel_edges(tau_max: float, n_panels: int) -> np.ndarray:
    # a few geometrically shrinking panels toward tau = 0, then uniform panels
    n_uniform = max(n_panels - 3, 1)
    h = tau_max / n_uniform
    head = h * np.array([0.0, 0.125, 0.25, 0.5])
    return np.concatenate([head, h * np.arange(1, n_uniform + 1)])


def correlation_B(bath: OhmicBath, tau_max: float, n_nodes: int = 512) -> CorrelationGrid:
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    if n_nodes < 64:
        raise ValueError("need at least 64 nodes")
    n_panels = max(int(math.ceil(n_nodes / GRID_ORDER)), 4)
    edges = _panel_edges(tau_max, n_panels)
    x, w = np.polynomial.legendre.leggauss(GRID_ORDER)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    phi = correlation_exponent(bath, nodes)
    return CorrelationGrid(nodes, weights, phi, np.exp(-phi), float(tau_max))


@dataclass(frozen=True)
class PolaronParams:
    """Directional, matched three-dot circuit in the polaron frame."""

    renorm_onsite: float
    shift: float
    lam: float
    kappa: float
    gamma: float = 1.0

    @classmethod
    def from_renormalized(cls, eps_tilde, bath: OhmicBath, lam, kappa, gamma=1.0) -> "PolaronParams":
        return cls._checked(eps_tilde, reorganization_shift(bath), lam, kappa, gamma)

    @classmethod
    def from_bare(cls, eps_d, bath: OhmicBath, lam, kappa, gamma=1.0) -> "PolaronParams":
        shift = reorganization_shift(bath)
        return cls._checked(eps_d - shift, shift, lam, kappa, gamma)

    @classmethod
    def _checked(cls, eps_tilde, shift, lam, kappa, gamma):
        if shift > kappa / 10.0:
            warnings.warn(
                f"polaron shift {shift:g} exceeds kappa/10; dropping it from the auxiliary "
                "damping is inaccurate",
                RuntimeWarning,
                stacklevel=3,
            )
        return cls(float(eps_tilde), float(shift), float(lam), float(kappa), float(gamma))

    @property
    def bare_onsite(self) -> float:
        return self.renorm_onsite + self.shift


def generalized_transmission(params: PolaronParams, grid: CorrelationGrid, eps):
    """G(eps) = Re int_0^inf exp(-(2 Gamma + i eps~ - i eps) tau) B(tau) dtau on the grid.

    Truncation error is bounded by exp(-2 Gamma tau_max) / (2 Gamma).
    """
    tau = grid.tau_nodes
    pre = grid.weights * np.exp(-(2.0 * params.gamma + 1j * params.renorm_onsite) * tau) * grid.B_values
    eps = np.asarray(eps, dtype=float)
    if eps.ndim == 0:
        return float(np.real(np.dot(pre, np.exp(1j * float(eps) * tau))))
    out = np.empty(eps.shape)
    flat = eps.ravel()
    res = out.ravel()
    for start in range(0, flat.size, 256):
        chunk = flat[start : start + 256]
        res[start : start + 256] = np.real(np.exp(1j * np.outer(chunk, tau)) @ pre)
    return out


def default_tau_max(gamma: float) -> float:
    return TAU_DECAY_UNITS / (2.0 * gamma)


def polaron_grid(
    params: PolaronParams, bath: OhmicBath, leads, cfg: QuadratureConfig
) -> CorrelationGrid:
    """Correlation grid dense enough for every energy the current integrals will visit."""
    tau_max = default_tau_max(params.gamma)
    windows = integration_windows(leads, [params.renorm_onsite], [2 * params.gamma], cfg)
    span = max(max(abs(lo - params.renorm_onsite), abs(hi - params.renorm_onsite)) for lo, hi in windows)
    n = max(512, grid_nodes_for(tau_max, span, bath.omega_c))
    return correlation_B(bath, tau_max, n)


def polaron_currents(
    params: PolaronParams,
    bath: OhmicBath,
    leads: Mapping[str, LeadState],
    cfg: QuadratureConfig = QuadratureConfig(),
    grid: CorrelationGrid | None = None,
    match_tol: float = 1e-9,
) -> CurrentResult:
    """Polaron-dressed currents of the directional, matched three-dot circuit.

    Leads are keyed ``L``, ``R`` and ``a``.
    """
    G = params.gamma
    r = params.lam**2 / params.kappa
    if abs(r - G) > match_tol * G:
        raise ValueError(f"polaron currents need Gamma = lam^2/kappa (got {G:g} vs {r:g})")
    nL, nR, nA = leads["L"], leads["R"], leads["a"]
    if grid is None:
        grid = polaron_grid(params, bath, [nL, nR, nA], cfg)
    pre = grid.weights * np.exp(-(2.0 * G + 1j * params.renorm_onsite) * grid.tau_nodes) * grid.B_values
    tau = grid.tau_nodes

    def kernel(eps):
        g = np.real(np.dot(pre, np.exp(1j * eps * tau)))
        fL, fR, fA = fermi_dirac(eps, nL), fermi_dirac(eps, nR), fermi_dirac(eps, nA)
        return np.array([2 * G * g * (fL - fA), 2 * G * g * (fR - fA), -4 * G * G * g * g * (fL - fA)])

    q = integrate(kernel, [nL, nR, nA], [params.renorm_onsite], [2 * G], cfg)
    return _result(q, ["L.absorbed", "R.direct", "R.transfer"], cfg)


def polaron_reflection(params: PolaronParams, omega):
    """Reflection amplitude at either primary port; unchanged in form by the phonons."""
    r = params.lam**2 / params.kappa
    detune = 1j * (params.renorm_onsite - np.asarray(omega, dtype=float))
    out = (detune + r - params.gamma) / (detune + r + params.gamma)
    return complex(out) if np.ndim(out) == 0 else out


def polaron_reflection_zero(params: PolaronParams, tol: float = 1e-14) -> complex:
    """Complex frequency where the reflection amplitude vanishes (secant iteration)."""
    r = params.lam**2 / params.kappa

    def amp(w):
        detune = 1j * (params.renorm_onsite - w)
        return (detune + r - params.gamma) / (detune + r + params.gamma)

    start = complex(params.renorm_onsite + 0.37 * params.gamma, 0.21 * params.gamma)
    return complex(newton(amp, start, tol=tol, maxiter=200))
