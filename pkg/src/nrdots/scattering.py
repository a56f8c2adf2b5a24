"""Frequency-domain scattering matrices, optimality conditions and isolation metrics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .circuit import (
    OUTPUT_COUPLING,
    CircuitSpec,
    DriftModel,
    FourDotParams,
    ThreeDotParams,
    adiabatic_reduce,
    assemble_drift,
)

REVERSE_FLOOR = 1e-30
SINGULAR_RCOND = 1e-14
PHASE_MODULUS_TOL = 1e-12


class SingularResolventError(np.linalg.LinAlgError):
    def __init__(self, omega: float, rcond: float):
        self.omega = omega
        self.rcond = rcond
        super().__init__(f"resolvent singular at omega={omega:g} (rcond estimate {rcond:.3e})")


class NoPhaseSolutionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    omega: float
    entries: np.ndarray
    port_labels: tuple[str, ...]
    dampings: np.ndarray | None = None

    def index(self, port) -> int:
        if isinstance(port, (int, np.integer)):
            return int(port)
        return self.port_labels.index(port)

    def __getitem__(self, jk) -> complex:
        j, k = jk
        return complex(self.entries[self.index(j), self.index(k)])

    def power(self) -> np.ndarray:
        return np.abs(self.entries) ** 2

    def flux_normalized(self) -> np.ndarray:
        """K^{-1/2} S K^{1/2}; unitary whenever every loss channel is a port."""
        if self.dampings is None:
            raise ValueError("flux normalization needs the port dampings")
        r = np.sqrt(self.dampings)
        return self.entries * r[np.newaxis, :] / r[:, np.newaxis]

    def block(self, ports: Sequence) -> "ScatteringMatrix":
        idx = [self.index(p) for p in ports]
        damp = None if self.dampings is None else self.dampings[idx]
        return ScatteringMatrix(
            self.omega,
            self.entries[np.ix_(idx, idx)],
            tuple(self.port_labels[i] for i in idx),
            damp,
        )


def scattering_matrix(drift: DriftModel, omega: float) -> ScatteringMatrix:
    """S = I - i sqrt(2/pi) K (-i omega I - M)^{-1} C via a dense LU solve."""
    n = drift.dim
    A = -1j * omega * np.eye(n) - drift.M
    anorm = np.linalg.norm(A, 1)
    with warnings.catch_warnings():
        # exact singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=True)
    rcond = _rcond(lu, anorm)
    if not rcond > SINGULAR_RCOND:
        raise SingularResolventError(omega, rcond)
    X = sla.lu_solve((lu, piv), drift.C)
    S = np.eye(n) + OUTPUT_COUPLING * (drift.K @ X)
    return ScatteringMatrix(float(omega), S, drift.port_labels, np.diag(drift.K).real.copy())


def _rcond(lu: np.ndarray, anorm: float) -> float:
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    return float(rcond) if info == 0 else 0.0


def _two_port(omega, s11, s12, s21, s22, gamma) -> ScatteringMatrix:
    S = np.array([[s11, s12], [s21, s22]], dtype=complex)
    return ScatteringMatrix(float(omega), S, ("d1", "d2"), np.array([gamma, gamma], float))


def three_dot_closed_form(params: ThreeDotParams, omega: float) -> ScatteringMatrix:
    """Primary 2x2 block of the adiabatically reduced three-dot model."""
    r = params.lam**2 / params.kappa
    g = params.coupling
    G = params.gamma
    detune = 1j * (params.eps_d - omega)
    fwd = r + 1j * g  # couples d2 into the d1 equation
    bwd = r + 1j * g.conjugate()
    den = (detune + r + G) ** 2 - fwd * bwd
    s11 = ((detune + r) ** 2 - G**2 - fwd * bwd) / den
    s12 = 2 * G * fwd / den
    s21 = 2 * G * bwd / den
    return _two_port(omega, s11, s12, s21, s11, G)


def four_dot_couplings(params: FourDotParams) -> dict[str, complex]:
    """Effective detuned level, total damping and directional couplings of the reduced four-dot model."""
    k = params.kappa
    d1, d2 = params.delta1, params.delta2
    l1, l2 = params.lam1, params.lam2
    g11, g12, g21, g22 = params.hoppings
    w1, w2 = k + 1j * d1, k + 1j * d2
    shift = params.eps_d - l1**2 * d1 / (k**2 + d1**2) - l2**2 * d2 / (k**2 + d2**2)
    sigma = params.gamma + l1**2 * k / (k**2 + d1**2) + l2**2 * k / (k**2 + d2**2)
    phi = g11.conjugate() * g21 / w1 + g12.conjugate() * g22 / w2
    psi = g21.conjugate() * g11 / w1 + g22.conjugate() * g12 / w2
    return {"Delta": shift, "Sigma": sigma, "Phi": complex(phi), "Psi": complex(psi)}


def four_dot_closed_form(params: FourDotParams, omega: float) -> ScatteringMatrix:
    c = four_dot_couplings(params)
    w = 1j * (c["Delta"] - omega) + c["Sigma"]
    G = params.gamma
    pp = c["Phi"] * c["Psi"]
    den = w**2 - pp
    s11 = (w * (w - 2 * G) - pp) / den
    s12 = 2 * G * c["Phi"] / den
    s21 = 2 * G * c["Psi"] / den
    return _two_port(omega, s11, s12, s21, s11, G)


def directional_coupling(lam: float, kappa: float, reverse: bool = False) -> complex:
    """Coupling g that cancels the d2 -> d1 influence (or d1 -> d2 if ``reverse``)."""
    if lam <= 0 or kappa <= 0:
        raise ValueError("lam and kappa must be positive")
    g = 1j * (lam**2 / kappa)
    return g.conjugate() if reverse else g


def directional_phase(
    lam1: float, lam2: float, delta1: float, delta2: float, kappa: float, reverse: bool = False
) -> float:
    """Loop phase on g21 that makes the four-dot coupling unidirectional, in (-pi, pi]."""
    if lam1 <= 0 or lam2 <= 0 or kappa <= 0:
        raise ValueError("lam1, lam2 and kappa must be positive")
    target = -(kappa + 1j * delta1) / (kappa + 1j * delta2) * (lam2**2 / lam1**2)
    if abs(abs(target) - 1.0) > PHASE_MODULUS_TOL:
        raise NoPhaseSolutionError(
            f"no pure-phase solution (|exp(i phi)| would be {abs(target):.12g}); adjust lam1/lam2"
        )
    phi = math.atan2(target.imag, target.real)
    if phi <= -math.pi:
        phi += 2 * math.pi
    if reverse:
        phi = -phi if phi != math.pi else math.pi
    return phi


def directionality_condition(kind: str, params: dict, reverse: bool = False):
    if kind == "three_dot":
        return directional_coupling(params["lam"], params["kappa"], reverse)
    if kind == "four_dot":
        return directional_phase(
            params["lam1"], params["lam2"], params["delta1"], params["delta2"], params["kappa"], reverse
        )
    raise ValueError(f"unknown model kind {kind!r}")


def matched_gamma_three_dot(lam: float, kappa: float) -> float:
    return lam**2 / kappa


def matched_gamma_four_dot(lam1: float, lam2: float, delta1: float, delta2: float, kappa: float) -> float:
    return lam1**2 * kappa / (kappa**2 + delta1**2) + lam2**2 * kappa / (kappa**2 + delta2**2)


def impedance_matching(kind: str, params: dict) -> float:
    if kind == "three_dot":
        return matched_gamma_three_dot(params["lam"], params["kappa"])
    if kind == "four_dot":
        return matched_gamma_four_dot(
            params["lam1"], params["lam2"], params["delta1"], params["delta2"], params["kappa"]
        )
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class MatchingSolution:
    gamma: float
    reflection: float
    at_boundary: bool
    iterations: int


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 500):
    """Minimize a unimodal ``f`` on [a, b]; returns (x, f(x), iterations)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    return x, f(x), it


def solve_matching_numerically(
    spec: CircuitSpec,
    resonance: float,
    port: str,
    gamma_ports: Sequence[str] | None = None,
    adiabatic: bool = False,
    bounds: tuple[float, float] = (1e-6, 1e2),
    tol: float = 1e-10,
) -> MatchingSolution:
    """Find the primary damping that minimizes the reflection |S_pp| at ``resonance``.

    The damping is applied to ``gamma_ports`` (default: all primary dots). With
    ``adiabatic=True`` the reflection is taken from the reduced model.
    """
    if gamma_ports is None:
        gamma_ports = [d.label for d in spec.primaries]

    def reflection(gamma: float) -> float:
        trial = spec.with_damping(gamma_ports, gamma)
        drift = adiabatic_reduce(trial).as_drift() if adiabatic else assemble_drift(trial)
        return abs(scattering_matrix(drift, resonance)[port, port])

    lo, hi = bounds
    x, fx, it = golden_section(reflection, lo, hi, tol)
    f_lo, f_hi = reflection(lo), reflection(hi)
    at_boundary = fx >= min(f_lo, f_hi) - 1e-12
    if at_boundary:
        x, fx = (lo, f_lo) if f_lo <= f_hi else (hi, f_hi)
    return MatchingSolution(x, fx, at_boundary, it)


@dataclass(frozen=True)
class IsolationReport:
    forward_T: float
    reverse_T: float
    reflections: tuple[float, float]
    isolation_ratio: float


def isolation_report(S: ScatteringMatrix, j, k) -> IsolationReport:
    """Metrics for transmission into port ``j`` from port ``k`` (forward) and back."""
    if S.index(j) == S.index(k):
        raise ValueError("isolation needs two distinct ports")
    fwd = abs(S[j, k]) ** 2
    rev = abs(S[k, j]) ** 2
    ratio = math.inf if rev < REVERSE_FLOOR else fwd / rev
    return IsolationReport(fwd, rev, (abs(S[j, j]) ** 2, abs(S[k, k]) ** 2), ratio)
