"""Steady-state charge currents.

Two routes are provided: closed-form input-output integrals for the
directional three- and four-dot circuits, and the generic multiterminal
Landauer-Buttiker expression built from the retarded Green's function.
Positive current flows out of a lead into the dots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .circuit import CircuitSpec, FourDotParams, ThreeDotParams, assemble_drift
from .quadrature import LeadState, QuadratureConfig, QuadResult, fermi_dirac, integrate
from .scattering import directional_phase, matched_gamma_four_dot

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CurrentResult:
    """Lead currents plus every separately integrated term.

    Breakdown keys are ``"<total>.<term>"`` with total one of ``L``, ``R``,
    ``aux``; the terms under each prefix add up to that total.
    """

    J_L: float
    J_R: float
    J_aux: float
    breakdown: dict[str, float] = field(default_factory=dict)
    error: float = 0.0
    converged: bool = True

    def terms(self, total: str) -> dict[str, float]:
        pre = total + "."
        return {k: v for k, v in self.breakdown.items() if k.startswith(pre)}


def bias_leads(
    V: float, temperature: float, aux_mu: float, aux_labels=("a",)
) -> dict[str, LeadState]:
    """Symmetric bias mu_L = V/2, mu_R = -V/2 with every auxiliary lead at ``aux_mu``."""
    leads = {
        "L": LeadState(V / 2.0, temperature, "L"),
        "R": LeadState(-V / 2.0, temperature, "R"),
    }
    for lab in aux_labels:
        leads[lab] = LeadState(aux_mu, temperature, lab)
    return leads


def _result(q: QuadResult, names: list[str], cfg: QuadratureConfig) -> CurrentResult:
    values = np.asarray(q.value, dtype=float) / TWO_PI
    breakdown = {name: float(v) for name, v in zip(names, values)}
    J_L = sum(v for k, v in breakdown.items() if k.startswith("L."))
    J_R = sum(v for k, v in breakdown.items() if k.startswith("R."))
    aux = [v for k, v in breakdown.items() if k.startswith("aux.")]
    J_aux = sum(aux) if aux else -(J_L + J_R)
    return CurrentResult(J_L, J_R, J_aux, breakdown, q.error / TWO_PI, q.converged)


def current_three_dot(
    params: ThreeDotParams,
    leads: Mapping[str, LeadState],
    cfg: QuadratureConfig = QuadratureConfig(),
) -> CurrentResult:
    """Currents of the directional three-dot circuit for any alpha = lam^2 / (kappa Gamma).

    Leads are keyed ``L``, ``R`` and ``a``. The directional coupling is
    assumed; ``params.g`` is ignored.
    """
    G = params.gamma
    r = params.lam**2 / params.kappa
    width2 = (G + r) ** 2
    nL, nR, nA = leads["L"], leads["R"], leads["a"]

    def kernel(eps):
        x = params.eps_d - eps
        den = width2 + x * x
        fL, fR, fA = fermi_dirac(eps, nL), fermi_dirac(eps, nR), fermi_dirac(eps, nA)
        single = 4 * G * r / den
        transfer = 16 * G**2 * r**2 / (den * den)
        return np.array([single * (fL - fA), single * (fR - fA), -transfer * (fL - fA)])

    q = integrate(kernel, [nL, nR, nA], [params.eps_d], [G + r], cfg)
    return _result(q, ["L.absorbed", "R.direct", "R.transfer"], cfg)


def current_four_dot(
    params: FourDotParams,
    leads: Mapping[str, LeadState],
    cfg: QuadratureConfig = QuadratureConfig(),
    match_tol: float = 1e-9,
) -> CurrentResult:
    """Currents of the directional, impedance-matched four-dot circuit.

    Requires lam1 == lam2 and delta1 == -delta2. Leads are keyed ``L``, ``R``,
    ``u`` (auxiliary dot 1) and ``d`` (auxiliary dot 2).
    """
    if params.lam1 != params.lam2 or params.delta1 != -params.delta2:
        raise ValueError("four-dot currents need lam1 == lam2 and delta1 == -delta2")
    G, k, dl = params.gamma, params.kappa, params.delta1
    matched = matched_gamma_four_dot(params.lam1, params.lam2, params.delta1, params.delta2, k)
    if abs(G - matched) > match_tol * matched:
        raise ValueError(f"gamma={G:g} is not impedance matched (expected {matched:.12g})")
    if params.phi is not None:
        want = directional_phase(params.lam1, params.lam2, params.delta1, params.delta2, k)
        if abs(np.exp(1j * params.phi) - np.exp(1j * want)) > 1e-9:
            raise ValueError("loop phase does not satisfy the directionality condition")

    frac = dl**2 / (k**2 + dl**2)
    cross = 8 * G**3 * dl * k / (k**2 + dl**2)
    nL, nR, nU, nD = leads["L"], leads["R"], leads["u"], leads["d"]

    def kernel(eps):
        x = params.eps_d - eps
        den = 4 * G**2 + x * x
        fL, fR = fermi_dirac(eps, nL), fermi_dirac(eps, nR)
        fU, fD = fermi_dirac(eps, nU), fermi_dirac(eps, nD)
        single = 2 * G**2 / den
        transfer = frac * 8 * G**4 / (den * den)
        return np.array(
            [
                single * (fL - fU),
                single * (fL - fD),
                single * (fR - fU),
                single * (fR - fD),
                -transfer * (fL - fU),
                -transfer * (fL - fD),
                -cross * x / (den * den) * (fU - fD),
            ]
        )

    names = [
        "L.via_u",
        "L.via_d",
        "R.via_u",
        "R.via_d",
        "R.transfer_u",
        "R.transfer_d",
        "R.cross",
    ]
    q = integrate(kernel, [nL, nR, nU, nD], [params.eps_d], [2 * G], cfg)
    return _result(q, names, cfg)


def lb_transmissions(spec: CircuitSpec, eps) -> np.ndarray:
    """Pairwise transmission probabilities T[v, v'] from lead v' into lead v.

    Built from G^r = (eps - H + i K)^{-1}, so T[v, v'] = 4 K_v K_v' |G^r_{vv'}|^2
    equals |S_{vv'}|^2 of the flux-normalized scattering matrix. Accepts a
    scalar energy (returns N x N) or an array (returns ... x N x N). The
    diagonal is zero.
    """
    H = spec.hamiltonian()
    K = spec.dampings()
    eps = np.asarray(eps, dtype=float)
    n = H.shape[0]
    A = eps[..., None, None] * np.eye(n) - H + 1j * np.diag(K)
    Gr = np.linalg.solve(A, np.broadcast_to(np.eye(n, dtype=complex), A.shape))
    T = 4.0 * K[:, None] * K[None, :] * np.abs(Gr) ** 2
    T[..., np.arange(n), np.arange(n)] = 0.0
    return T


def lb_current(
    spec: CircuitSpec,
    leads: Mapping[str, LeadState],
    cfg: QuadratureConfig = QuadratureConfig(),
    roles: Mapping[str, str] | None = None,
) -> CurrentResult:
    """Multiterminal Landauer-Buttiker currents, one lead per dot.

    ``leads`` is keyed by dot label. ``roles`` assigns each dot label to one
    of the totals ``L``, ``R``, ``aux``; by default the first two primary
    dots are ``L`` and ``R`` and every other dot is ``aux``.
    """
    assemble_drift(spec)  # validates
    labels = spec.port_labels
    missing = [lab for lab in labels if lab not in leads]
    if missing:
        raise ValueError(f"no lead state for dots {missing}")
    if roles is None:
        prim = [d.label for d in spec.primaries]
        roles = {lab: "aux" for lab in labels}
        if prim:
            roles[prim[0]] = "L"
        if len(prim) > 1:
            roles[prim[1]] = "R"
    lead_list = [leads[lab] for lab in labels]
    H = spec.hamiltonian()
    K = spec.dampings()
    n = len(labels)
    eye = np.eye(n)
    iK = 1j * np.diag(K)
    KK = 4.0 * np.outer(K, K)

    def kernel(eps):
        Gr = np.linalg.solve(eps * eye - H + iK, eye)
        T = KK * np.abs(Gr) ** 2
        f = np.array([fermi_dirac(eps, ld) for ld in lead_list])
        # J_v = sum_v' T[v, v'] (f_v - f_v'); equal to the inflow/outflow form by unitarity.
        return (T * (f[:, None] - f[None, :])).sum(axis=1)

    poles = np.linalg.eigvals(H - iK)
    widths = np.maximum(-poles.imag, K.min())
    q = integrate(kernel, lead_list, poles.real, widths, cfg)
    names = [f"{roles[lab]}.{lab}" for lab in labels]
    return _result(q, names, cfg)
