"""Quantum-dot circuit model and its Heisenberg-Langevin drift matrices.

Energies are measured in units of the primary-lead damping (hbar = e = k_B = 1,
Fermi energy at zero). Every dot carries exactly one wide-band lead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PRIMARY = "primary"
AUXILIARY = "auxiliary"

# Input-field coupling constant: the HLE drive is -i sqrt(2 pi) F_in.
INPUT_COUPLING = -1j * math.sqrt(2.0 * math.pi)
# Output extraction constant: F_out = F_in - i sqrt(2/pi) K O.
OUTPUT_COUPLING = -1j * math.sqrt(2.0 / math.pi)

ADIABATIC_MARGIN = 10.0


class InvalidCircuitError(ValueError):
    """Raised when a circuit fails validation; carries the full report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid circuit: " + "; ".join(report.violations))


@dataclass(frozen=True)
class DotSpec:
    label: str
    role: str
    onsite: float
    lead_damping: float


@dataclass(frozen=True)
class CircuitSpec:
    """Declarative dot network.

    ``couplings`` maps a pair of dot labels ``(j, k)`` to the Hamiltonian
    matrix element ``H[j, k]``; the conjugate entry ``H[k, j]`` is implied.
    """

    dots: tuple[DotSpec, ...]
    couplings: Mapping[tuple[str, str], complex] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "dots", tuple(self.dots))
        object.__setattr__(self, "couplings", dict(self.couplings))

    @property
    def primaries(self) -> tuple[DotSpec, ...]:
        return tuple(d for d in self.dots if d.role == PRIMARY)

    @property
    def auxiliaries(self) -> tuple[DotSpec, ...]:
        return tuple(d for d in self.dots if d.role == AUXILIARY)

    @property
    def port_order(self) -> tuple[DotSpec, ...]:
        return self.primaries + self.auxiliaries

    @property
    def port_labels(self) -> tuple[str, ...]:
        return tuple(d.label for d in self.port_order)

    def with_damping(self, labels, damping: float) -> "CircuitSpec":
        """Copy of the circuit with the lead damping of ``labels`` replaced."""
        labels = set(labels)
        dots = tuple(
            DotSpec(d.label, d.role, d.onsite, damping) if d.label in labels else d
            for d in self.dots
        )
        return CircuitSpec(dots, self.couplings)

    def hamiltonian(self) -> np.ndarray:
        """Coherent Hamiltonian in port order (primaries first)."""
        index = {lab: i for i, lab in enumerate(self.port_labels)}
        n = len(index)
        H = np.zeros((n, n), dtype=complex)
        for i, dot in enumerate(self.port_order):
            H[i, i] = dot.onsite
        for (a, b), value in self.couplings.items():
            j, k = index[a], index[b]
            H[j, k] = complex(value)
            H[k, j] = complex(value).conjugate()
        return H

    def dampings(self) -> np.ndarray:
        return np.array([d.lead_damping for d in self.port_order], dtype=float)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_circuit(spec: CircuitSpec) -> ValidationReport:
    """Collect every structural problem with ``spec`` instead of stopping at the first."""
    problems: list[str] = []
    seen: set[str] = set()
    for dot in spec.dots:
        if dot.label in seen:
            problems.append(f"duplicate label {dot.label!r}")
        seen.add(dot.label)
        if dot.role not in (PRIMARY, AUXILIARY):
            problems.append(f"unknown role {dot.role!r} for dot {dot.label!r}")
        if not math.isfinite(dot.onsite):
            problems.append(f"non-finite onsite energy on dot {dot.label!r}")
        if not math.isfinite(dot.lead_damping):
            problems.append(f"non-finite damping on dot {dot.label!r}")
        elif dot.lead_damping <= 0:
            problems.append(f"nonpositive damping on dot {dot.label!r}")

    pairs: dict[frozenset, complex] = {}
    for (a, b), value in spec.couplings.items():
        value = complex(value)
        for end in (a, b):
            if end not in seen:
                problems.append(f"dangling endpoint {end!r} in coupling ({a!r}, {b!r})")
        if a == b:
            problems.append(f"self-coupling on dot {a!r}")
            continue
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            problems.append(f"non-finite coupling ({a!r}, {b!r})")
            continue
        key = frozenset((a, b))
        # Orient every entry as H[min, max] so both spellings can be compared.
        oriented = value if a < b else value.conjugate()
        if key in pairs and pairs[key] != oriented:
            problems.append(f"non-Hermitian coupling between {a!r} and {b!r}")
        pairs[key] = oriented
    return ValidationReport(tuple(problems))


@dataclass(frozen=True, eq=False)
class DriftModel:
    """Linear HLE ``dO/dt = M O + C F_in`` with output ``F_out = F_in - i sqrt(2/pi) K O``."""

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    port_labels: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.M.shape[0]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


def assemble_drift(spec: CircuitSpec) -> DriftModel:
    report = validate_circuit(spec)
    if not report.ok:
        raise InvalidCircuitError(report)
    H = spec.hamiltonian()
    K = np.diag(spec.dampings())
    n = H.shape[0]
    M = -1j * H - K
    C = INPUT_COUPLING * np.eye(n, dtype=complex)
    return DriftModel(_frozen(M), _frozen(C), _frozen(K), spec.port_labels)


@dataclass(frozen=True, eq=False)
class ReducedCircuit:
    """Primary-dot dynamics after quasi-static elimination of the auxiliary dots.

    ``effective_drift`` is the primary-block drift, ``input_routing[n, m]`` the
    coefficient multiplying auxiliary input field ``m`` in the equation of
    primary dot ``n``.
    """

    effective_drift: np.ndarray
    input_routing: np.ndarray
    K: np.ndarray
    port_labels: tuple[str, ...]
    auxiliary_labels: tuple[str, ...]

    @property
    def self_terms(self) -> np.ndarray:
        return -np.diag(self.effective_drift)

    @property
    def phi(self) -> complex:
        # coefficient of d2 in -dd1/dt
        return complex(-self.effective_drift[0, 1])

    @property
    def psi(self) -> complex:
        # coefficient of d1 in -dd2/dt
        return complex(-self.effective_drift[1, 0])

    def as_drift(self) -> DriftModel:
        """Primary-port drift model; M is no longer of the form -iH - K."""
        n = self.effective_drift.shape[0]
        C = INPUT_COUPLING * np.eye(n, dtype=complex)
        return DriftModel(self.effective_drift, _frozen(C), self.K, self.port_labels)


def adiabatic_reduce(spec: CircuitSpec) -> ReducedCircuit:
    if not spec.auxiliaries:
        raise ValueError("nothing to eliminate: circuit has no auxiliary dots")
    drift = assemble_drift(spec)
    n_p = len(spec.primaries)
    aux_damp = min(d.lead_damping for d in spec.auxiliaries)
    H = spec.hamiltonian()
    others = [abs(d.onsite) for d in spec.dots] + [d.lead_damping for d in spec.primaries]
    others += [abs(H[j, k]) for j in range(len(H)) for k in range(len(H)) if j != k]
    if aux_damp < ADIABATIC_MARGIN * max(others, default=0.0):
        warnings.warn(
            f"auxiliary damping {aux_damp:g} is not {ADIABATIC_MARGIN:g}x larger than "
            f"the other energy scales (max {max(others):g}); elimination is inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    M = drift.M
    M_pp, M_pa = M[:n_p, :n_p], M[:n_p, n_p:]
    M_ap, M_aa = M[n_p:, :n_p], M[n_p:, n_p:]
    C_a = drift.C[n_p:, n_p:]
    # a = -M_aa^{-1} (M_ap d + C_a a_in)
    X = np.linalg.solve(M_aa, np.hstack([M_ap, C_a]))
    eff = M_pp - M_pa @ X[:, :n_p]
    routing = -M_pa @ X[:, n_p:]
    return ReducedCircuit(
        _frozen(eff),
        _frozen(routing),
        _frozen(drift.K[:n_p, :n_p]),
        drift.port_labels[:n_p],
        drift.port_labels[n_p:],
    )


@dataclass(frozen=True)
class ThreeDotParams:
    """Two primary dots with a direct coupling ``g`` and one shared damped auxiliary dot.

    ``g=None`` selects the directional coupling ``i lam**2 / kappa``.
    """

    eps_d: float
    lam: float
    kappa: float
    gamma: float = 1.0
    g: complex | None = None
    eps_aux: float = 0.0

    @property
    def coupling(self) -> complex:
        if self.g is None:
            return 1j * (self.lam**2 / self.kappa)
        return complex(self.g)

    @property
    def alpha(self) -> float:
        return self.lam**2 / (self.kappa * self.gamma)

    def spec(self) -> CircuitSpec:
        dots = (
            DotSpec("d1", PRIMARY, self.eps_d, self.gamma),
            DotSpec("d2", PRIMARY, self.eps_d, self.gamma),
            DotSpec("a", AUXILIARY, self.eps_aux, self.kappa),
        )
        couplings = {
            ("d1", "d2"): self.coupling,
            ("a", "d1"): self.lam,
            ("a", "d2"): self.lam,
        }
        return CircuitSpec(dots, couplings)


@dataclass(frozen=True)
class FourDotParams:
    """Two primary dots linked only through two damped auxiliary dots.

    Hoppings are ``g11 = lam1``, ``g21 = lam1 exp(i phi)``, ``g12 = g22 = lam2``.
    ``phi=None`` selects the directional loop phase.
    """

    eps_d: float
    lam1: float
    lam2: float
    delta1: float
    delta2: float
    kappa: float
    gamma: float = 1.0
    phi: float | None = None

    @property
    def loop_phase(self) -> float:
        if self.phi is None:
            from .scattering import directional_phase

            return directional_phase(self.lam1, self.lam2, self.delta1, self.delta2, self.kappa)
        return float(self.phi)

    @property
    def hoppings(self) -> tuple[complex, complex, complex, complex]:
        """(g11, g12, g21, g22)."""
        g21 = self.lam1 * np.exp(1j * self.loop_phase)
        return complex(self.lam1), complex(self.lam2), complex(g21), complex(self.lam2)

    def spec(self) -> CircuitSpec:
        g11, g12, g21, g22 = self.hoppings
        dots = (
            DotSpec("d1", PRIMARY, self.eps_d, self.gamma),
            DotSpec("d2", PRIMARY, self.eps_d, self.gamma),
            DotSpec("a1", AUXILIARY, self.delta1, self.kappa),
            DotSpec("a2", AUXILIARY, self.delta2, self.kappa),
        )
        # H_coh contains g_nm d_n a_m^dagger, i.e. H[a_m, d_n] = g_nm.
        couplings = {
            ("a1", "d1"): g11,
            ("a2", "d1"): g12,
            ("a1", "d2"): g21,
            ("a2", "d2"): g22,
        }
        return CircuitSpec(dots, couplings)
