"""Nonreciprocal electron transport in quantum-dot circuits.

Input-output scattering matrices, directionality and impedance-matching
conditions, Landauer-Buttiker and closed-form currents, and the polaron
treatment of local electron-phonon coupling.
"""

from .circuit import (
    AUXILIARY,
    PRIMARY,
    CircuitSpec,
    DotSpec,
    DriftModel,
    FourDotParams,
    InvalidCircuitError,
    ReducedCircuit,
    ThreeDotParams,
    ValidationReport,
    adiabatic_reduce,
    assemble_drift,
    validate_circuit,
)
from .phonon import (
    CorrelationGrid,
    OhmicBath,
    PolaronParams,
    correlation_B,
    correlation_exponent,
    generalized_transmission,
    polaron_currents,
    polaron_reflection,
    polaron_reflection_zero,
    reorganization_shift,
)
from .quadrature import LeadState, QuadratureConfig, QuadResult, fermi_dirac, integrate
from .scattering import (
    IsolationReport,
    MatchingSolution,
    NoPhaseSolutionError,
    ScatteringMatrix,
    SingularResolventError,
    directional_coupling,
    directional_phase,
    directionality_condition,
    four_dot_closed_form,
    four_dot_couplings,
    impedance_matching,
    isolation_report,
    scattering_matrix,
    solve_matching_numerically,
    three_dot_closed_form,
)
from .transport import (
    CurrentResult,
    bias_leads,
    current_four_dot,
    current_three_dot,
    lb_current,
    lb_transmissions,
)

__version__ = "0.1.0"
