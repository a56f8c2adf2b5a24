import math

import numpy as np
import pytest
from oracles import thermal_exponent, zero_temperature_B
from scipy.integrate import quad

from nrdots.circuit import ThreeDotParams
from nrdots.phonon import (
    OhmicBath,
    PolaronParams,
    correlation_B,
    correlation_exponent,
    default_tau_max,
    generalized_transmission,
    grid_nodes_for,
    polaron_currents,
    polaron_reflection,
    polaron_reflection_zero,
    reorganization_shift,
)
from nrdots.quadrature import LeadState
from nrdots.transport import bias_leads, current_three_dot


def matched(nu, T=0.5, omega_c=10.0, eps_tilde=1.0):
    bath = OhmicBath(nu, omega_c, T)
    return bath, PolaronParams.from_renormalized(eps_tilde, bath, 10.0, 100.0)


@pytest.mark.parametrize("nu, wc", [(0.1, 10.0), (0.4, 3.0), (1.2, 25.0)])
def test_shift_against_quadrature(nu, wc):
    bath = OhmicBath(nu, wc, 0.5)
    want = quad(lambda w: bath.spectral_density(w) / (math.pi * w), 0, np.inf, epsabs=1e-13)[0]
    assert reorganization_shift(bath) == pytest.approx(want, abs=1e-10)
    assert reorganization_shift(bath) == nu * wc


def test_bath_validation():
    with pytest.raises(ValueError):
        OhmicBath(-0.1, 10.0, 1.0)
    with pytest.raises(ValueError):
        OhmicBath(0.1, 0.0, 1.0)
    with pytest.raises(ValueError):
        OhmicBath(0.1, 10.0, 0.0)


def test_exponent_at_origin_and_imaginary_part():
    bath = OhmicBath(0.3, 10.0, 0.5)
    assert correlation_exponent(bath, 0.0) == 0.0
    tau = np.linspace(0, 5, 41)
    phi = correlation_exponent(bath, tau)
    np.testing.assert_allclose(phi.imag, 0.3 * np.arctan(10.0 * tau), rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        correlation_exponent(bath, -1.0)


@pytest.mark.parametrize("T", [0.05, 0.5, 3.0])
def test_thermal_part_against_log_gamma(T):
    nu, wc = 0.25, 10.0
    tau = np.linspace(0, 12, 25)
    phi = correlation_exponent(OhmicBath(nu, wc, T), tau)
    thermal = phi.real - 0.5 * nu * np.log1p((wc * tau) ** 2)
    np.testing.assert_allclose(thermal, thermal_exponent(nu, wc, T, tau), rtol=1e-8, atol=1e-12)


def test_low_temperature_matches_power_law():
    nu, wc = 0.3, 10.0
    tau = np.linspace(0, 15, 61)
    B = np.exp(-correlation_exponent(OhmicBath(nu, wc, 1e-4), tau))
    np.testing.assert_allclose(B, zero_temperature_B(nu, wc, tau), rtol=0, atol=1e-4)


def test_B_grid_bounded_and_decaying():
    grid = correlation_B(OhmicBath(0.2, 10.0, 0.5), 15.0, 512)
    assert grid.tau_nodes.size >= 512
    assert np.all(np.diff(grid.tau_nodes) > 0)
    assert grid.weights.sum() == pytest.approx(15.0, rel=1e-13)
    mag = np.abs(grid.B_values)
    assert np.all(mag <= 1.0)
    assert np.all(np.diff(mag) <= 0)
    assert np.exp(-correlation_exponent(OhmicBath(0.2, 10.0, 0.5), 0.0)) == 1.0
    with pytest.raises(ValueError):
        correlation_B(OhmicBath(0.2, 10.0, 0.5), 15.0, 32)
    with pytest.raises(ValueError):
        correlation_B(OhmicBath(0.2, 10.0, 0.5), 0.0)


def test_zero_coupling_transmission_is_lorentzian():
    bath, p = matched(0.0)
    grid = correlation_B(bath, default_tau_max(p.gamma), grid_nodes_for(15.0, 30.0, 10.0))
    eps = np.linspace(-25, 25, 101)
    x = eps - p.renorm_onsite
    want = 2 * p.gamma / (4 * p.gamma**2 + x**2)
    np.testing.assert_allclose(generalized_transmission(p, grid, eps), want, atol=1e-12)
    assert generalized_transmission(p, grid, 1.0) == pytest.approx(1 / (2 * p.gamma), abs=1e-12)


def test_sum_rule_over_symmetric_window():
    # weight pi is conserved; tails agree with the bare Lorentzian up to O(L^-3)
    bath, p = matched(0.3)
    errs = []
    for L in (100.0, 300.0):
        grid = correlation_B(bath, default_tau_max(p.gamma), grid_nodes_for(15.0, L, bath.omega_c))
        e0 = p.renorm_onsite
        val = quad(lambda e: generalized_transmission(p, grid, e), e0 - L, e0 + L,
                   points=[e0], limit=2000, epsabs=1e-12)[0]
        errs.append(abs(val - 2 * math.atan(L / (2 * p.gamma))))
    assert errs[1] < 2e-5
    assert errs[0] / errs[1] > 15


def test_grid_refinement_is_converged():
    bath, p = matched(0.2)
    eps = np.linspace(-30, 30, 61)
    n = grid_nodes_for(15.0, 40.0, bath.omega_c)
    a = generalized_transmission(p, correlation_B(bath, 15.0, n), eps)
    b = generalized_transmission(p, correlation_B(bath, 15.0, 2 * n), eps)
    assert np.abs(a - b).max() < 1e-8


def test_zero_coupling_currents_equal_noninteracting():
    bath, p = matched(0.0)
    for V in (-20.0, 5.0, 20.0):
        leads = bias_leads(V, 0.5, -50.0)
        ph = polaron_currents(p, bath, leads)
        ref = current_three_dot(ThreeDotParams(1.0, 10.0, 100.0, gamma=1.0), leads)
        assert ph.J_L == pytest.approx(ref.J_L, rel=1e-6, abs=1e-12)
        assert ph.J_R == pytest.approx(ref.J_R, rel=1e-6, abs=1e-12)
        for k in ("L.absorbed", "R.direct", "R.transfer"):
            assert ph.breakdown[k] == pytest.approx(ref.breakdown[k], rel=1e-6, abs=1e-12)


def test_equilibrium_has_no_current():
    bath, p = matched(0.3)
    leads = {k: LeadState(2.0, 0.5, k) for k in ("L", "R", "a")}
    res = polaron_currents(p, bath, leads)
    assert res.J_L == 0.0 and res.J_R == 0.0


def test_currents_decrease_with_coupling():
    JL, JR = [], []
    for nu in (0.0, 0.08, 0.2, 0.4):
        bath, p = matched(nu)
        res = polaron_currents(p, bath, bias_leads(20.0, 0.5, -50.0))
        assert res.converged
        assert res.J_L == pytest.approx(res.breakdown["L.absorbed"])
        assert res.J_R == pytest.approx(res.breakdown["R.direct"] + res.breakdown["R.transfer"])
        JL.append(res.J_L)
        JR.append(abs(res.J_R))
    assert all(np.diff(JL) < 0) and all(np.diff(JR) < 0)


def test_currents_require_matching():
    bath = OhmicBath(0.1, 10.0, 0.5)
    p = PolaronParams.from_renormalized(1.0, bath, 10.0, 100.0, gamma=2.0)
    with pytest.raises(ValueError, match="Gamma = lam"):
        polaron_currents(p, bath, bias_leads(10.0, 0.5, -50.0))


@pytest.mark.parametrize("nu", [0.0, 0.1, 0.3])
def test_reflection_zero_sits_at_renormalized_level(nu):
    _, p = matched(nu)
    z = polaron_reflection_zero(p)
    assert abs(z - p.renorm_onsite) < 1e-10
    w = np.linspace(-20, 20, 81)
    assert np.all(np.abs(polaron_reflection(p, w)) <= 1 + 1e-15)


def test_bare_and_renormalized_constructors():
    bath = OhmicBath(0.2, 10.0, 0.5)
    a = PolaronParams.from_bare(3.0, bath, 10.0, 100.0)
    assert a.renorm_onsite == pytest.approx(1.0) and a.bare_onsite == 3.0
    b = PolaronParams.from_renormalized(1.0, bath, 10.0, 100.0)
    assert b.bare_onsite == pytest.approx(3.0)


def test_large_shift_warns():
    with pytest.warns(RuntimeWarning, match="kappa/10"):
        PolaronParams.from_renormalized(1.0, OhmicBath(2.0, 10.0, 0.5), 10.0, 100.0)
