"""Sensitivity of the currents to the quadrature tolerance and the polaron time grid.

Prints the change in J_L, J_R relative to the tightest setting. The default
settings should sit well below the acceptance tolerances.
"""

import numpy as np

from nrdots.circuit import ThreeDotParams
from nrdots.phonon import OhmicBath, PolaronParams, correlation_B, default_tau_max, polaron_currents, polaron_grid
from nrdots.quadrature import QuadratureConfig
from nrdots.transport import bias_leads, current_three_dot

VOLTAGES = (-30.0, -5.0, 5.0, 20.0, 40.0)


def tolerance_sweep():
    p = ThreeDotParams(1.0, 10.0, 100.0, 1.0)
    ref_cfg = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-15)
    ref = [current_three_dot(p, bias_leads(V, 0.5, -50.0), ref_cfg) for V in VOLTAGES]
    print("three-dot currents vs rel_tol (max abs change over V)")
    for tol in (1e-4, 1e-6, 1e-8, 1e-10):
        cfg = QuadratureConfig(rel_tol=tol)
        got = [current_three_dot(p, bias_leads(V, 0.5, -50.0), cfg) for V in VOLTAGES]
        dJ = max(max(abs(a.J_L - b.J_L), abs(a.J_R - b.J_R)) for a, b in zip(got, ref))
        err = max(g.error for g in got)
        print(f"  rel_tol {tol:.0e}: change {dJ:.2e}, reported error {err:.2e}")


def grid_sweep(nu=0.4):
    bath = OhmicBath(nu, 10.0, 0.5)
    p = PolaronParams.from_renormalized(1.0, bath, 10.0, 100.0)
    cfg = QuadratureConfig()
    print(f"polaron currents vs time-grid size (nu = {nu})")
    base = {V: polaron_grid(p, bath, list(bias_leads(V, 0.5, -50.0).values()), cfg) for V in VOLTAGES}
    ref = {}
    for V in VOLTAGES:
        g = base[V]
        fine = correlation_B(bath, g.tau_max, 4 * g.tau_nodes.size)
        ref[V] = polaron_currents(p, bath, bias_leads(V, 0.5, -50.0), cfg, fine)
    for factor in (0.5, 1.0, 2.0):
        worst = 0.0
        for V in VOLTAGES:
            n = max(64, int(factor * base[V].tau_nodes.size))
            g = correlation_B(bath, default_tau_max(p.gamma), n)
            r = polaron_currents(p, bath, bias_leads(V, 0.5, -50.0), cfg, g)
            worst = max(worst, abs(r.J_L - ref[V].J_L), abs(r.J_R - ref[V].J_R))
        print(f"  {factor:3g} x default nodes: max change {worst:.2e}")
    print("  truncation bound exp(-2 Gamma tau_max) / (2 Gamma) = %.1e" % (np.exp(-2 * default_tau_max(1.0)) / 2))


if __name__ == "__main__":
    tolerance_sweep()
    grid_sweep()
