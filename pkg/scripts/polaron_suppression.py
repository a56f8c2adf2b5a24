"""Phonon suppression of the directional currents at fixed forward bias.

Writes nu, J_L, J_R and the ratios to the phonon-free values, then checks
that both magnitudes fall monotonically.

    python scripts/polaron_suppression.py --bias 20 --out polaron.csv
"""

import argparse
import sys

import numpy as np

from nrdots.phonon import OhmicBath, PolaronParams, polaron_currents
from nrdots.transport import bias_leads


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bias", type=float, default=20.0)
    ap.add_argument("--omega-c", type=float, default=10.0)
    ap.add_argument("--temperature", type=float, default=0.5)
    ap.add_argument("--nu-max", type=float, default=0.6)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--out")
    args = ap.parse_args()

    leads = bias_leads(args.bias, args.temperature, -50.0)
    rows = []
    for nu in np.linspace(0.0, args.nu_max, args.points):
        bath = OhmicBath(nu, args.omega_c, args.temperature)
        p = PolaronParams.from_renormalized(1.0, bath, 10.0, 100.0)
        r = polaron_currents(p, bath, leads)
        rows.append((nu, r.J_L, r.J_R, r.converged))
    JL0, JR0 = rows[0][1], rows[0][2]

    out = open(args.out, "w") if args.out else sys.stdout
    out.write("nu,J_L,J_R,J_L/J_L0,J_R/J_R0,converged\n")
    for nu, jl, jr, ok in rows:
        out.write(f"{nu:.6g},{jl:.10g},{jr:.10g},{jl / JL0:.6f},{jr / JR0:.6f},{int(ok)}\n")
    if args.out:
        out.close()

    JL = np.array([r[1] for r in rows])
    JR = np.abs([r[2] for r in rows])
    mono = bool(np.all(np.diff(JL) < 0) and np.all(np.diff(JR) < 0))
    print(f"monotonic decrease of J_L and |J_R|: {mono}", file=sys.stderr)
    return 0 if mono else 1


if __name__ == "__main__":
    sys.exit(main())
