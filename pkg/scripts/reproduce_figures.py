"""Write every figure dataset and print a few headline numbers from each.

    python scripts/reproduce_figures.py --out figures --threads 4
"""

import argparse
import csv
import os
import time

import numpy as np

from nrdots.figures import FIGURE_IDS, build_figure


def load(path):
    with open(path) as fh:
        rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
    head, body = rows[0], rows[1:]
    cols = {}
    for i, name in enumerate(head):
        try:
            cols[name] = np.array([float(r[i]) for r in body])
        except ValueError:
            cols[name] = np.array([r[i] for r in body])
    return cols


def summarize(path):
    c = load(path)
    if "S21" in c:
        x = c.get("omega", c.get("g_ratio"))
        i = int(np.argmax(c["S21"]))
        return f"max |S21|^2 = {c['S21'][i]:.4f} at {x[i]:g}, max |S12|^2 = {c['S12'].max():.2e}"
    if "J_L" in c:
        V = c["V"]
        return (f"J_L in [{c['J_L'].min():.4f}, {c['J_L'].max():.4f}], "
                f"J_R in [{c['J_R'].min():.4f}, {c['J_R'].max():.4f}] over V in [{V[0]:g}, {V[-1]:g}]")
    last = {k: v[-1] for k, v in c.items() if k != "V"}
    return "at largest V: " + ", ".join(f"{k} = {v:.4f}" for k, v in last.items())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("ids", nargs="*", default=list(FIGURE_IDS))
    args = ap.parse_args()
    for fid in args.ids:
        t0 = time.perf_counter()
        paths, ok = build_figure(fid, args.out, args.threads)
        dt = time.perf_counter() - t0
        for p in paths:
            flag = "" if ok else "  [not converged]"
            print(f"{fid:6s} {dt:6.1f}s  {p}: {summarize(p)}{flag}")


if __name__ == "__main__":
    main()
