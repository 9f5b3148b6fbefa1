"""Near the half-Talbot time: T = (49/50) T_half with Omega = 1 and
T = (29/30) T_half with Omega = 1/2, k = 1, theta0 = 0.

These are the big blocks (P = 2450 and 3480); diagonalizing each takes a
minute or two. The epsilon-classical map (K_eps = eps k, sgn(eps) = -1) is
the classical reference here: its period-1 fixed point for Omega = 1 and its
period-2 accelerator mode for Omega = 1/2.

For every `stride`-th eigenstate the Husimi function is sampled on one torus
copy, and the most sharply peaked one is kept.

Usage: python demos/fig2_near_half_talbot.py [stride]
"""

import sys
import time
from pathlib import Path

import numpy as np

from deltakick import classical, floquet, phasespace
from deltakick.output import write_pgm16
from deltakick.params import make_params

stride = int(sys.argv[1]) if len(sys.argv) > 1 else 5
out = Path("demo_output/fig2")
out.mkdir(parents=True, exist_ok=True)

for label, (M, N, R, S), (o, j) in [("a", (49, 50, 1, 1), (1, -1)), ("b", (29, 30, 1, 2), (2, -1))]:
    params = make_params(M, N, R, S, k=1.0)
    mp = classical.MapParams.from_system(params, "epsilon")
    orbit = classical.find_accel_orbit(o, j, mp)
    print(f"({label}) P = {params.P}, eps = {params.epsilon:.4f}, K_eps = {mp.kick:.4f}; "
          f"eps-map (o={o}, j={j}) orbit trace {orbit.monodromy_trace:+.3f}")

    t = time.perf_counter()
    states = floquet.diagonalize(floquet.build_block(params, 0.0))
    print(f"    diagonalized in {time.perf_counter() - t:.0f} s")

    # one torus copy in (z, p): z in [0, 2 pi), p in [0, 2 pi / T)
    grid = phasespace.cell_grid(params, per_copy=128, copies=(1, 1))
    best, peak = None, -1.0
    for s in states[::stride]:
        H = phasespace.eigenstate_husimi(s, params, grid, 0.0)
        if H.values.max() > peak:
            best, peak = s, H.values.max()
    H = phasespace.eigenstate_husimi(best, params, phasespace.cell_grid(params, 256, copies=(1, 1)), 0.0)
    write_pgm16(out / f"husimi_{label}_state{best.index}.pgm", H.values)
    print(f"    sharpest state {best.index} (omega = {best.quasi_energy:.4f}), peak {peak:.3f}")
