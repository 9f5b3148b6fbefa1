"""Semiclassical regime: T = T_half/80, Omega = 1/2, k = 5 (K = pi/8).

Classical side: the period-2 (j=1) and period-4 (j=2) accelerator modes and
Poincare sections seeded at (2.7, 0) and (pi, pi/2). The seeds are given in
section coordinates (theta, T p) sampled just before a kick; the kicked map
itself uses J = T p + pi Omega.

Quantum side: the 320x320 Floquet block at theta0 = 0, and the Husimi functions
of the quasi-eigenstates that sit on each island chain.

Writes into ./demo_output/fig1/.
"""

from pathlib import Path

import numpy as np

from deltakick import classical, floquet, phasespace
from deltakick.output import write_csv, write_pgm16
from deltakick.params import make_params

out = Path("demo_output/fig1")
out.mkdir(parents=True, exist_ok=True)

params = make_params(M=1, N=80, R=1, S=2, k=5)
print(f"K = {params.K:.4f}, Omega = {params.Omega}, P = {params.P}")

# --- classical map -----------------------------------------------------------
mp = classical.MapParams.classical(params.K, params.Omega)
modes = {}
for o, j in [(2, 1), (4, 2)]:
    orbit = classical.find_accel_orbit(o, j, mp)
    modes[o] = orbit
    th, J = classical.map_to_section(orbit.theta, orbit.J, mp.Omega)
    print(f"(o={o}, j={j}) trace {orbit.monodromy_trace:+.3f}  section points:",
          ", ".join(f"({a:.2f}, {b:.2f})" for a, b in zip(th, J)))

seeds = [(2.7, 0.0), (np.pi, np.pi / 2)]
inits = [classical.section_to_map(*s, mp.Omega) for s in seeds]
rows = []
for tid, (th, J) in enumerate(classical.poincare_section(inits, 5000, mp)):
    th, J = classical.map_to_section(th, J, mp.Omega)
    rows += [(tid, i, a, b) for i, (a, b) in enumerate(zip(th, J))]
write_csv(out / "poincare.csv", ["traj_id", "step", "theta", "J"], rows)

# the (pi, pi/2) seed is itself a point of the stable period-4 orbit
th, J = classical.poincare_section([inits[1]], 8, mp)[0]
print("orbit from (pi, pi/2):", np.round(np.c_[th, J][:4], 3).tolist())

# --- quantum side ---------------------------------------------------------------
block = floquet.build_block(params, 0.0)
states = floquet.diagonalize(block)
print(f"unitarity error {block.unitarity_error():.1e}, "
      f"worst residual {max(s.residual for s in states):.1e}")

grid = phasespace.cell_grid(params, per_copy=64)
husimis = [phasespace.eigenstate_husimi(s, params, grid, 0.0) for s in states]
for o, orbit in modes.items():
    fractions = [phasespace.mass_near(H, params, orbit.points, 0.5) for H in husimis]
    best = int(np.argmax(fractions))
    print(f"state {best} (omega = {states[best].quasi_energy:.3f}) holds "
          f"{fractions[best]:.0%} of its Husimi mass near the o={o} orbit")
    fine = phasespace.eigenstate_husimi(states[best], params, phasespace.cell_grid(params), 0.0)
    write_pgm16(out / f"husimi_o{o}_state{best}.pgm", fine.values)

print(f"files in {out}/")
