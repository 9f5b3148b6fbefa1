"""Two independent propagators for the same resonant system.

`evolve` kicks a plane wave on the integer momentum ladder; `floquet` applies
the P x P Bloch blocks. A plane wave is a superposition of Bloch states, so
averaging the block evolution over L Bloch angles must reproduce the ladder
evolution amplitude by amplitude (up to the constant period phase that the
block leaves out).
"""

import numpy as np

from deltakick import evolve, floquet
from deltakick.params import make_params

params = make_params(M=1, N=80, R=1, S=2, k=5)
kicks, L = 10, 32
P, SM = params.P, params.slots_per_unit

state = evolve.evolve(evolve.init_plane_wave(params.beta), params, kicks)
q = np.rint((state.momenta - float(params.beta_raw)) * SM).astype(int)
q0 = int(round((params.beta - float(params.beta_raw)) * SM))

amps = np.zeros(q.size, dtype=complex)
for jb in range(L):
    theta0 = 2 * np.pi * jb / L
    block = floquet.build_block(params, theta0).entries
    v = np.zeros(P, dtype=complex)
    v[q0 % P] = 1.0
    for _ in range(kicks):
        v = block @ v
    amps += np.exp(1j * theta0 * (q0 // P - q // P)) * v[q % P] / L
amps *= np.exp(-1j * floquet.global_phase(params) * kicks)

print(f"{q.size} ladder components after {kicks} kicks")
print(f"max |ladder - Bloch| = {np.max(np.abs(amps - state.amplitudes)):.2e}")
