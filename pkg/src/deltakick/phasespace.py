"""Husimi functions on the quantum phase-space cell and torus folding."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .floquet import apply_kick, kick_coefficients, ladder_momentum, unfold_state
from .params import TWO_PI

GAUSS_CUTOFF = 1e-12


def coherent_overlap(p_q, z_c, p_c, lam):
    """``<p_q | z_c, p_c>`` for a coherent state of squeezing ``lam`` (hbar = 1)."""
    p_q = np.asarray(p_q, dtype=float)
    norm = (math.pi * lam) ** -0.25
    phase = np.exp(0.5j * (p_c - 2.0 * p_q) * z_c)
    return norm * phase * np.exp(-((p_q - p_c) ** 2) / (2.0 * lam))


def ladder_cutoff(lam, cutoff=GAUSS_CUTOFF):
    """Momentum distance beyond which the coherent Gaussian factor is below ``cutoff``."""
    return math.sqrt(-2.0 * lam * math.log(cutoff))


@dataclass(frozen=True)
class GridSpec:
    """Sample points ``z0 + i*(z1-z0)/nz`` and ``p0 + j*(p1-p0)/np_``; the
    upper ends are excluded so a full cell tiles periodically."""

    z0: float
    z1: float
    nz: int
    p0: float
    p1: float
    np_: int

    @property
    def z(self):
        return self.z0 + (self.z1 - self.z0) * np.arange(self.nz) / self.nz

    @property
    def p(self):
        return self.p0 + (self.p1 - self.p0) * np.arange(self.np_) / self.np_

    @property
    def dz(self):
        return (self.z1 - self.z0) / self.nz

    @property
    def dp(self):
        return (self.p1 - self.p0) / self.np_

    def shifted(self, dz=0.0, dp=0.0):
        return GridSpec(self.z0 + dz, self.z1 + dz, self.nz, self.p0 + dp, self.p1 + dp, self.np_)


def cell_grid(params, per_copy=256, max_points=2048, copies=None):
    """Grid over the full cell ``[0, MS 2pi) x [0, NS)``.

    ``per_copy`` samples per 2*pi torus copy along each axis, capped at
    ``max_points`` per axis. ``copies=(cz, cp)`` restricts the grid to the
    first ``cz`` x ``cp`` torus copies.
    """
    MS = params.M * params.S
    cz, cp = (MS, MS) if copies is None else copies
    n_z = min(per_copy * cz, max_points)
    n_p = min(per_copy * cp, max_points)
    p_span = TWO_PI / params.T
    return GridSpec(0.0, cz * TWO_PI, n_z, 0.0, cp * p_span, n_p)


@dataclass
class HusimiGrid:
    grid: GridSpec
    values: np.ndarray  # shape (np_, nz): rows are momenta

    @property
    def z(self):
        return self.grid.z

    @property
    def p(self):
        return self.grid.p

    def integral(self):
        """``sum H dz dp / (2 pi)`` over the grid."""
        return float(self.values.sum() * self.grid.dz * self.grid.dp / TWO_PI)


def husimi_map(q, amps, params, grid, chunk=256):
    """``|sum_q conj(Phi_q) <p_q|z',p'>|^2`` sampled on ``grid``.

    ``q`` must be a contiguous run of ladder slots. Terms whose Gaussian factor
    is below 1e-12 are dropped; a warning is issued when the supplied segment
    does not reach that far past the grid.
    """
    q = np.asarray(q)
    amps = np.asarray(amps, dtype=complex)
    lam = params.lam
    cut = ladder_cutoff(lam)
    step = float(params.ladder_step)
    pq = ladder_momentum(params, q)
    if pq[0] > grid.p0 - cut or pq[-1] < grid.p1 + cut:
        tail = np.abs(amps[:1]).max() + np.abs(amps[-1:]).max()
        if tail > 1e-10:
            warnings.warn("ladder segment does not cover the Gaussian cutoff; "
                          "Husimi truncation error may exceed 1e-10")
    zs = grid.z
    ps = grid.p
    out = np.empty((ps.size, zs.size))
    norm = 1.0 / math.sqrt(math.pi * lam)
    for r0 in range(0, ps.size, chunk):
        prow = ps[r0:r0 + chunk]
        lo = np.searchsorted(pq, prow[0] - cut)
        hi = np.searchsorted(pq, prow[-1] + cut, side="right")
        if hi <= lo:
            out[r0:r0 + chunk] = 0.0
            continue
        sub_p = pq[lo:hi]
        W = np.conj(amps[lo:hi])[None, :] * np.exp(
            -((sub_p[None, :] - prow[:, None]) ** 2) / (2.0 * lam))
        j = np.arange(hi - lo)
        E = np.exp(-1j * step * np.outer(j, zs))
        out[r0:r0 + chunk] = np.abs(W @ E) ** 2 * norm
    return HusimiGrid(grid, out)


def wrap(x):
    """Reduce into ``[0, 2pi)``; ``np.mod`` alone can round up to ``2pi``."""
    x = np.mod(x, TWO_PI)
    return np.where(x >= TWO_PI, 0.0, x)


def fold_to_torus(z, p, params):
    """``(theta, J) = (G z mod 2pi, G T p / m mod 2pi)``."""
    return wrap(z), wrap(params.T * np.asarray(p))


def map_offset(params):
    """Offset between ``T*p`` just before a kick and the ``J`` of the kicked map.

    The map advances ``theta`` by ``J_{n+1}``, which is ``T`` times the mean
    momentum over the free fall, i.e. ``T*p + pi*Omega`` measured just before
    the kick.
    """
    return math.pi * float(params.Omega)


def map_torus(z, p, params):
    """Torus coordinates of the kicked map for a phase point sampled just
    before a kick."""
    theta, J = fold_to_torus(z, p, params)
    return theta, wrap(J + map_offset(params))


def torus_distance(theta1, J1, theta2, J2):
    dth = np.abs(np.mod(theta1 - theta2 + math.pi, TWO_PI) - math.pi)
    dJ = np.abs(np.mod(J1 - J2 + math.pi, TWO_PI) - math.pi)
    return np.hypot(dth, dJ)


def eigenstate_ladder(vector, params, theta0, p_lo, p_hi, pre_kick=False):
    """Unfolded ladder amplitudes covering ``[p_lo, p_hi]`` plus the Gaussian
    cutoff, optionally rewound through one kick (the state just before it)."""
    P = params.P
    step = float(params.ladder_step)
    cut = ladder_cutoff(params.lam)
    margin = 0
    if pre_kick:
        n, _ = kick_coefficients(params.k)
        margin = int(n[-1]) * params.slots_per_unit
    q_lo = math.floor((p_lo - cut - float(params.beta_raw)) / step) - margin - 1
    q_hi = math.ceil((p_hi + cut - float(params.beta_raw)) / step) + margin + 1
    nu_min = q_lo // P
    nu_max = q_hi // P + 1
    q, amps = unfold_state(vector, theta0, nu_min, nu_max)
    if pre_kick:
        q, amps = apply_kick(params, q, amps, inverse=True)
        keep = slice(2 * margin, amps.size - 2 * margin)
        q, amps = q[keep], amps[keep]
    return q, amps


def eigenstate_husimi(state, params, grid=None, theta0=None, pre_kick=True):
    """Husimi function of a Floquet eigenvector on ``grid`` (default: full cell).

    With ``pre_kick`` the eigenvector is taken just before the kick, which is
    the stroboscopic section of the kicked map.
    """
    if grid is None:
        grid = cell_grid(params)
    if theta0 is None:
        theta0 = params.theta0
    q, amps = eigenstate_ladder(state, params, theta0, grid.p0, grid.p1, pre_kick)
    return husimi_map(q, amps, params, grid)


def mass_near(husimi, params, centers, radius, use_map=True):
    """Fraction of Husimi mass within torus distance ``radius`` of any center."""
    zz, pp = np.meshgrid(husimi.z, husimi.p)
    fold = map_torus if use_map else fold_to_torus
    th, J = fold(zz, pp, params)
    near = np.zeros(zz.shape, dtype=bool)
    for (tc, Jc) in centers:
        near |= torus_distance(th, J, tc, Jc) < radius
    total = husimi.values.sum()
    return float(husimi.values[near].sum() / total)
