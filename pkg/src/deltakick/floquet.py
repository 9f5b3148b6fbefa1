"""Finite Floquet block of the kicked accelerator and its eigenstates.

Ladder slot ``q`` carries momentum ``p_q = q/(M*S) + beta_raw``. The one-period
operator couples slot ``q'`` to ``q`` only when the momentum transfer
``(R*N + q - q')/(M*S)`` is an integer ``n``, with amplitude
``A(q') * i**n * J_n(k)``. Translation by ``P = N*S**2*M`` slots is a symmetry,
so Bloch states with angle ``theta0`` reduce the problem to a P x P block.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import jv

from .params import TWO_PI

UNITARITY_TOL = 1e-10
RESIDUAL_TOL = 1e-8
DEGENERACY_TOL = 1e-10


class UnitarityError(RuntimeError):
    pass


class ResidualError(RuntimeError):
    pass


def kick_coefficient(n, k):
    """Fourier coefficient ``(1/2pi) int exp(-i n t) exp(i k cos t) dt = i**n J_n(k)``."""
    n = np.asarray(n)
    return (1j ** np.mod(n, 4)) * jv(n, k)


def kick_coefficients(k, cutoff=1e-16):
    """Coefficients ``i**n J_n(k)`` for ``|n| <= n_max``, the first index past
    which ``|J_n(k)|`` stays below ``cutoff``. Returns ``(n, c)``."""
    n_max = max(int(math.ceil(abs(k))) + 1, 1)
    while abs(jv(n_max, k)) >= cutoff or abs(jv(n_max + 1, k)) >= cutoff:
        n_max += 1
    n = np.arange(-n_max, n_max + 1)
    return n, kick_coefficient(n, k)


def column_phase(params, q):
    """Free-flight phase factor ``A(q')`` of a ladder slot.

    The exponent is ``-i*pi*X/P`` with the integer numerator
    ``X = q'^2 + 2 q' l S N + 2 q' S M - q' R N``; reducing ``X`` modulo
    ``2P`` in integer arithmetic keeps the phase exact for large slots.
    """
    S, M, N, R, l, P = params.S, params.M, params.N, params.R, params.l, params.P
    q = np.asarray(q, dtype=np.int64)
    x = q * q + 2 * q * l * S * N + 2 * q * S * M - q * R * N
    x = np.mod(x, 2 * P)
    return np.exp(-1j * np.pi * x / P)


def global_phase(params):
    """Constant part of the period phase dropped from ``A(q')``."""
    b = float(params.beta_raw)
    T, g = params.T, params.g
    return g * g * T ** 3 / 6.0 + b * b * T / 2.0 - b * g * T * T / 2.0


def kick_dft(params, theta0):
    """``F(d) = sum_mu exp(ik cos((theta0 + 2 pi mu)/(S N))) exp(-2 pi i mu d / P)``
    for ``d = 0..P-1``; only ``d mod P`` matters."""
    P = params.P
    SN = params.S * params.N
    mu = np.arange(P)
    samples = np.exp(1j * params.k * np.cos((theta0 + TWO_PI * mu) / SN))
    return np.fft.fft(samples)


@dataclass(frozen=True)
class FloquetBlock:
    params: object
    theta0: float
    entries: np.ndarray

    @property
    def P(self):
        return self.entries.shape[0]

    def unitarity_error(self):
        U = self.entries
        G = U.conj().T @ U
        G[np.diag_indices_from(G)] -= 1.0
        return float(np.max(np.abs(G)))


def build_block(params, theta0=None, check=True):
    """Assemble ``[U(theta0)]_{s,s'}`` for ``s, s' = 0..P-1``.

    Entry = ``A(s') exp(-i theta0 d / P) F(d mod P) / P`` with ``d = RN + s - s'``;
    the theta0 phase uses the unreduced ``d`` and factorizes into row and
    column phases, while ``F(d mod P)`` is circulant in ``s - s'``.
    """
    if theta0 is None:
        theta0 = params.theta0
    P = params.P
    RN = params.R * params.N
    F = kick_dft(params, theta0)
    s = np.arange(P)
    U = scipy.linalg.circulant(F[(RN + s) % P])
    U *= np.exp(-1j * theta0 * s / P)[:, None]
    col = column_phase(params, s) * np.exp(1j * theta0 * s / P)
    col *= np.exp(-1j * theta0 * RN / P) / P
    U *= col[None, :]
    block = FloquetBlock(params, float(theta0), U)
    if check:
        err = block.unitarity_error()
        if err >= UNITARITY_TOL:
            raise UnitarityError(f"block not unitary: max|U^H U - I| = {err:.3e}")
    return block


def fractional_kick_integral(d, k, period, n_points=None):
    """``(1/(2 pi L)) int_0^{2 pi L} exp(-i t d/L) exp(i k cos t) dt`` by the
    trapezoid rule, ``L = period``.

    Averaging over the common period of both factors is the full-line limit
    of the kick integral, so non-integer transfers ``d/L`` give zero.
    """
    if n_points is None:
        # enough points that the alias of d lands where J_n(k) is negligible
        n_points = period * max(256, 16 * int(math.ceil(k) + 20)) + 4 * int(math.ceil(abs(d)))
    t = TWO_PI * period * np.arange(n_points) / n_points
    vals = np.exp(-1j * t * d / period) * np.exp(1j * k * np.cos(t))
    return vals.mean()


def infinite_element(params, q, qp, n_points=None):
    """Element ``U_{q q'}`` of the infinite one-period matrix by quadrature."""
    SM = params.S * params.M
    d = params.R * params.N + q - qp
    return column_phase(params, qp) * fractional_kick_integral(d, params.k, SM, n_points)


@dataclass
class QuasiEigenstate:
    eigenvalue: complex
    quasi_energy: float
    block_vector: np.ndarray
    residual: float
    index: int = -1


def quasi_energy(eigenvalue, T):
    """``omega = -arg(eigenvalue)/T`` mapped into ``(-pi/T, pi/T]``."""
    w = -np.angle(eigenvalue)
    w = np.where(w <= -np.pi, w + TWO_PI, w)
    w = w / T
    return float(w) if np.ndim(w) == 0 else w


def _fix_phase(v):
    a = np.abs(v)
    i = int(np.flatnonzero(a >= a.max() * (1 - 1e-9))[0])  # first of near-ties
    v = v * (a[i] / v[i])
    v[i] = abs(v[i])
    return v


def diagonalize(block, tol=RESIDUAL_TOL):
    """Eigenpairs of a unitary block, sorted by quasi-energy.

    The complex Schur form of a normal matrix is diagonal, so its unitary
    factor gives an orthonormal eigenbasis even inside degenerate clusters.
    """
    U = block.entries if isinstance(block, FloquetBlock) else np.asarray(block)
    T = block.params.T if isinstance(block, FloquetBlock) else TWO_PI
    Tri, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(Tri).copy()
    resid = np.linalg.norm(U @ Z - Z * lam[None, :], axis=0)
    bad = np.flatnonzero((resid >= tol) | (np.abs(np.abs(lam) - 1.0) >= tol))
    if bad.size:
        raise ResidualError(
            f"{bad.size} eigenpairs exceed tolerance; worst residual {resid.max():.3e}"
        )
    omega = quasi_energy(lam, T)
    order = np.lexsort((np.arange(lam.size), omega))
    states = []
    for rank, i in enumerate(order):
        states.append(
            QuasiEigenstate(
                eigenvalue=complex(lam[i]),
                quasi_energy=float(omega[i]),
                block_vector=_fix_phase(Z[:, i]),
                residual=float(resid[i]),
                index=rank,
            )
        )
    return states


def reconstruction_error(block, states):
    V = np.column_stack([s.block_vector for s in states])
    lam = np.array([s.eigenvalue for s in states])
    U = block.entries if isinstance(block, FloquetBlock) else block
    return float(np.max(np.abs(U - (V * lam) @ V.conj().T)))


def unfold_state(vector, theta0, nu_min, nu_max):
    """Ladder amplitudes ``Phi_{s + P nu} = exp(-i theta0 nu) v_s`` for
    ``nu_min <= nu < nu_max``. Returns ``(q, amplitudes)``."""
    v = np.asarray(vector.block_vector if isinstance(vector, QuasiEigenstate) else vector)
    P = v.size
    nu = np.arange(nu_min, nu_max)
    amps = (np.exp(-1j * theta0 * nu)[:, None] * v[None, :]).ravel()
    q = (P * nu[:, None] + np.arange(P)[None, :]).ravel()
    return q, amps


def ladder_momentum(params, q):
    return np.asarray(q) * float(params.ladder_step) + float(params.beta_raw)


def apply_kick(params, q, amps, inverse=False):
    """Apply ``exp(+-ik cos z)`` to amplitudes on a contiguous ladder segment.

    A kick moves momentum by whole units of hbar*G, i.e. by ``M*S`` slots.
    The segment is widened by the kick bandwidth so nothing is lost.
    """
    n, c = kick_coefficients(-params.k if inverse else params.k)
    SM = params.slots_per_unit
    n_max = int(n[-1])
    out = np.zeros(amps.size + 2 * n_max * SM, dtype=complex)
    for shift, coeff in zip(n, c):
        start = (shift + n_max) * SM
        out[start:start + amps.size] += coeff * amps
    q_out = np.arange(q[0] - n_max * SM, q[0] - n_max * SM + out.size)
    return q_out, out
