"""Kick-by-kick propagation of plane waves with the exact one-period kernel.

A state lives on the integer ladder ``p_n = n + beta`` (units hbar*G). One
period multiplies component ``p_a`` by the free-fall phase
``exp(-i (g^2 T^3/6 + p_a^2 T/2 - p_a g T^2/2))``, drops it by ``g T`` and
spreads it over ``p_a - gT + q`` with amplitudes ``i**q J_q(k)``.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .floquet import kick_coefficients

TRIM_TOL = 1e-14
TRUNCATION_TOL = 1e-12


class NoPersistentPeak(RuntimeError):
    pass


@dataclass
class QuantumState:
    beta: float
    kick_count: int
    amplitudes: np.ndarray
    n_min: int

    @property
    def n(self):
        return self.n_min + np.arange(self.amplitudes.size)

    @property
    def momenta(self):
        return self.n + self.beta

    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def init_plane_wave(beta, n0=0):
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1)")
    return QuantumState(float(beta), 0, np.ones(1, dtype=complex), int(n0))


class Propagator:
    """One-period map for fixed ``(T, g, k)``, with the kick coefficients
    tabulated once."""

    def __init__(self, params):
        self.T = params.T
        self.g = params.g
        self.k = params.k
        self.n_kick, self.c_kick = kick_coefficients(self.k)
        self.n_max = int(self.n_kick[-1])

    def free_phase(self, p):
        T, g = self.T, self.g
        return np.exp(-1j * (g * g * T ** 3 / 6.0 + p * p * T / 2.0 - p * g * T * T / 2.0))

    def __call__(self, state):
        p = state.momenta
        a = state.amplitudes * self.free_phase(p)
        shifted = state.beta - self.g * self.T
        carry = math.floor(shifted)
        beta = shifted - carry
        if beta >= 1.0:  # rounding at the upper edge
            beta -= 1.0
            carry += 1
        out = np.convolve(a, self.c_kick)
        n_min = state.n_min + carry - self.n_max
        out, n_min, lost = _trim(out, n_min)
        if lost > TRUNCATION_TOL:
            raise RuntimeError(f"truncated mass {lost:.3e} exceeds {TRUNCATION_TOL}")
        return QuantumState(beta, state.kick_count + 1, out, n_min)


def _trim(a, n_min):
    big = np.flatnonzero(np.abs(a) >= TRIM_TOL)
    if big.size == 0:
        return a, n_min, 0.0
    lo, hi = big[0], big[-1] + 1
    lost = float(np.sum(np.abs(a[:lo]) ** 2) + np.sum(np.abs(a[hi:]) ** 2))
    return a[lo:hi].copy(), n_min + int(lo), lost


def one_period(state, params):
    return Propagator(params)(state)


def evolve(state, params, kicks):
    prop = Propagator(params)
    for _ in range(kicks):
        state = prop(state)
    return state


def momentum_distribution(state, params, frame="falling"):
    """``(p, mass)`` of every ladder component; the falling frame adds the
    accumulated gravity drop ``g T * kick_count``."""
    p = state.momenta
    if frame == "falling":
        p = p + params.g * params.T * state.kick_count
    elif frame != "lab":
        raise ValueError(f"unknown frame {frame!r}")
    return p, np.abs(state.amplitudes) ** 2


def histogram(p, mass):
    """Unit-width bins centred on integers: returns ``(first_bin, masses)``."""
    b = np.floor(np.asarray(p) + 0.5).astype(np.int64)
    lo = int(b.min())
    return lo, np.bincount(b - lo, weights=mass)


@dataclass(frozen=True)
class BetaMixture:
    """Gaussian weights over ``samples`` evenly spaced quasimomenta within
    ``center +- truncate*sigma``."""

    samples: int = 201
    center: float = 0.0
    sigma: float = 0.05
    truncate: float = 3.0

    def betas(self):
        if self.samples == 1:
            return np.array([self.center]), np.array([1.0])
        half = self.truncate * self.sigma
        b = np.linspace(self.center - half, self.center + half, self.samples)
        w = np.exp(-0.5 * ((b - self.center) / self.sigma) ** 2) if self.sigma > 0 else np.ones_like(b)
        return b, w / w.sum()


@dataclass
class MomentumDistribution:
    """Row ``t`` holds the mass in bins ``first_bin + i`` (unit width) after ``t`` kicks."""

    first_bin: int
    mass: np.ndarray
    frame: str

    @property
    def bins(self):
        return self.first_bin + np.arange(self.mass.shape[1])

    @property
    def kicks(self):
        return self.mass.shape[0] - 1


def _run_sample(args):
    beta, params, kicks, frame = args
    n0 = math.floor(beta)
    state = init_plane_wave(beta - n0, n0)
    prop = Propagator(params)
    rows = [histogram(*momentum_distribution(state, params, frame))]
    for _ in range(kicks):
        state = prop(state)
        rows.append(histogram(*momentum_distribution(state, params, frame)))
    return rows


def evolve_ensemble(mixture, kicks, params, frame="falling", workers=None):
    """Incoherent weighted average of the momentum histograms of plane waves
    with the mixture's quasimomenta, one row per kick (kick 0 included)."""
    betas, weights = mixture.betas()
    jobs = [(float(b), params, kicks, frame) for b in betas]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(_run_sample, jobs))
    else:
        results = [_run_sample(j) for j in jobs]
    lo = min(r[t][0] for r in results for t in range(kicks + 1))
    hi = max(r[t][0] + r[t][1].size for r in results for t in range(kicks + 1))
    mass = np.zeros((kicks + 1, hi - lo))
    for w, rows in zip(weights, results):  # fixed order for reproducibility
        for t, (b0, h) in enumerate(rows):
            mass[t, b0 - lo:b0 - lo + h.size] += w * h
    return MomentumDistribution(lo, mass, frame)


@dataclass(frozen=True)
class ModeWindow:
    """Band of ``width`` (hbar*G) starting at ``p_start`` and moving with
    ``slope_guess`` until enough peaks are tracked to refit the slope."""

    p_start: float
    slope_guess: float
    width: float = 10.0
    fit_from: int = 0
    threshold: float = 1e-3


@dataclass
class ModeTrack:
    peak: np.ndarray
    fraction: np.ndarray
    slope: float


def track_mode(series, window):
    """Follow a drifting peak through a momentum-distribution time series.

    Before ``fit_from`` the band centre follows the guessed line; afterwards it
    is extrapolated from a least-squares line through the tracked peaks.
    """
    bins = series.bins.astype(float)
    n = series.mass.shape[0]
    peak = np.empty(n)
    frac = np.empty(n)
    half = window.width / 2.0
    start = max(window.fit_from, 0)
    for t in range(n):
        center = window.p_start + window.slope_guess * t
        if t > start + 4:
            ts = np.arange(start, t)
            slope, icpt = np.polyfit(ts, peak[start:t], 1)
            center = icpt + slope * t
        elif t > start:
            center = peak[t - 1] + window.slope_guess
        band = np.abs(bins - center) <= half
        m = series.mass[t, band]
        frac[t] = m.sum()
        if t == 0 and frac[t] < window.threshold:
            raise NoPersistentPeak("no persistent peak: in-band mass below threshold at start")
        peak[t] = float(np.sum(bins[band] * m) / frac[t]) if frac[t] > 0 else center
    ts = np.arange(start, n)
    slope = float(np.polyfit(ts, peak[start:], 1)[0]) if ts.size > 1 else 0.0
    return ModeTrack(peak, frac, slope)
