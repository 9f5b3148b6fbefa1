"""Classical and epsilon-classical kicked maps, sections and accelerator orbits.

Both maps share one form::

    J' = J - kick * sin(theta) - sign * 2 pi Omega
    theta' = theta + sign * J'

with ``(kick, sign) = (K, +1)`` for the classical map and ``(K_eps, sgn eps)``
for the epsilon-classical one.
"""

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class OrbitNotFound(RuntimeError):
    """No seed converged to an orbit of the requested order and jump."""


class DegenerateOrbit(OrbitNotFound):
    """Zero kick strength: periodic points form a continuum."""


@dataclass(frozen=True)
class MapParams:
    kick: float
    Omega: float
    sign: int = 1

    @classmethod
    def classical(cls, K, Omega):
        return cls(float(K), float(Omega), 1)

    @classmethod
    def epsilon(cls, K_eps, Omega, sign_eps):
        return cls(float(K_eps), float(Omega), 1 if sign_eps >= 0 else -1)

    @classmethod
    def from_system(cls, params, kind="classical"):
        if kind == "classical":
            return cls.classical(params.K, params.Omega)
        if kind == "epsilon":
            return eps_map_params(params.epsilon, params.k, params.Omega)
        raise ValueError(f"unknown map kind {kind!r}")


def eps_map_params(epsilon, k, Omega):
    """``K_eps = eps*k``; ``eps = 0`` degenerates to free rotation with sign +1."""
    if epsilon == 0:
        return MapParams(0.0, float(Omega), 1)
    return MapParams(epsilon * k, float(Omega), 1 if epsilon > 0 else -1)


def section_to_map(theta, J, Omega):
    """Shift section coordinates ``(z, T p)`` sampled just before a kick to
    the variables of the map, whose ``J`` is ``T`` times the mean momentum
    over the following free fall: ``J_map = T p + pi Omega``."""
    return _wrap(theta), _wrap(np.asarray(J) + math.pi * float(Omega))


def map_to_section(theta, J, Omega):
    return _wrap(theta), _wrap(np.asarray(J) - math.pi * float(Omega))


def _lifted_step(theta, J, mp):
    J = J - mp.kick * np.sin(theta) - mp.sign * TWO_PI * mp.Omega
    theta = theta + mp.sign * J
    return theta, J


def map_step(theta, J, mp):
    theta, J = _lifted_step(theta, J, mp)
    return _wrap(theta), _wrap(J)


def std_map_step(theta, J, K, Omega):
    return map_step(theta, J, MapParams.classical(K, Omega))


def eps_map_step(theta, J, K_eps, Omega, sign_eps):
    return map_step(theta, J, MapParams(float(K_eps), float(Omega), 1 if sign_eps >= 0 else -1))


def step_jacobian(theta, mp):
    """Jacobian of one step with respect to ``(theta, J)``."""
    c = mp.kick * math.cos(theta)
    s = mp.sign
    return np.array([[1.0 - s * c, float(s)], [-c, 1.0]])


@dataclass
class Trajectory:
    theta: np.ndarray
    J: np.ndarray
    theta_lifted: np.ndarray
    J_lifted: np.ndarray


def lifted_iterate(theta0, J0, n, mp):
    """``n`` steps from ``(theta0, J0)``, keeping the unwrapped coordinates.

    Returned arrays have ``n + 1`` entries, the initial point first.
    """
    th = np.empty(n + 1)
    J = np.empty(n + 1)
    th[0], J[0] = theta0, J0
    for i in range(n):
        th[i + 1], J[i + 1] = _lifted_step(th[i], J[i], mp)
    return Trajectory(_wrap(th), _wrap(J), th, J)


def poincare_section(inits, n, mp):
    """First ``n`` iterates of each initial point, wrapped to the torus.

    Returns a list of ``(theta, J)`` array pairs, one per initial condition,
    each starting with the initial point.
    """
    inits = np.atleast_2d(np.asarray(inits, dtype=float))
    th = np.empty((n + 1, len(inits)))
    J = np.empty_like(th)
    th[0], J[0] = inits[:, 0], inits[:, 1]
    for i in range(n):
        th[i + 1], J[i + 1] = _lifted_step(th[i], J[i], mp)
    th, J = _wrap(th), _wrap(J)
    return [(th[:, i], J[:, i]) for i in range(len(inits))]


@dataclass
class Orbit:
    theta: np.ndarray
    J: np.ndarray
    order: int
    jump: int
    winding: int
    residual: float
    monodromy_trace: float = float("nan")
    mp: MapParams = field(default=None, repr=False)

    @property
    def stable(self):
        return abs(self.monodromy_trace) < 2.0

    @property
    def points(self):
        return list(zip(self.theta, self.J))


def _orbit_map(x, o, mp):
    """Lifted o-fold image and its Jacobian."""
    th, J = x
    D = np.eye(2)
    ths = np.empty(o)
    Js = np.empty(o)
    for i in range(o):
        ths[i], Js[i] = th, J
        D = step_jacobian(th, mp) @ D
        th, J = _lifted_step(th, J, mp)
    return np.array([th, J]), D, ths, Js


def orbit_residual(theta, J, o, j, mp):
    """Residual of ``map^o(theta, J) = (theta + 2 pi m, J - 2 pi j)``."""
    y, _, _, _ = _orbit_map(np.array([theta, J]), o, mp)
    m = round((y[0] - theta) / TWO_PI)
    return max(abs(y[0] - theta - TWO_PI * m), abs(y[1] - J + TWO_PI * j))


def orbit_stability(orbit, mp=None):
    """Trace of the tangent-map product along the orbit."""
    mp = mp or orbit.mp
    D = np.eye(2)
    for th in orbit.theta:
        D = step_jacobian(th, mp) @ D
    return float(np.trace(D))


def _newton(x, o, j, mp, tol, max_iter):
    for _ in range(max_iter):
        y, D, _, _ = _orbit_map(x, o, mp)
        m = round((y[0] - x[0]) / TWO_PI)
        F = np.array([y[0] - x[0] - TWO_PI * m, y[1] - x[1] + TWO_PI * j])
        A = D - np.eye(2)
        try:
            dx = np.linalg.solve(A, -F)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(dx)):
            return None
        x = x + dx
        if np.max(np.abs(dx)) < tol:
            return x
    return None


def _minimal_period(ths, Js, tol):
    o = len(ths)
    for d in range(1, o):
        if o % d:
            continue
        dist = np.abs(np.angle(np.exp(1j * (ths[d:] - ths[:-d])))) + np.abs(
            np.angle(np.exp(1j * (Js[d:] - Js[:-d]))))
        if np.all(dist < tol):
            return d
    return o


def find_accel_orbits(o, j, mp, seeds=32, tol=1e-13, max_iter=50, merge_tol=1e-8,
                      residual_tol=1e-12):
    """All distinct orbits of minimal period ``o`` and jump ``j`` reached by
    Newton iteration from a ``seeds x seeds`` grid; stable orbits first."""
    if o < 1:
        raise ValueError("order must be >= 1")
    if mp.kick == 0:
        raise DegenerateOrbit("zero kick: periodic points form a continuum, no isolated orbit")
    grid = (np.arange(seeds) + 0.5) * TWO_PI / seeds
    found = []
    for th0 in grid:
        for J0 in grid:
            x = _newton(np.array([th0, J0]), o, j, mp, tol, max_iter)
            if x is None:
                continue
            x = np.mod(x, TWO_PI)
            res = orbit_residual(x[0], x[1], o, j, mp)
            if res >= residual_tol:
                continue
            _, _, ths, Js = _orbit_map(x, o, mp)
            ths, Js = _wrap(ths), _wrap(Js)
            if _minimal_period(ths, Js, merge_tol) != o:
                continue
            if any(_same_orbit(ths, Js, orb, merge_tol) for orb in found):
                continue
            y, _, _, _ = _orbit_map(x, o, mp)
            orb = Orbit(ths, Js, o, j, int(round((y[0] - x[0]) / TWO_PI)), res, mp=mp)
            orb.monodromy_trace = orbit_stability(orb)
            found.append(orb)
    if not found:
        raise OrbitNotFound(f"no convergence from any seed for o={o}, j={j}")
    found.sort(key=lambda orb: (not orb.stable, abs(orb.monodromy_trace)))
    return found


def find_accel_orbit(o, j, mp, **kw):
    """The first orbit from :func:`find_accel_orbits` (a stable one if any)."""
    return find_accel_orbits(o, j, mp, **kw)[0]


def _same_orbit(ths, Js, orb, tol):
    d = torus_dist(ths[:, None], Js[:, None], orb.theta[None, :], orb.J[None, :])
    return bool(np.all(d.min(axis=1) < tol))


def _wrap(x):
    x = np.mod(x, TWO_PI)
    return np.where(x >= TWO_PI, 0.0, x)  # mod can round up to exactly 2 pi


def torus_dist(t1, J1, t2, J2):
    dt = np.abs(np.mod(t1 - t2 + math.pi, TWO_PI) - math.pi)
    dJ = np.abs(np.mod(J1 - J2 + math.pi, TWO_PI) - math.pi)
    return np.hypot(dt, dJ)


def accel_identity(orbit, mp=None):
    """``kick * sum(sin theta_i) - 2 pi (j - sign*Omega*o)``, zero for a true orbit."""
    mp = mp or orbit.mp
    return mp.kick * np.sin(orbit.theta).sum() - TWO_PI * (orbit.jump - mp.sign * mp.Omega * orbit.order)


def fd_monodromy(orbit, mp=None, h=1e-6):
    """Central finite-difference Jacobian of the lifted o-fold map."""
    mp = mp or orbit.mp
    x = np.array([orbit.theta[0], orbit.J[0]])
    D = np.empty((2, 2))
    for c in range(2):
        e = np.zeros(2)
        e[c] = h
        yp, _, _, _ = _orbit_map(x + e, orbit.order, mp)
        ym, _, _, _ = _orbit_map(x - e, orbit.order, mp)
        D[:, c] = (yp - ym) / (2 * h)
    return D


def mode_slope(o, j, T, Omega, frame="lab", eps=None):
    """Mean momentum change per kick (units hbar*G) of an accelerator mode.

    Classical map (``eps=None``): the lifted ``J = T p`` drops by ``2 pi j``
    every ``o`` kicks. Epsilon-classical map: ``J = eps p`` plus a drift from
    the changing quasimomentum, giving ``(2pi/eps)(Omega - sgn(eps) j/o)`` in
    the falling frame.
    """
    g_T = TWO_PI * Omega / T  # gravity drop per kick
    if eps is None:
        lab = -TWO_PI * j / (o * T)
        return lab if frame == "lab" else lab + g_T
    sign = 1 if eps > 0 else -1
    falling = TWO_PI / eps * (Omega - sign * j / o)
    return falling if frame == "falling" else falling - g_T
