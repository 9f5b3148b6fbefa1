"""Resonance parameters of the delta-kicked accelerator.

Natural units are used throughout: hbar = m = G = 1, so the half-Talbot time
is ``T_half = 2*pi`` and momenta are measured in units of hbar*G.
"""

import configparser
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

TWO_PI = 2.0 * math.pi
T_HALF = TWO_PI


class ValidationError(ValueError):
    """Raised when resonance integers or kick strength are unusable."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ResonanceInput:
    M: int
    N: int
    R: int
    S: int
    l: int = 0
    k: float = 0.0
    theta0: float = 0.0


@dataclass(frozen=True)
class SystemParams:
    """Everything derived from ``T = (M/N) T_half`` and ``Omega = R/S``.

    ``beta`` is the quasimomentum reduced into [0, 1); ``beta_raw`` is the
    unreduced ladder offset ``l*N/M + 1``, which is what the phase factors of
    the Floquet block refer to. Both lie on the momentum ladder of spacing
    ``ladder_step`` so the choice only relabels ladder slots.
    """

    M: int
    N: int
    R: int
    S: int
    l: int
    k: float
    theta0: float
    T: float
    T_half: float
    Omega: Fraction
    K: float
    epsilon: float
    g: float
    beta: float
    beta_raw: Fraction
    mgT: Fraction
    ladder_step: Fraction
    P: int
    lam: float
    source: ResonanceInput = field(repr=False, compare=False, default=None)

    @property
    def slots_per_unit(self):
        """Ladder slots per hbar*G (``M*S``)."""
        return self.M * self.S

    @property
    def gravity_shift(self):
        """Ladder slots dropped per period, ``mgT / ladder_step = R*N``."""
        return self.R * self.N

    @property
    def cell_z(self):
        return self.M * self.S * TWO_PI

    @property
    def cell_p(self):
        return float(self.N * self.S)

    def as_dict(self):
        out = {}
        for f in fields(self):
            if f.name == "source":
                continue
            v = getattr(self, f.name)
            out[f.name] = str(v) if isinstance(v, Fraction) else v
        return out


def validate(raw):
    """Return a list of violated conditions (empty when ``raw`` is usable)."""
    problems = []
    for name in ("M", "N", "R", "S", "l"):
        v = getattr(raw, name)
        if isinstance(v, bool) or not isinstance(v, int):
            problems.append(f"{name} must be an integer")
    if problems:
        return problems
    if raw.M < 1:
        problems.append("M must be positive")
    if raw.N < 1:
        problems.append("N must be positive")
    elif raw.N % 2:
        problems.append("N must be even")
    if raw.R < 1:
        problems.append("R must be positive")
    if raw.S < 1:
        problems.append("S must be positive")
    if raw.M >= 1 and raw.N >= 1 and math.gcd(raw.M, raw.N) != 1:
        problems.append("M/N not in lowest terms")
    if raw.R >= 1 and raw.S >= 1 and math.gcd(raw.R, raw.S) != 1:
        problems.append("R/S not in lowest terms")
    if not math.isfinite(raw.k) or raw.k < 0:
        problems.append("k must be a finite number >= 0")
    if not (math.isfinite(raw.theta0) and 0.0 <= raw.theta0 < TWO_PI):
        problems.append("theta0 must lie in [0, 2*pi)")
    return problems


def derive_params(raw):
    problems = validate(raw)
    if problems:
        raise ValidationError(problems)
    M, N, R, S, l = raw.M, raw.N, raw.R, raw.S, raw.l
    ratio = Fraction(M, N)
    T = TWO_PI * M / N
    Omega = Fraction(R, S)
    g = TWO_PI * R / (S * T * T)
    beta_raw = Fraction(l * N, M) + 1
    return SystemParams(
        M=M, N=N, R=R, S=S, l=l,
        k=float(raw.k),
        theta0=float(raw.theta0),
        T=T,
        T_half=T_HALF,
        Omega=Omega,
        K=TWO_PI * raw.k * float(ratio),
        epsilon=TWO_PI * float(ratio - 1),
        g=g,
        beta=float(beta_raw - math.floor(beta_raw)),
        beta_raw=beta_raw,
        mgT=Fraction(R * N, S * M),
        ladder_step=Fraction(1, M * S),
        P=N * S * S * M,
        lam=N / T_HALF,
        source=raw,
    )


def make_params(M, N, R, S, l=0, k=0.0, theta0=0.0):
    """Shorthand for ``derive_params(ResonanceInput(...))``."""
    return derive_params(ResonanceInput(M, N, R, S, l, float(k), float(theta0)))


_INT_KEYS = ("M", "N", "R", "S", "l")
_FLOAT_KEYS = ("k", "theta0")


def read_config(path):
    """Parse a flat ``key = value`` file into a ResonanceInput plus extras.

    Unknown keys are returned untouched in the second element so command
    options can share the same file.
    """
    text = Path(path).read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string("[run]\n" + text)
    items = dict(cp["run"])
    return parse_items(items)


def parse_items(items):
    values = {"l": 0, "theta0": 0.0}
    extras = {}
    problems = []
    for key, val in items.items():
        if key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError:
                problems.append(f"{key} must be an integer, got {val!r}")
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(val)
            except ValueError:
                problems.append(f"{key} must be a number, got {val!r}")
        else:
            extras[key] = val
    for key in ("M", "N", "R", "S", "k"):
        if key not in values:
            problems.append(f"missing key {key}")
    if problems:
        raise ValidationError(problems)
    return ResonanceInput(**values), extras
