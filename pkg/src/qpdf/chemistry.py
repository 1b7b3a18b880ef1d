"""Perfectly stirred reactor source terms in composition space.

A single reactive scalar ``phi`` in [0, 1] is advanced by a one-step
Arrhenius-like reaction and a linear relaxation (mixing) toward zero:

    S(phi) = A (1 - phi) exp(-phi_a / (phi + phi_i))
    M(phi) = -k_mix * phi

Their sum is the composition-space velocity ("drift") that transports the
PDF. All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PsrParams:
    rate_prefactor: float = 15.0
    phi_a: float = 1.8
    phi_i: float = 0.15
    mixing_rate: float = 0.25

    def __post_init__(self):
        if not self.phi_i > 0:
            raise DomainError(f"phi_i must be positive, got {self.phi_i}")
        if self.rate_prefactor < 0:
            raise DomainError(f"rate_prefactor must be >= 0, got {self.rate_prefactor}")
        if self.mixing_rate < 0:
            raise DomainError(f"mixing_rate must be >= 0, got {self.mixing_rate}")


DEFAULT_PARAMS = PsrParams()


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class Equilibrium:
    location: float
    stability: Stability


def _check_domain(phi):
    arr = np.asarray(phi, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("composition must lie in [0, 1]")
    return arr


def reaction_rate(phi, params: PsrParams = DEFAULT_PARAMS):
    arr = _check_domain(phi)
    out = params.rate_prefactor * (1.0 - arr) * np.exp(-params.phi_a / (arr + params.phi_i))
    return out if np.ndim(phi) else float(out)


def mixing_rate(phi, params: PsrParams = DEFAULT_PARAMS):
    arr = _check_domain(phi)
    out = -params.mixing_rate * arr
    # avoid returning -0.0 at phi = 0
    out = out + 0.0
    return out if np.ndim(phi) else float(out)


def drift(phi, params: PsrParams = DEFAULT_PARAMS):
    """Signed composition-space velocity ``S + M``."""
    return reaction_rate(phi, params) + mixing_rate(phi, params)


def _bisect(g, lo, hi, glo, tol):
    # |g| < tol or interval exhausted at float resolution
    while True:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) < tol or mid <= lo or mid >= hi:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid


def _slope(g, x, h=1e-7):
    lo, hi = max(0.0, x - h), min(1.0, x + h)
    return (g(hi) - g(lo)) / (hi - lo)


def find_equilibria(params: PsrParams = DEFAULT_PARAMS, tol: float = 1e-12,
                    n_scan: int = 10_000) -> list[Equilibrium]:
    """Zeros of the drift on [0, 1], located by a uniform scan plus bisection.

    Stability follows the sign of the drift slope; at the interval ends only
    the interior side is consulted.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")

    def g(x):
        return drift(x, params)

    xs = np.linspace(0.0, 1.0, n_scan + 1)
    gs = drift(xs, params)
    roots: list[float] = []
    for i in range(n_scan):
        if abs(gs[i]) < tol:
            roots.append(float(xs[i]))
        elif gs[i] * gs[i + 1] < 0 and abs(gs[i + 1]) >= tol:
            roots.append(_bisect(g, float(xs[i]), float(xs[i + 1]), float(gs[i]), tol))
    if abs(gs[-1]) < tol:
        roots.append(1.0)

    out = []
    for r in roots:
        if r == 0.0:
            stable = g(min(1.0, 1e-6)) < 0
        elif r == 1.0:
            stable = g(1.0 - 1e-6) > 0
        else:
            stable = _slope(g, r) < 0
        out.append(Equilibrium(r, Stability.STABLE if stable else Stability.UNSTABLE))
    return out


def stable_roots(params: PsrParams = DEFAULT_PARAMS, tol: float = 1e-12) -> list[float]:
    return [e.location for e in find_equilibria(params, tol) if e.stability is Stability.STABLE]
