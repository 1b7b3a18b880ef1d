"""Phase profiles, their polynomial representations, and CNOT/Rz compilation.

The measurement unitary is ``U = sum_j exp(i theta_j) |j><j|`` with
``theta_j = arccos q_j``. Writing ``theta`` as a polynomial ``p`` in the
index operator ``D`` gives ``U = exp(i p(D))``; expanding ``p(D)`` into
commuting Z-strings factorizes the exponential into one CNOT ladder + Rz per
string.

Monomial coefficients of high-degree interpolants on ``0..N-1`` are wildly
ill-conditioned in floating point, so both the exact (``alpha``) and fitted
(``beta``) coefficients are carried as exact rationals and only the final
Z-string coefficients are rounded.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .. import qsim
from ..errors import ConditioningError, DomainError, VerificationError
from .zstrings import ZStringPolynomial, mask_to_subset, polynomial_in_D, walsh_decompose

Q_TOL = 1e-12
ALPHA_MAX_QUBITS = 5
VERIFY_MAX_QUBITS = 10
VERIFY_TOL = 1e-8


@dataclass(frozen=True)
class PhaseProfile:
    theta: np.ndarray
    label: str = "q"
    clip_magnitude: float = 0.0

    @property
    def size(self) -> int:
        return self.theta.size


def phase_profile(q_values, label: str = "q") -> PhaseProfile:
    q = np.asarray(q_values, dtype=float).ravel()
    excess = np.max(np.abs(q)) - 1.0 if q.size else 0.0
    if not np.all(np.isfinite(q)) or excess > Q_TOL:
        raise DomainError(f"statistic {label!r} leaves [-1, 1] by {excess:.3e}; normalize it first")
    clipped = np.clip(q, -1.0, 1.0)
    return PhaseProfile(np.arccos(clipped), label, float(np.max(np.abs(clipped - q), initial=0.0)))


def _theta(profile) -> np.ndarray:
    return profile.theta if isinstance(profile, PhaseProfile) else np.asarray(profile, dtype=float)


# exact rational polynomial helpers (coefficient lists, lowest degree first)

def _padd(a, b):
    out = [Fraction(0)] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return out


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pcompose_affine(p, scale: Fraction, shift: Fraction):
    """Coefficients of ``p(scale * j + shift)`` as a polynomial in ``j``."""
    out = [Fraction(0)]
    for c in reversed(p):
        out = _padd(_pmul(out, [shift, scale]), [c])
    return out


def _peval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def exact_alpha(profile, max_qubits: int = ALPHA_MAX_QUBITS) -> tuple[Fraction, ...]:
    """Monomial coefficients of the interpolant of ``theta_j`` on ``j = 0..N-1``.

    Newton divided differences in exact rational arithmetic, then expansion
    to the monomial basis; this is the solution of the Vandermonde system
    ``V(0, ..., N-1) alpha = theta`` without forming ``V``.
    """
    theta = _theta(profile)
    N = theta.size
    if N < 1:
        raise DomainError("empty phase profile")
    if N > 2 ** max_qubits:
        raise DomainError(f"exact alpha limited to N <= {2 ** max_qubits}")
    y = theta.tolist()
    dd = [Fraction(v) for v in y]
    for k in range(1, N):
        for i in range(N - 1, k - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / k
    coeffs = [dd[N - 1]]
    for k in range(N - 2, -1, -1):
        coeffs = _padd(_pmul(coeffs, [Fraction(-k), Fraction(1)]), [dd[k]])
    coeffs += [Fraction(0)] * (N - len(coeffs))

    resid = max(abs(float(_peval(coeffs, j) - Fraction(t))) for j, t in enumerate(y))
    if resid >= 1e-8:
        raise ConditioningError(f"interpolation residual {resid:.3e}")
    return tuple(coeffs)


@dataclass(frozen=True)
class PolynomialFit:
    """Least-squares fit of ``theta`` against the cell index."""

    beta: tuple[Fraction, ...]
    series: C.Chebyshev
    max_residual: float
    against: str

    def values(self, n_points: int) -> np.ndarray:
        return self.series(np.arange(n_points, dtype=float))


def fit_polynomial(profile, m: int, against: str = "index") -> PolynomialFit:
    """Degree-``m`` Chebyshev least-squares fit, re-expanded exactly in ``j``.

    ``against="index"`` fits ``theta`` as a function of ``j``; ``"phi"`` fits
    against the cell centre ``(j + 1/2) / N``. Either way the returned
    ``beta`` are monomial coefficients in ``j``.
    """
    theta = _theta(profile)
    N = theta.size
    if not 0 <= m <= N - 1:
        raise DomainError(f"order m must lie in [0, {N - 1}]")
    j = np.arange(N, dtype=float)
    if against == "index":
        x, lo, hi = j, 0.0, float(N - 1)
    elif against == "phi":
        x, lo, hi = (j + 0.5) / N, 0.5 / N, (N - 0.5) / N
    else:
        raise DomainError(f"unknown fit variable {against!r}")
    if hi == lo:
        hi = lo + 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", np.exceptions.RankWarning)
        try:
            series = C.Chebyshev.fit(x, theta, m, domain=[lo, hi], window=[-1, 1])
        except np.exceptions.RankWarning as exc:
            raise ConditioningError(f"rank-deficient fit at order {m}") from exc
    fitted = series(x)

    # Chebyshev coefficients in t in [-1, 1] -> monomials in t, exactly
    cheb = [Fraction(float(c)) for c in series.coef]
    cheb += [Fraction(0)] * (m + 1 - len(cheb))
    mono_t = [Fraction(0)]
    for k, ck in enumerate(cheb):
        basis = [Fraction(int(v)) for v in C.cheb2poly([0] * k + [1])]
        mono_t = _padd(mono_t, [ck * b for b in basis])
    # t = (2 x - lo - hi) / (hi - lo), x = j (index) or (j + 1/2) / N (phi)
    flo, fhi = Fraction(lo), Fraction(hi)
    a, c0 = 2 / (fhi - flo), -(flo + fhi) / (fhi - flo)
    if against == "index":
        scale, shift = a, c0
    else:
        scale, shift = a / N, a / (2 * N) + c0
    beta = _pcompose_affine(mono_t, scale, shift)
    beta += [Fraction(0)] * (m + 1 - len(beta))
    return PolynomialFit(tuple(beta[: m + 1]), series, float(np.max(np.abs(fitted - theta))), against)


def fit_beta(profile, m: int, against: str = "index") -> tuple[Fraction, ...]:
    return fit_polynomial(profile, m, against).beta


@dataclass
class DiagonalPhaseProgram:
    """Compiled ``exp(i p)`` for a diagonal phase polynomial ``p``.

    ``circuit`` realizes the diagonal up to the scalar ``exp(i global_phase)``
    coming from the identity string.
    """

    mode: str
    n_qubits: int
    zpoly: ZStringPolynomial
    circuit: qsim.Circuit
    global_phase: float
    coefficients: tuple | None = None
    verified_error: float | None = field(default=None)

    def target_phases(self) -> np.ndarray:
        return self.zpoly.evaluate()

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.target_phases())

    def compiled_diagonal(self) -> np.ndarray:
        return compiled_diagonal(self.circuit) * np.exp(1j * self.global_phase)

    def tally(self):
        return self.circuit.tally()


def zstring_gates(mask: int, coeff: float, n: int, control: int | None = None,
                  offset: int = 0) -> list[qsim.Gate]:
    """``exp(i coeff Z_S)``: CNOT chain onto the highest qubit, Rz(-2 coeff), undo."""
    qs = sorted(q + offset for q in mask_to_subset(mask, n))
    ladder = [qsim.cnot(a, b) for a, b in zip(qs[:-1], qs[1:])]
    rot = qsim.rz(qs[-1], -2.0 * coeff)
    if control is not None:
        rot = rot.controlled(control)
    return ladder + [rot] + ladder[::-1]


def compile_zstrings(zpoly: ZStringPolynomial, mode: str = "custom", coefficients=None,
                     verify: bool = True) -> DiagonalPhaseProgram:
    n = zpoly.n_qubits
    circ = qsim.Circuit(n)
    gphase = 0.0
    for mask, c in sorted(zpoly.masks.items(), key=lambda mc: (bin(mc[0]).count("1"), mc[0])):
        c = float(c)
        if mask == 0:
            gphase = c
        elif c != 0.0:
            circ.extend(zstring_gates(mask, c, n))
    prog = DiagonalPhaseProgram(mode, n, zpoly, circ, gphase, coefficients)
    if verify and n <= VERIFY_MAX_QUBITS:
        err = float(np.max(np.abs(prog.compiled_diagonal() - prog.diagonal())))
        prog.verified_error = err
        if err > VERIFY_TOL:
            raise VerificationError(f"compiled diagonal off by {err:.3e}")
    return prog


def compile_phase_unitary(coeffs: Sequence, which: str, n: int, verify: bool = True) -> DiagonalPhaseProgram:
    """Compile ``exp(i sum_k coeffs[k] D^k)`` on ``n`` qubits.

    ``which`` is ``"alpha"`` (exact interpolant) or ``"beta"`` (order-m fit)
    and only sets the recorded mode.
    """
    if which not in ("alpha", "beta"):
        raise DomainError("which must be 'alpha' or 'beta'")
    mode = "exact" if which == "alpha" else f"approx({len(coeffs) - 1})"
    zpoly = polynomial_in_D(coeffs, n)
    return compile_zstrings(zpoly, mode, tuple(coeffs), verify)


def exact_program(profile, n: int, max_alpha_qubits: int = ALPHA_MAX_QUBITS,
                  verify: bool = True) -> DiagonalPhaseProgram:
    """Exact diagonal: Vandermonde route for small registers, Walsh route beyond."""
    theta = _theta(profile)
    if theta.size != 2 ** n:
        raise DomainError("profile length must be 2**n")
    if n <= max_alpha_qubits:
        return compile_phase_unitary(exact_alpha(theta, max_alpha_qubits), "alpha", n, verify)
    return compile_zstrings(walsh_decompose(theta), "exact", None, verify)


def compiled_diagonal(circuit: qsim.Circuit) -> np.ndarray:
    """Diagonal of a diagonal circuit, read off from its action on ``|+...+>``."""
    n = circuit.n_qubits
    N = 2 ** n
    state = qsim.QuantumState(n, np.full(N, 1.0 / np.sqrt(N), dtype=complex))
    qsim.run(circuit, state)
    return state.amplitudes * np.sqrt(N)
