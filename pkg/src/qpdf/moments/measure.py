"""Hadamard-test measurement of PDF statistics from an amplitude-encoded state.

Circuit on ``n + 1`` qubits (ancilla = qubit 0)::

    H(a); C-U_psi(a -> sys); X(a); C-(U H^n)(a -> sys); H(a)

leaves ``<Z_a> = Re <q~|psi>`` with ``|q~> = U H^n |0>``. For
``U = diag(exp(i arccos q_j))`` that is ``sum_j q_j psi_j / sqrt(N)``.

The state only carries ``f`` up to scale, so a statistic is a ratio of two
runs: the statistic restricted to the wanted time block over the block
indicator. Off-block cells get phase pi/2 (q = 0) and drop out of the real
part exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .. import qsim
from ..errors import DivisionUnderflowError, DomainError
from ..fokker_planck import CompositionGrid
from .phase import (
    ALPHA_MAX_QUBITS,
    DiagonalPhaseProgram,
    compile_zstrings,
    exact_alpha,
    fit_polynomial,
    phase_profile,
)
from .zstrings import ZStringPolynomial, basis_projector, polynomial_in_D, walsh_decompose

DENOMINATOR_FLOOR = 1e-10
HALF_PI = np.pi / 2


def _shift(g: qsim.Gate, k: int) -> qsim.Gate:
    return replace(g, targets=tuple(t + k for t in g.targets),
                   controls=tuple(c + k for c in g.controls))


def build_measurement_circuit(psi_prep, program: DiagonalPhaseProgram, n: int) -> qsim.Circuit:
    """Ancilla-controlled overlap circuit; ``psi_prep`` is a vector or a PREP gate."""
    if program.n_qubits != n:
        raise DomainError("program acts on a different register size")
    system = list(range(1, n + 1))
    if isinstance(psi_prep, qsim.Gate):
        if len(psi_prep.targets) != n or psi_prep.controls:
            raise DomainError("preparation gate must be uncontrolled on n qubits")
        prep = _shift(psi_prep, 1).controlled(0)
    else:
        v = np.asarray(psi_prep)
        if v.size != 2 ** n:
            raise DomainError("state length must be 2**n")
        prep = qsim.prep(system, v, controls=[0])

    circ = qsim.Circuit(n + 1)
    circ.add(qsim.h(0), prep, qsim.x(0))
    circ.extend(qsim.h(q).controlled(0) for q in system)
    # ladders cancel in pairs when the ancilla is 0, so only the Rz carry the control
    for g in program.circuit.gates:
        g = _shift(g, 1)
        circ.add(g.controlled(0) if g.kind == "RZ" else g)
    if program.global_phase:
        circ.add(qsim.phase(0, program.global_phase))
    circ.add(qsim.h(0))
    return circ


def overlap_expectation(psi, program: DiagonalPhaseProgram, shots: int = 0,
                        rng: np.random.Generator | None = None) -> float:
    n = program.n_qubits
    circ = build_measurement_circuit(psi, program, n)
    return qsim.expectation_z(qsim.run(circ), 0, shots, rng)


def remove_global_phase(psi) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive."""
    v = np.asarray(psi, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    return v * np.exp(-1j * np.angle(v[k]))


# phase polynomials ---------------------------------------------------------

def composition_phase_poly(q_values, order: int | None = None, fit_against: str = "index",
                           max_alpha_qubits: int = ALPHA_MAX_QUBITS) -> ZStringPolynomial:
    """Phase polynomial ``p(D)`` on the composition register.

    ``order=None`` reproduces ``arccos q`` exactly; otherwise ``p`` is the
    order-``m`` least-squares fit.
    """
    prof = phase_profile(q_values)
    n = prof.size.bit_length() - 1
    if 2 ** n != prof.size:
        raise DomainError("statistic length must be a power of two")
    if order is None:
        if n <= max_alpha_qubits:
            return polynomial_in_D(exact_alpha(prof, max_alpha_qubits), n)
        return walsh_decompose(prof.theta)
    return polynomial_in_D(fit_polynomial(prof, order, fit_against).beta, n)


def block_phase_poly(phase_phi: ZStringPolynomial, n_t_qubits: int,
                     block: int | None) -> ZStringPolynomial:
    """Lift a composition phase to the history register.

    ``block=None`` applies it on every time block; otherwise the phase is
    ``pi/2 + |k><k| (p - pi/2)`` so only block ``k`` contributes.
    """
    n_total = n_t_qubits + phase_phi.n_qubits
    lifted = phase_phi.embed(n_total, n_t_qubits)
    if block is None or n_t_qubits == 0:
        return lifted
    half = ZStringPolynomial.identity(n_total, HALF_PI)
    proj = basis_projector(n_t_qubits, block).embed(n_total, 0)
    return half + proj * (lifted - half)


def block_program(phase_phi, n_t_qubits, block, mode="custom", verify=False) -> DiagonalPhaseProgram:
    return compile_zstrings(block_phase_poly(phase_phi, n_t_qubits, block), mode, verify=verify)


# statistics ------------------------------------------------------------------

def _q_values(q, grid: CompositionGrid) -> np.ndarray:
    v = q(grid.centers) if callable(q) else np.asarray(q, dtype=float)
    return np.broadcast_to(np.asarray(v, dtype=float), (grid.n_cells,)).copy()


def _split(psi, grid, n_t_qubits):
    v = remove_global_phase(psi)
    if v.size != 2 ** (n_t_qubits + grid.n_qubits_phi):
        raise DomainError("state size does not match n_t_qubits + n_phi_qubits")
    return v


def estimate_statistic(psi, q: Callable | Sequence[float], grid: CompositionGrid, *,
                       n_t_qubits: int = 0, block: int | None = None, order: int | None = None,
                       fit_against: str = "index", shots: int = 0,
                       rng: np.random.Generator | None = None, verify: bool = False) -> float:
    """``sum_block q f / sum_block f`` from two overlap-circuit runs.

    ``block=None`` uses every time block (the whole state).
    """
    v = _split(psi, grid, n_t_qubits)
    num_poly = composition_phase_poly(_q_values(q, grid), order, fit_against)
    den_poly = ZStringPolynomial(grid.n_qubits_phi)  # q = 1 -> theta = 0
    num = overlap_expectation(v, block_program(num_poly, n_t_qubits, block, verify=verify), shots, rng)
    den = overlap_expectation(v, block_program(den_poly, n_t_qubits, block, verify=verify), shots, rng)
    if abs(den) < DENOMINATOR_FLOOR:
        raise DivisionUnderflowError(f"block mass expectation {den:.3e} too small")
    return num / den


@dataclass(frozen=True)
class MomentEncoding:
    """How mean and second moment are mapped into [-1, 1].

    ``centered`` measures ``s*u`` and ``s*(2u^2 - 1)`` with ``u = 2 phi - 1``
    and decodes affinely; a small ``s`` keeps ``arccos`` near its linear
    regime so low-order phase fits stay accurate. ``raw`` measures ``phi``
    and ``phi^2`` directly.
    """

    kind: str = "centered"
    scale: float = 0.25

    def __post_init__(self):
        if self.kind not in ("centered", "raw"):
            raise DomainError(f"unknown moment encoding {self.kind!r}")
        if not 0 < self.scale <= 1:
            raise DomainError("encoding scale must lie in (0, 1]")

    def statistics(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "raw":
            return phi, phi * phi
        u = 2 * phi - 1
        return self.scale * u, self.scale * (2 * u * u - 1)

    def decode(self, e1: float, e2: float) -> tuple[float, float]:
        if self.kind == "raw":
            return e1, e2 - e1 * e1
        Eu, Eu2 = e1 / self.scale, (e2 / self.scale + 1) / 2
        return (Eu + 1) / 2, (Eu2 - Eu * Eu) / 4


def measure_moment_series(psi, grid: CompositionGrid, n_t_qubits: int,
                          orders: Sequence[int | None] = (None,), *,
                          encoding: MomentEncoding = MomentEncoding(), fit_against: str = "index",
                          blocks: Sequence[int] | None = None, shots: int = 0,
                          rng: np.random.Generator | None = None) -> dict:
    """Circuit-measured mean and variance for each block and each order.

    Returns ``{order: (means, variances)}`` with arrays over ``blocks``;
    ``None`` denotes the exact phase program.
    """
    v = _split(psi, grid, n_t_qubits)
    blocks = list(range(2 ** n_t_qubits)) if blocks is None else list(blocks)
    s1, s2 = encoding.statistics(grid.centers)
    den_poly = ZStringPolynomial(grid.n_qubits_phi)
    dens = {}
    for k in blocks:
        d = overlap_expectation(v, block_program(den_poly, n_t_qubits, k), shots, rng)
        if abs(d) < DENOMINATOR_FLOOR:
            raise DivisionUnderflowError(f"block {k} mass expectation {d:.3e} too small")
        dens[k] = d

    out = {}
    for order in orders:
        p1 = composition_phase_poly(s1, order, fit_against)
        p2 = composition_phase_poly(s2, order, fit_against)
        means, variances = [], []
        for k in blocks:
            e1 = overlap_expectation(v, block_program(p1, n_t_qubits, k), shots, rng) / dens[k]
            e2 = overlap_expectation(v, block_program(p2, n_t_qubits, k), shots, rng) / dens[k]
            m, var = encoding.decode(e1, e2)
            means.append(m)
            variances.append(var)
        out[order] = (np.array(means), np.array(variances))
    return out


def averaged_relative_error(x, ref) -> float:
    x, ref = np.asarray(x, dtype=float), np.asarray(ref, dtype=float)
    return float(np.mean(np.abs(x - ref) / np.maximum(np.abs(ref), 1e-12)))
