"""Harrow-Hassidim-Lloyd solver simulated on the statevector backend.

The (generally non-symmetric) history matrix is embedded in the symmetric
dilation ``H = [[0, A], [A^T, 0]]``; solving ``H y = (b, 0)`` gives
``y = (0, x)``. Register layout, most significant first::

    qubit 0            rotation ancilla
    qubits 1..c        clock register (big-endian, two's-complement phases)
    qubits c+1..       dilated system register

Controlled powers of ``exp(i H t0)`` are exact matrix exponentials built
from one symmetric eigendecomposition. After inverse phase estimation the
run post-selects ancilla = 1 *and* clock = 0, so the returned system state
is pure.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import qsim
from .errors import ConfigError, DomainError, PostSelectionError
from .history_state import HistoryLinearSystem, solve_ideal
from .qsim import Circuit, QuantumState, fidelity

MIN_SUCCESS_PROB = 1e-8

# fraction of the signed clock half-window used by the largest |eigenvalue|
SPECTRUM_FILL = 0.75


@dataclass(frozen=True)
class HhlConfig:
    clock_qubits: int = 8
    t0: float | None = None
    c: float | None = None
    shots: int = 0

    def __post_init__(self):
        if self.clock_qubits < 2:
            raise ConfigError("clock_qubits must be >= 2")
        if self.t0 is not None and not self.t0 > 0:
            raise ConfigError("t0 must be positive")
        if self.c is not None and not self.c > 0:
            raise ConfigError("c must be positive")


@dataclass
class HhlResult:
    solution_state: QuantumState
    dilated_state: QuantumState
    success_probability: float
    fidelity_vs_reference: float
    t0: float
    c: float
    clock_qubits: int
    kappa: float
    branch_norm_sq: float

    @property
    def n_system(self) -> int:
        return self.solution_state.n_qubits


def hermitian_dilation(A, b) -> tuple[np.ndarray, np.ndarray]:
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    b = np.asarray(b)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise DomainError("A must be square and b must match")
    z = np.zeros_like(A)
    H = np.block([[z, A], [A.conj().T, z]])
    return H, np.concatenate([b, np.zeros_like(b)])


def qft_gates(qubits: Sequence[int]) -> list[qsim.Gate]:
    """QFT on a big-endian register: |x> -> K^-1/2 sum_k exp(2 pi i x k / K) |k>."""
    q = list(qubits)
    m = len(q)
    gates = []
    for j in range(m):
        gates.append(qsim.h(q[j]))
        for k in range(j + 1, m):
            angle = 2 * np.pi / 2 ** (k - j + 1)
            gates.append(qsim.diag([q[j]], [0.0, angle], controls=[q[k]]))
    for j in range(m // 2):
        a, b = q[j], q[m - 1 - j]
        gates += [qsim.cnot(a, b), qsim.cnot(b, a), qsim.cnot(a, b)]
    return gates


def signed_clock_values(clock_qubits: int) -> np.ndarray:
    K = 2 ** clock_qubits
    k = np.arange(K)
    return np.where(k < K // 2, k, k - K)


def inversion_angles(clock_qubits: int, t0: float, c: float) -> np.ndarray:
    """RY angles ``2 arcsin(c / lambda_hat)`` per clock value (0 for k = 0)."""
    K = 2 ** clock_qubits
    ks = signed_clock_values(clock_qubits)
    lam = 2 * np.pi * ks / (K * t0)
    out = np.zeros(K)
    nz = ks != 0
    out[nz] = 2 * np.arcsin(np.clip(c / lam[nz], -1.0, 1.0))
    return out


def default_parameters(evals: np.ndarray, clock_qubits: int) -> tuple[float, float]:
    lam_max = float(np.max(np.abs(evals)))
    lam_min = float(np.min(np.abs(evals)))
    t0 = 2 * np.pi * SPECTRUM_FILL * 0.5 / lam_max
    return t0, 0.9 * lam_min


def _log2(n: int) -> int:
    q = n.bit_length() - 1
    if 2 ** q != n:
        raise DomainError("system size must be a power of two")
    return q


def build_hhl_circuit(H: np.ndarray, b: np.ndarray, clock_qubits: int, t0: float, c: float,
                      evals=None, evecs=None) -> Circuit:
    if evals is None:
        evals, evecs = np.linalg.eigh(H)
    n_sys = _log2(H.shape[0])
    clock = list(range(1, clock_qubits + 1))
    system = list(range(clock_qubits + 1, clock_qubits + 1 + n_sys))
    circ = Circuit(1 + clock_qubits + n_sys)
    circ.add(qsim.prep(system, b, label="b"))

    qpe = []
    qpe += [qsim.h(q) for q in clock]
    for i, q in enumerate(clock):
        power = 2 ** (clock_qubits - 1 - i)
        U = (evecs * np.exp(1j * evals * t0 * power)) @ evecs.conj().T
        qpe.append(qsim.unitary(system, U, controls=[q], label=f"exp(iHt0*{power})"))
    qpe += [g.dagger() for g in reversed(qft_gates(clock))]

    circ.extend(qpe)
    circ.add(qsim.ucry(0, clock, inversion_angles(clock_qubits, t0, c)))
    circ.extend(g.dagger() for g in reversed(qpe))
    return circ


def hhl_solve_matrix(A, b, cfg: HhlConfig = HhlConfig(), reference=None,
                     rng: np.random.Generator | None = None) -> HhlResult:
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    H, bp = hermitian_dilation(A, b)
    n_sys = _log2(H.shape[0])
    total = 1 + cfg.clock_qubits + n_sys
    if total > qsim.MAX_QUBITS:
        raise ConfigError(f"HHL needs {total} qubits, budget is {qsim.MAX_QUBITS}")

    evals, evecs = np.linalg.eigh(H)
    t0_def, c_def = default_parameters(evals, cfg.clock_qubits)
    t0 = cfg.t0 if cfg.t0 is not None else t0_def
    c = cfg.c if cfg.c is not None else c_def

    circ = build_hhl_circuit(H, bp, cfg.clock_qubits, t0, c, evals, evecs)
    state = qsim.run(circ)

    psi = state.tensor()
    idx = (1,) + (0,) * cfg.clock_qubits
    branch = psi[idx].reshape(-1).copy()
    p_success = float(np.vdot(branch, branch).real)
    if cfg.shots > 0:
        rng = rng if rng is not None else np.random.default_rng()
        p_success = rng.binomial(cfg.shots, min(p_success, 1.0)) / cfg.shots
    if p_success < MIN_SUCCESS_PROB:
        raise PostSelectionError(f"post-selection probability {p_success:.3e} below {MIN_SUCCESS_PROB}")

    dilated = QuantumState(n_sys, branch / np.linalg.norm(branch))
    half = branch.size // 2
    x_part = branch[half:]
    solution = QuantumState(n_sys - 1, x_part / np.linalg.norm(x_part))

    if reference is None:
        reference = np.linalg.solve(A, b)
    ref_dil = np.concatenate([np.zeros_like(reference), reference])
    return HhlResult(
        solution_state=solution,
        dilated_state=dilated,
        success_probability=p_success,
        fidelity_vs_reference=fidelity(dilated, ref_dil),
        t0=float(t0),
        c=float(c),
        clock_qubits=cfg.clock_qubits,
        kappa=float(np.max(np.abs(evals)) / np.min(np.abs(evals))),
        branch_norm_sq=float(np.vdot(branch, branch).real),
    )


def hhl_solve(system: HistoryLinearSystem, cfg: HhlConfig = HhlConfig(),
              rng: np.random.Generator | None = None) -> HhlResult:
    ref = solve_ideal(system).values
    return hhl_solve_matrix(system.A, system.b, cfg, reference=ref, rng=rng)


def ideal_qlsa_state(system: HistoryLinearSystem) -> QuantumState:
    """Bypass mode: exact history solution loaded as amplitudes."""
    return qsim.prepare_amplitudes(solve_ideal(system).values)


SUMMARY_HEADER = ["mode", "n_system", "clock", "t0", "c", "success_prob", "fidelity", "kappa", "status"]


def write_run_summary(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER, restval="")
        w.writeheader()
        for r in rows:
            w.writerow(r)
