"""Dense statevector simulator.

Bit order: qubit 0 is the most significant bit of the basis label, so on
``n`` qubits ``X`` applied to qubit 0 of ``|0...0>`` lands on index
``2**(n-1)``. Amplitudes are stored flat (complex128) and viewed as an
``(2,)*n`` tensor when gates are applied; controls are realized by slicing
the control axes at 1, which yields a view so every kernel writes in place.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DomainError

MAX_QUBITS = 22

_SQ2 = 1.0 / np.sqrt(2.0)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "CNOT": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class QuantumState:
    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"QuantumState(n_qubits={self.n_qubits})"


@dataclass(frozen=True, eq=False)
class Gate:
    """One circuit operation.

    ``kind`` is one of H, X, Z, RY, RZ, P, CNOT, DIAG, UNITARY, PREP, UCRY.
    For UCRY the ``controls`` are selector qubits (big-endian) rather than
    plain controls: the target receives ``RY(param[s])`` where ``s`` is the
    selector register value.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    param: Any = None
    label: str = ""
    inverse: bool = False

    def __post_init__(self):
        if set(self.targets) & set(self.controls):
            raise DomainError(f"{self.kind}: targets and controls overlap")
        if len(set(self.targets)) != len(self.targets) or len(set(self.controls)) != len(self.controls):
            raise DomainError(f"{self.kind}: repeated qubit")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def controlled(self, *ctrl: int) -> "Gate":
        if self.kind == "UCRY":
            raise DomainError("UCRY cannot take extra controls")
        return replace(self, controls=tuple(ctrl) + self.controls)

    def dagger(self) -> "Gate":
        k = self.kind
        if k in ("H", "X", "Z", "CNOT"):
            return self
        if k in ("RY", "RZ", "P", "DIAG", "UCRY"):
            return replace(self, param=-np.asarray(self.param) if k in ("DIAG", "UCRY") else -self.param)
        if k == "UNITARY":
            return replace(self, param=np.asarray(self.param).conj().T)
        if k == "PREP":
            return replace(self, inverse=not self.inverse)
        raise DomainError(f"unknown gate kind {k}")

    def matrix(self) -> np.ndarray:
        """Dense matrix on the targets (controls not included)."""
        k = self.kind
        if k in _FIXED:
            return _FIXED[k]
        if k == "RZ":
            t = self.param
            return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
        if k == "RY":
            c, s = np.cos(self.param / 2), np.sin(self.param / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if k == "P":
            return np.diag([1.0, np.exp(1j * self.param)])
        if k == "DIAG":
            return np.diag(np.exp(1j * np.asarray(self.param, dtype=float)))
        if k == "UNITARY":
            return np.asarray(self.param, dtype=complex)
        if k == "PREP":
            m = _householder_matrix(np.asarray(self.param, dtype=complex))
            return m.conj().T if self.inverse else m
        raise DomainError(f"no target matrix for {k}")


def h(q): return Gate("H", (q,))
def x(q): return Gate("X", (q,))
def z(q): return Gate("Z", (q,))
def ry(q, angle): return Gate("RY", (q,), param=float(angle))
def rz(q, angle): return Gate("RZ", (q,), param=float(angle))
def phase(q, angle): return Gate("P", (q,), param=float(angle))
def cnot(control, target): return Gate("CNOT", (target,), (control,))


def diag(targets: Sequence[int], angles, controls: Sequence[int] = ()) -> Gate:
    """Diagonal ``exp(i * angles[j])`` on the target register."""
    a = np.asarray(angles, dtype=float)
    if a.shape != (2 ** len(targets),):
        raise DomainError("diagonal length must be 2**len(targets)")
    return Gate("DIAG", tuple(targets), tuple(controls), a)


def unitary(targets: Sequence[int], matrix, controls: Sequence[int] = (), label: str = "") -> Gate:
    m = np.asarray(matrix, dtype=complex)
    d = 2 ** len(targets)
    if m.shape != (d, d):
        raise DomainError("matrix size does not match targets")
    return Gate("UNITARY", tuple(targets), tuple(controls), m, label)


def prep(targets: Sequence[int], vector, controls: Sequence[int] = (), label: str = "U_psi") -> Gate:
    """Unitary mapping ``|0...0>`` to the normalized ``vector``."""
    v = np.asarray(vector, dtype=complex)
    if v.shape != (2 ** len(targets),):
        raise DomainError("state length must be 2**len(targets)")
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DomainError("cannot prepare the zero vector")
    return Gate("PREP", tuple(targets), tuple(controls), v / nrm, label)


def ucry(target: int, selectors: Sequence[int], angles) -> Gate:
    a = np.asarray(angles, dtype=float)
    if a.shape != (2 ** len(selectors),):
        raise DomainError("need one angle per selector value")
    return Gate("UCRY", (target,), tuple(selectors), a)


def _householder_parts(psi: np.ndarray):
    alpha = np.angle(psi[0]) if psi[0] != 0 else 0.0
    phi = psi * np.exp(-1j * alpha)
    v = -phi.copy()
    v[0] += 1.0
    vv = float(np.vdot(v, v).real)
    return alpha, v, vv


def _householder_matrix(psi: np.ndarray) -> np.ndarray:
    alpha, v, vv = _householder_parts(psi)
    m = np.eye(psi.size, dtype=complex)
    if vv > 0:
        m -= 2.0 * np.outer(v, v.conj()) / vv
    return np.exp(1j * alpha) * m


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, *gates: Gate) -> "Circuit":
        for g in gates:
            _check_range(g, self.n_qubits)
            self.gates.append(g)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        return self.add(*gates)

    def tally(self) -> Counter:
        return Counter(g.kind for g in self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.dagger() for g in reversed(self.gates)])

    def __len__(self):
        return len(self.gates)


def _check_range(g: Gate, n: int) -> None:
    for q in g.qubits:
        if not 0 <= q < n:
            raise IndexError(f"{g.kind}: qubit {q} out of range for {n} qubits")


def new_state(n_qubits: int) -> QuantumState:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise DomainError(f"n_qubits must be in [1, {MAX_QUBITS}]")
    amp = np.zeros(2 ** n_qubits, dtype=complex)
    amp[0] = 1.0
    return QuantumState(n_qubits, amp)


def _apply_matrix(sub: np.ndarray, pos: Sequence[int], m: np.ndarray) -> None:
    k = len(pos)
    view = np.moveaxis(sub, list(pos), list(range(k)))
    flat = view.reshape(2 ** k, -1)
    view[...] = (m @ flat).reshape(view.shape)


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    n = state.n_qubits
    _check_range(gate, n)
    psi = state.tensor()
    kind = gate.kind

    if kind == "UCRY":
        sel, t = gate.controls, gate.targets[0]
        s = len(sel)
        view = np.moveaxis(psi, list(sel) + [t], list(range(s + 1)))
        arr = view.reshape(2 ** s, 2, -1)
        c = np.cos(gate.param / 2)[:, None]
        sn = np.sin(gate.param / 2)[:, None]
        a0, a1 = arr[:, 0, :], arr[:, 1, :]
        out = np.stack([c * a0 - sn * a1, sn * a0 + c * a1], axis=1)
        view[...] = out.reshape(view.shape)
        return state

    if gate.controls:
        idx = [slice(None)] * n
        for c in gate.controls:
            idx[c] = 1
        sub = psi[tuple(idx)]
        free = [q for q in range(n) if q not in gate.controls]
        pos = [free.index(t) for t in gate.targets]
    else:
        sub = psi
        pos = list(gate.targets)

    if kind in ("X", "CNOT") and len(pos) == 1:
        view = np.moveaxis(sub, pos[0], 0)
        view[[0, 1]] = view[[1, 0]]
    elif kind in ("Z", "RZ", "P", "DIAG"):
        k = len(pos)
        d = np.diagonal(gate.matrix()).reshape((2,) * k)
        view = np.moveaxis(sub, pos, list(range(k)))
        view *= d.reshape(d.shape + (1,) * (view.ndim - k))
    elif kind == "PREP":
        k = len(pos)
        alpha, v, vv = _householder_parts(gate.param)
        ph = np.exp(-1j * alpha) if gate.inverse else np.exp(1j * alpha)
        view = np.moveaxis(sub, pos, list(range(k)))
        flat = view.reshape(2 ** k, -1)
        if vv > 0:
            flat = flat - (2.0 / vv) * np.outer(v, v.conj() @ flat)
        view[...] = (ph * flat).reshape(view.shape)
    else:
        _apply_matrix(sub, pos, gate.matrix())
    return state


def run(circuit: Circuit, state: QuantumState | None = None) -> QuantumState:
    state = state if state is not None else new_state(circuit.n_qubits)
    if state.n_qubits != circuit.n_qubits:
        raise DomainError("state and circuit sizes differ")
    for g in circuit.gates:
        apply_gate(state, g)
    return state


def prepare_amplitudes(target) -> QuantumState:
    v = np.asarray(target, dtype=complex).ravel()
    n = v.size.bit_length() - 1
    if v.size < 2 or 2 ** n != v.size:
        raise DomainError("amplitude vector length must be a power of two >= 2")
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DomainError("cannot prepare the zero vector")
    return QuantumState(n, v / nrm)


def expectation_z(state: QuantumState, qubit: int, shots: int = 0,
                  rng: np.random.Generator | None = None) -> float:
    """<Z> on one qubit; exact unless ``shots > 0``."""
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    p = np.abs(np.moveaxis(state.tensor(), qubit, 0)) ** 2
    p1 = float(p[1].sum()) / float(p.sum())
    if shots <= 0:
        return 1.0 - 2.0 * p1
    rng = rng if rng is not None else np.random.default_rng()
    ones = rng.binomial(shots, min(max(p1, 0.0), 1.0))
    return 1.0 - 2.0 * ones / shots


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    if a.n_qubits != b.n_qubits:
        raise DomainError("state sizes differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: QuantumState, reference) -> float:
    """``|<a|ref>|^2`` with the reference normalized first."""
    ref = np.asarray(reference.amplitudes if isinstance(reference, QuantumState) else reference,
                     dtype=complex).ravel()
    if ref.size != a.amplitudes.size:
        raise DomainError("size mismatch")
    ref = ref / np.linalg.norm(ref)
    return float(abs(np.vdot(ref, a.amplitudes)) ** 2 / np.vdot(a.amplitudes, a.amplitudes).real)


def dump_csv(state: QuantumState, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, a in enumerate(state.amplitudes):
            w.writerow([i, repr(float(a.real)), repr(float(a.imag))])
