"""All-at-once (history state) formulation of the backward-Euler march.

For ``N_t + 1 = 2**n_t`` time levels the unknown is the concatenation
``psi = (f^0, f^1, ..., f^{N_t})`` and the system is block lower bidiagonal::

    [ I                 ] [f^0]   [f0]
    [-I  B              ] [f^1]   [ 0]
    [    -I  B          ] [f^2] = [ 0]      B = I - dt L
    [         ...  ...  ] [...]   [..]

Block 0 is an identity row so that the right-hand side is trivially
preparable and every block starts on a power-of-two boundary.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, SingularSystemError
from .fokker_planck import CompositionGrid, DiscretePdf, TransportOperator

MAX_TOTAL_QUBITS = 14


@dataclass(frozen=True)
class HistoryLinearSystem:
    A: sp.csr_matrix
    b: np.ndarray
    n_t_qubits: int
    n_phi_qubits: int
    dt: float

    @property
    def n_blocks(self) -> int:
        return 2 ** self.n_t_qubits

    @property
    def block_size(self) -> int:
        return 2 ** self.n_phi_qubits

    @property
    def n_total(self) -> int:
        return self.n_blocks * self.block_size

    @property
    def n_qubits(self) -> int:
        return self.n_t_qubits + self.n_phi_qubits

    @property
    def nnz(self) -> int:
        return int(self.A.nnz)

    @property
    def sparsity(self) -> float:
        """Fraction of zero entries in ``A``."""
        return 1.0 - self.nnz / float(self.n_total) ** 2

    def max_row_nnz(self) -> int:
        return int(np.diff(self.A.indptr).max())


@dataclass(frozen=True)
class HistoryVector:
    values: np.ndarray
    n_blocks: int
    block_size: int

    def block(self, k: int) -> np.ndarray:
        if not 0 <= k < self.n_blocks:
            raise IndexError(f"time block {k} out of range [0, {self.n_blocks})")
        return self.values[k * self.block_size:(k + 1) * self.block_size]


def _log2_exact(n: int) -> int:
    q = int(n).bit_length() - 1
    if n <= 0 or 2 ** q != n:
        raise DomainError(f"{n} is not a power of two")
    return q


def assemble_history_system(L, f0, dt: float, n_t_qubits: int) -> HistoryLinearSystem:
    Lm = sp.csr_matrix(L.matrix if isinstance(L, TransportOperator) else L)
    f0v = np.asarray(f0.values if isinstance(f0, DiscretePdf) else f0, dtype=float)
    n_cells = Lm.shape[0]
    if Lm.shape != (n_cells, n_cells) or f0v.shape != (n_cells,):
        raise DomainError("dimension mismatch between L and f0")
    n_phi = _log2_exact(n_cells)
    if n_t_qubits < 0 or n_t_qubits + n_phi > MAX_TOTAL_QUBITS:
        raise DomainError(f"total qubits n_t + n_phi must be <= {MAX_TOTAL_QUBITS}")
    if not dt > 0:
        raise DomainError("dt must be positive")

    n_blocks = 2 ** n_t_qubits
    eye = sp.identity(n_cells, format="csr")
    step = eye - dt * Lm
    first = sp.csr_matrix(([1.0], ([0], [0])), shape=(n_blocks, n_blocks))
    rest = sp.diags(np.r_[0.0, np.ones(n_blocks - 1)], format="csr")
    sub = sp.diags(np.ones(n_blocks - 1), -1, shape=(n_blocks, n_blocks), format="csr")
    A = sp.kron(first, eye) + sp.kron(rest, step) - sp.kron(sub, eye)
    A = sp.csr_matrix(A)
    A.eliminate_zeros()
    b = np.zeros(n_blocks * n_cells)
    b[:n_cells] = f0v
    return HistoryLinearSystem(A, b, n_t_qubits, n_phi, float(dt))


def solve_ideal(system: HistoryLinearSystem) -> HistoryVector:
    """Direct sparse solve standing in for an ideal linear-system oracle."""
    try:
        lu = spla.splu(sp.csc_matrix(system.A))
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    x = lu.solve(system.b)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("non-finite history solution")
    return HistoryVector(x, system.n_blocks, system.block_size)


def extract_time_block(v: HistoryVector, k: int, grid: CompositionGrid | None = None) -> DiscretePdf:
    grid = grid or CompositionGrid(_log2_exact(v.block_size))
    return DiscretePdf(np.real(v.block(k)), grid).normalized()


def condition_estimate(system: HistoryLinearSystem, max_iter: int = 5000,
                       rtol: float = 1e-10, seed: int = 0) -> float:
    """kappa_2(A) from power iteration on A^T A and inverse iteration via LU.

    A :class:`RuntimeWarning` is emitted when either iteration has not
    settled within ``max_iter`` sweeps; the current estimate is still
    returned.
    """
    A = sp.csc_matrix(system.A)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    lu = spla.splu(A)

    def iterate(apply):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        lam = 0.0
        for _ in range(max_iter):
            y = apply(x)
            new = float(np.linalg.norm(y))
            x = y / new
            if abs(new - lam) <= rtol * new:
                return new, True
            lam = new
        return lam, False

    smax2, ok1 = iterate(lambda x: A.T @ (A @ x))
    inv2, ok2 = iterate(lambda x: lu.solve(lu.solve(x, trans="T")))
    if not (ok1 and ok2):
        warnings.warn("condition estimate did not converge", RuntimeWarning, stacklevel=2)
    return float(np.sqrt(smax2 * inv2))


def export_coo(system: HistoryLinearSystem, path_A, path_b) -> None:
    """Write A and b as ``row col value`` triples after an ``N nnz`` header."""
    coo = system.A.tocoo()
    with open(path_A, "w") as fh:
        fh.write(f"{system.n_total} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {float(v)!r}\n")
    nz = np.flatnonzero(system.b)
    with open(path_b, "w") as fh:
        fh.write(f"{system.n_total} {nz.size}\n")
        for r in nz:
            fh.write(f"{r} 0 {float(system.b[r])!r}\n")


def read_coo(path, n_cols: int | None = None) -> sp.csr_matrix:
    """Inverse of :func:`export_coo`; pass ``n_cols=1`` for the b file."""
    with open(path) as fh:
        n, _ = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    shape = (n, n if n_cols is None else n_cols)
    if data.size == 0:
        return sp.csr_matrix(shape)
    return sp.csr_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                         shape=shape)
