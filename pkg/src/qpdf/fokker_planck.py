"""Finite-volume discretization of the composition-space PDF equation.

In a zero-dimensional reactor the PDF obeys pure advection in composition
space,

    df/dt = -d/dphi [ f * G(phi) ],

with G the reactor drift. Cells are centred on a uniform grid of 2**n cells
covering [0, 1]; face fluxes are first-order upwind and the boundary faces
carry zero flux, so the generator ``L`` has zero column sums and
``I - dt L`` is an M-matrix.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .chemistry import DEFAULT_PARAMS, PsrParams, drift
from .errors import DomainError, SingularSystemError

MAX_PHI_QUBITS = 12


@dataclass(frozen=True)
class CompositionGrid:
    n_qubits_phi: int

    def __post_init__(self):
        if not 1 <= self.n_qubits_phi <= MAX_PHI_QUBITS:
            raise DomainError(f"n_qubits_phi must be in [1, {MAX_PHI_QUBITS}]")

    @property
    def n_cells(self) -> int:
        return 2 ** self.n_qubits_phi

    @property
    def spacing(self) -> float:
        return 1.0 / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) / self.n_cells

    @cached_property
    def interior_faces(self) -> np.ndarray:
        return np.arange(1, self.n_cells) / self.n_cells


def build_grid(n_qubits_phi: int) -> CompositionGrid:
    return CompositionGrid(int(n_qubits_phi))


@dataclass
class DiscretePdf:
    """Cell-averaged density values on a composition grid."""

    values: np.ndarray
    grid: CompositionGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise DomainError("PDF length does not match the grid")

    def total(self) -> float:
        return float(self.values.sum() * self.grid.spacing)

    def normalized(self) -> "DiscretePdf":
        mass = self.total()
        if mass == 0:
            raise DomainError("cannot normalize a PDF with zero mass")
        return DiscretePdf(self.values / mass, self.grid)


@dataclass(frozen=True)
class TransportOperator:
    matrix: sp.csr_matrix
    scheme: str = "upwind1"
    face_velocity: np.ndarray = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def upwind_operator(face_velocity: np.ndarray, spacing: float) -> sp.csr_matrix:
    """Generator for given interior face velocities (zero flux at the ends)."""
    g = np.asarray(face_velocity, dtype=float)
    n = g.size + 1
    rows, cols, vals = [], [], []
    for i, gi in enumerate(g):
        # face between cell i and cell i + 1; donor cell by sign of gi
        donor = i if gi > 0 else i + 1
        w = abs(gi) / spacing
        if w == 0.0:
            continue
        acceptor = i + 1 if gi > 0 else i
        rows += [donor, acceptor]
        cols += [donor, donor]
        vals += [-w, w]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def assemble_transport_operator(grid: CompositionGrid,
                                params: PsrParams = DEFAULT_PARAMS) -> TransportOperator:
    g = drift(grid.interior_faces, params)
    return TransportOperator(upwind_operator(g, grid.spacing), "upwind1", g)


def init_beta(grid: CompositionGrid, shape_a: float = 8.0, shape_b: float = 8.0) -> DiscretePdf:
    """Beta(a, b) density sampled at cell centres and renormalized on the grid."""
    if not (shape_a > 0 and shape_b > 0):
        raise DomainError("beta shape parameters must be positive")
    j = np.arange(grid.n_cells)
    x = (j + 0.5) / grid.n_cells
    # 1 - x from integers so that a == b gives an exactly mirrored profile
    y = (grid.n_cells - j - 0.5) / grid.n_cells
    f = x ** (shape_a - 1.0) * y ** (shape_b - 1.0)
    return DiscretePdf(f / (f.sum() * grid.spacing), grid)


def _as_matrix(L) -> sp.csc_matrix:
    m = L.matrix if isinstance(L, TransportOperator) else L
    return sp.csc_matrix(m)


def evolve_classical(f0: DiscretePdf, L, dt: float, n_steps: int) -> list[DiscretePdf]:
    """Backward-Euler trajectory ``f^{k+1} = (I - dt L)^{-1} f^k``."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    m = _as_matrix(L)
    step = sp.identity(m.shape[0], format="csc") - dt * m
    try:
        lu = spla.splu(sp.csc_matrix(step))
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    out = [f0]
    f = f0.values
    for _ in range(n_steps):
        f = lu.solve(f)
        if not np.all(np.isfinite(f)):
            raise SingularSystemError("non-finite backward-Euler iterate")
        out.append(DiscretePdf(f, f0.grid))
    return out


def grid_moment(f: DiscretePdf, grid: CompositionGrid, q: Callable | np.ndarray) -> float:
    qv = q(grid.centers) if callable(q) else np.asarray(q, dtype=float)
    qv = np.broadcast_to(np.asarray(qv, dtype=float), (grid.n_cells,))
    return float(np.sum(qv * f.values) * grid.spacing)


def mean_and_variance(f: DiscretePdf) -> tuple[float, float]:
    g = f.grid
    mass = f.total()
    m1 = grid_moment(f, g, lambda p: p) / mass
    m2 = grid_moment(f, g, lambda p: p * p) / mass
    return m1, m2 - m1 * m1


def write_trajectory_csv(path, trajectory: Sequence[DiscretePdf], dt: float) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "phi", "f"])
        for k, pdf in enumerate(trajectory):
            for phi, val in zip(pdf.grid.centers, pdf.values):
                w.writerow([repr(k * dt), repr(float(phi)), repr(float(val))])
