"""Commutative algebra of Pauli-Z strings.

A diagonal operator on ``n`` qubits is a real combination of Z-strings
``Z_S = prod_{i in S} Z_i``. Internally a string is stored as a bitmask in
*basis-index* bit positions (qubit ``i`` <-> bit ``n - 1 - i``), so that the
product of two strings is an XOR of masks (``Z^2 = I``) and the diagonal of
a polynomial is a Walsh-Hadamard transform of its coefficient array.

Coefficients may be floats or :class:`fractions.Fraction`; exact rationals
are what keep high powers of the index operator ``D`` usable.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping

import numpy as np

COEFF_LIMIT = 1e300


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis."""
    a = np.array(values, dtype=float, copy=True)
    n = a.shape[-1]
    h = 1
    while h < n:
        a = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x, y = a[..., 0, :].copy(), a[..., 1, :].copy()
        a[..., 0, :], a[..., 1, :] = x + y, x - y
        a = a.reshape(a.shape[:-3] + (n,))
        h *= 2
    return a


class ZStringPolynomial:
    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Mapping[int, Real] | None = None):
        self.n_qubits = int(n_qubits)
        self._terms: dict[int, Real] = {}
        for mask, c in (terms or {}).items():
            if not 0 <= mask < 2 ** self.n_qubits:
                raise ValueError(f"mask {mask} outside {self.n_qubits} qubits")
            if c != 0:
                self._terms[mask] = c

    @classmethod
    def identity(cls, n_qubits: int, coeff: Real = Fraction(1)) -> "ZStringPolynomial":
        return cls(n_qubits, {0: coeff})

    @classmethod
    def from_subsets(cls, n_qubits: int, terms: Mapping[Iterable[int], Real]) -> "ZStringPolynomial":
        return cls(n_qubits, {subset_to_mask(s, n_qubits): c for s, c in terms.items()})

    # mask <-> subset --------------------------------------------------
    def mask_to_subset(self, mask: int) -> frozenset[int]:
        return mask_to_subset(mask, self.n_qubits)

    @property
    def masks(self) -> dict[int, Real]:
        return dict(self._terms)

    @property
    def terms(self) -> dict[frozenset[int], Real]:
        return {self.mask_to_subset(m): c for m, c in self._terms.items()}

    def __len__(self):
        return len(self._terms)

    def weights(self) -> dict[int, int]:
        """Number of non-identity strings per weight."""
        out: dict[int, int] = {}
        for m in self._terms:
            if m:
                w = m.bit_count() if hasattr(m, "bit_count") else bin(m).count("1")
                out[w] = out.get(w, 0) + 1
        return out

    # algebra ------------------------------------------------------------
    def _check(self, other: "ZStringPolynomial"):
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")

    def __add__(self, other):
        if isinstance(other, Real):
            other = ZStringPolynomial.identity(self.n_qubits, other)
        self._check(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return ZStringPolynomial(self.n_qubits, out)

    __radd__ = __add__

    def __neg__(self):
        return ZStringPolynomial(self.n_qubits, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Real):
            return ZStringPolynomial(self.n_qubits, {m: c * other for m, c in self._terms.items()})
        self._check(other)
        out: dict[int, Real] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 ^ m2
                out[m] = out.get(m, 0) + c1 * c2
        return ZStringPolynomial(self.n_qubits, out)

    __rmul__ = __mul__

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    def to_float(self) -> "ZStringPolynomial":
        return ZStringPolynomial(self.n_qubits, {m: float(c) for m, c in self._terms.items()})

    def coefficient_array(self) -> np.ndarray:
        arr = np.zeros(2 ** self.n_qubits)
        for m, c in self._terms.items():
            arr[m] = float(c)
        return arr

    def evaluate(self) -> np.ndarray:
        """Diagonal entries ``<x|P|x>`` for every basis index ``x``."""
        return fwht(self.coefficient_array())

    def embed(self, n_total: int, offset: int) -> "ZStringPolynomial":
        """Place this register's qubits at ``offset .. offset+n-1`` of a larger one."""
        shift = n_total - offset - self.n_qubits
        if shift < 0:
            raise ValueError("register does not fit")
        return ZStringPolynomial(n_total, {m << shift: c for m, c in self._terms.items()})

    def __repr__(self):
        parts = ", ".join(f"{sorted(self.mask_to_subset(m))}: {c}" for m, c in sorted(self._terms.items()))
        return f"ZStringPolynomial(n={self.n_qubits}, {{{parts}}})"


def subset_to_mask(subset: Iterable[int], n_qubits: int) -> int:
    mask = 0
    for q in subset:
        if not 0 <= q < n_qubits:
            raise ValueError(f"qubit {q} out of range")
        mask |= 1 << (n_qubits - 1 - q)
    return mask


def mask_to_subset(mask: int, n_qubits: int) -> frozenset[int]:
    return frozenset(q for q in range(n_qubits) if mask >> (n_qubits - 1 - q) & 1)


def pauli_decompose_D(n: int) -> ZStringPolynomial:
    """``D = diag(0, 1, ..., 2^n - 1) = ((2^n - 1) I - sum_q 2^(n-1-q) Z_q) / 2``.

    Qubits are 0-indexed with qubit 0 the most significant bit.
    """
    if not 1 <= n <= 12:
        raise ValueError("n must be in [1, 12]")
    terms = {0: Fraction(2 ** n - 1, 2)}
    for q in range(n):
        terms[1 << (n - 1 - q)] = Fraction(-(2 ** (n - 1 - q)), 2)
    return ZStringPolynomial(n, terms)


def zstring_power(base: ZStringPolynomial, k: int) -> ZStringPolynomial:
    if k < 0:
        raise ValueError("power must be non-negative")
    out = ZStringPolynomial.identity(base.n_qubits)
    for _ in range(k):
        out = out * base
        if out.max_abs_coeff() > COEFF_LIMIT:
            raise OverflowError("Z-string coefficient overflow")
    return out


def index_powers(n: int, k_max: int) -> list[ZStringPolynomial]:
    """``[D^0, D^1, ..., D^k_max]`` computed incrementally."""
    D = pauli_decompose_D(n)
    out = [ZStringPolynomial.identity(n)]
    for _ in range(k_max):
        nxt = out[-1] * D
        if nxt.max_abs_coeff() > COEFF_LIMIT:
            raise OverflowError("Z-string coefficient overflow")
        out.append(nxt)
    return out


def polynomial_in_D(coeffs, n: int) -> ZStringPolynomial:
    """``sum_k coeffs[k] D^k`` expanded exactly in the Z-string basis."""
    coeffs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
    out = ZStringPolynomial(n)
    for c, Dk in zip(coeffs, index_powers(n, len(coeffs) - 1)):
        if c:
            out = out + Dk * c
    return out


def walsh_decompose(diagonal) -> ZStringPolynomial:
    """Z-string expansion of an arbitrary real diagonal (float coefficients)."""
    d = np.asarray(diagonal, dtype=float)
    n = d.size.bit_length() - 1
    if 2 ** n != d.size:
        raise ValueError("diagonal length must be a power of two")
    c = fwht(d) / d.size
    return ZStringPolynomial(n, {m: float(v) for m, v in enumerate(c) if v != 0.0})


def basis_projector(n: int, value: int) -> ZStringPolynomial:
    """``|value><value| = prod_q (I + s_q Z_q) / 2`` with ``s_q = +-1`` by bit."""
    if not 0 <= value < 2 ** n:
        raise ValueError("basis value out of range")
    out = ZStringPolynomial.identity(n)
    for q in range(n):
        bit = value >> (n - 1 - q) & 1
        s = Fraction(1 - 2 * bit)
        out = out * ZStringPolynomial(n, {0: Fraction(1, 2), 1 << (n - 1 - q): s / 2})
    return out
