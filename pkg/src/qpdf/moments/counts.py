"""Operation counts for the diagonal phase unitary.

Two families of numbers are produced and kept apart:

* closed-form counts, evaluated exactly as written for the construction
  (per-term ``sum_j C(k, j) (2j + 1)``, exact total
  ``2^(n-1) (n^2 + 2n + 2) - (n + 1)``);
* tallies of the circuits this package actually compiles, where a weight-w
  Z-string costs ``2 (w - 1)`` CNOTs and one Rz.
"""
from __future__ import annotations

import csv
from math import comb
from typing import Iterable, Sequence

from ..errors import DomainError


def term_count(k: int, n: int | None = None) -> int:
    """Cost of ``exp(i a D^k)``; weights are truncated at ``min(k, n)``."""
    if k < 0:
        raise DomainError("k must be >= 0")
    top = k if n is None else min(k, n)
    return sum(comb(k, j) * (2 * j + 1) for j in range(1, top + 1))


def exact_count(n: int) -> int:
    if n < 1:
        raise DomainError("n must be >= 1")
    return 2 ** (n - 1) * (n * n + 2 * n + 2) - (n + 1)


def approx_count(n: int, m: int) -> int:
    if n < 1 or m < 0:
        raise DomainError("need n >= 1 and m >= 0")
    return sum(term_count(k, n) for k in range(1, m + 1))


def gate_count(n: int, mode: str = "exact", k: int | None = None, m: int | None = None) -> int:
    """Dispatch: ``mode`` is ``"exact"``, ``"term"`` (needs ``k``) or ``"approx"`` (needs ``m``)."""
    if mode == "exact":
        return exact_count(n)
    if mode == "term":
        if k is None or k > n:
            raise DomainError("term mode needs k <= n")
        return term_count(k, n)
    if mode == "approx":
        if m is None:
            raise DomainError("approx mode needs m")
        return approx_count(n, m)
    raise DomainError(f"unknown mode {mode!r}")


def string_cost(weight: int) -> int:
    return 2 * (weight - 1) + 1 if weight else 0


def power_weights(n: int, k: int) -> dict[int, int]:
    """Number of weight-``w`` Z-strings in the expansion of ``D^k``.

    ``D = sum_q 2^(n-1-q) b_q`` with idempotent ``b_q = (I - Z_q) / 2``, so
    ``D^k`` is a positive combination of products of at most ``k`` distinct
    ``b_q``. Expanding those products gives ``Z_S`` the sign ``(-1)^|S|`` in
    every contribution, hence no cancellation: every string with
    ``|S| <= min(k, n)`` appears and no other.
    """
    if n < 1 or k < 0:
        raise DomainError("need n >= 1 and k >= 0")
    return {w: comb(n, w) for w in range(1, min(k, n) + 1)}


def compiled_term_tally(n: int, k: int) -> int:
    """CNOT + Rz count of ``exp(i a D^k)`` compiled string by string."""
    return sum(cnt * string_cost(w) for w, cnt in power_weights(n, k).items())


def compiled_approx_tally(n: int, m: int) -> int:
    """Terms ``k = 1..m`` compiled separately, as in the per-term construction."""
    return sum(compiled_term_tally(n, k) for k in range(1, m + 1))


def compiled_exact_tally(n: int) -> int:
    """All ``N - 1`` non-constant terms compiled separately."""
    return sum(compiled_term_tally(n, k) for k in range(1, 2 ** n))


def compiled_merged_tally(n: int, max_weight: int | None = None) -> int:
    """Like terms merged: each distinct string compiled once."""
    top = n if max_weight is None else min(n, max_weight)
    return sum(comb(n, w) * string_cost(w) for w in range(1, top + 1))


GATE_COUNT_HEADER_PREFIX = ["n", "exact_count"]


def gate_count_rows(n_range: Iterable[int], orders: Sequence[int] = (2, 4, 6)) -> list[list[int]]:
    return [[n, exact_count(n)] + [approx_count(n, m) for m in orders] for n in n_range]


def emit_gate_count_table(path, n_range: Iterable[int] = range(1, 31),
                          orders: Sequence[int] = (2, 4, 6)) -> list[list[int]]:
    n_range = list(n_range)
    if any(not 1 <= n <= 30 for n in n_range):
        raise DomainError("n must lie in [1, 30]")
    rows = gate_count_rows(n_range, orders)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GATE_COUNT_HEADER_PREFIX + [f"approx_m{m}" for m in orders])
        w.writerows(rows)
    return rows


def emit_compiled_tally_table(path, n_range: Iterable[int] = range(1, 9),
                              orders: Sequence[int] = (2, 4, 6)) -> list[list[int]]:
    """Compiled tallies next to the formulas, with their differences."""
    header = ["n", "exact_formula", "exact_compiled_per_term", "exact_compiled_merged", "exact_offset"]
    for m in orders:
        header += [f"approx_m{m}_formula", f"approx_m{m}_compiled", f"approx_m{m}_offset"]
    rows = []
    for n in n_range:
        if n > 8:
            raise DomainError("compiled tallies are limited to n <= 8")
        ef, ec = exact_count(n), compiled_exact_tally(n)
        row = [n, ef, ec, compiled_merged_tally(n), ec - ef]
        for m in orders:
            af, ac = approx_count(n, m), compiled_approx_tally(n, min(m, 2 ** n - 1))
            row += [af, ac, ac - af]
        rows.append(row)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return rows
