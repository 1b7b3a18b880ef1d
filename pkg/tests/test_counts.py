import csv
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpdf.errors import DomainError
from qpdf.moments.counts import (
    approx_count,
    compiled_approx_tally,
    compiled_exact_tally,
    compiled_merged_tally,
    emit_compiled_tally_table,
    emit_gate_count_table,
    exact_count,
    gate_count,
    power_weights,
    string_cost,
    term_count,
)
from qpdf.moments.phase import compile_phase_unitary
from qpdf.moments.zstrings import index_powers


def test_term_examples():
    assert gate_count(1, "term", k=1) == 3
    assert gate_count(2, "term", k=2) == 11
    assert term_count(2) == 3 * 2 + 5


def test_exact_examples():
    assert gate_count(2) == 17
    assert gate_count(1) == 3
    assert [exact_count(n) for n in range(1, 6)] == [3, 17, 64, 203, 586]


@pytest.mark.parametrize("n", range(1, 21))
def test_exact_closed_form(n):
    assert gate_count(n, "exact") == 2 ** (n - 1) * (n * n + 2 * n + 2) - (n + 1)


@given(st.integers(0, 40))
def test_term_is_printed_sum(k):
    assert term_count(k) == sum(comb(k, j) * (2 * j + 1) for j in range(1, k + 1))


def test_approx_is_truncated_sum_of_terms():
    assert approx_count(2, 2) == 3 + 11
    assert approx_count(1, 2) == 3 + 2 * 3
    assert gate_count(8, "approx", m=4) == sum(term_count(k) for k in range(1, 5))
    for m in (2, 4, 6):
        counts = [approx_count(n, m) for n in range(m, 31)]
        assert len(set(counts)) == 1


def test_ratio_approaches_two():
    r = [exact_count(n + 1) / exact_count(n) for n in range(1, 30)]
    assert abs(r[-1] - 2) < 0.15
    assert np.all(np.diff(np.abs(np.array(r[5:]) - 2)) < 0)


@pytest.mark.parametrize("m", [2, 4, 6])
def test_approx_loglog_slope(m):
    n = np.arange(8, 21)
    y = np.array([approx_count(int(k), m) for k in n], dtype=float)
    slope = np.polyfit(np.log(n), np.log(y), 1)[0]
    assert slope <= m + 0.2


def test_mode_errors():
    with pytest.raises(DomainError):
        gate_count(2, "term", k=3)
    with pytest.raises(DomainError):
        gate_count(2, "approx")
    with pytest.raises(DomainError):
        gate_count(2, "sparse")
    with pytest.raises(DomainError):
        exact_count(0)


@pytest.mark.parametrize("n", range(1, 6))
def test_power_weights_match_expansion(n):
    for k, Dk in enumerate(index_powers(n, 2 ** n - 1)):
        assert Dk.weights() == power_weights(n, k)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_compiled_tallies_match_circuits(n):
    for k in range(1, 2 ** n):
        coeffs = [0] * k + [1]
        prog = compile_phase_unitary(coeffs, "beta", n, verify=False)
        assert sum(prog.tally().values()) == sum(cnt * string_cost(w) for w, cnt in power_weights(n, k).items())
    merged = compile_phase_unitary([0] + [1] * (2 ** n - 1), "alpha", n, verify=False)
    assert sum(merged.tally().values()) == compiled_merged_tally(n)


def test_compiled_reference_values():
    assert [compiled_exact_tally(n) for n in (2, 3, 4)] == [12, 100, 656]
    assert [compiled_merged_tally(n) for n in (2, 3, 4)] == [5, 17, 49]
    assert compiled_approx_tally(3, 2) == 15


def test_gate_count_table(tmp_path):
    rows = emit_gate_count_table(tmp_path / "g.csv", range(1, 21), (2, 4, 6))
    data = list(csv.reader(open(tmp_path / "g.csv")))
    assert data[0] == ["n", "exact_count", "approx_m2", "approx_m4", "approx_m6"]
    assert data[1][:2] == ["1", "3"] and data[2][:2] == ["2", "17"]
    assert [int(r[1]) for r in data[1:]] == [exact_count(n) for n in range(1, 21)]
    assert len(rows) == 20
    with pytest.raises(DomainError):
        emit_gate_count_table(tmp_path / "x.csv", range(1, 32))


def test_compiled_table(tmp_path):
    rows = emit_compiled_tally_table(tmp_path / "c.csv", range(1, 9))
    data = list(csv.reader(open(tmp_path / "c.csv")))
    assert data[0][:5] == ["n", "exact_formula", "exact_compiled_per_term", "exact_compiled_merged", "exact_offset"]
    for r in rows:
        assert r[4] == r[2] - r[1]
    assert len(rows) == 8
    with pytest.raises(DomainError):
        emit_compiled_tally_table(tmp_path / "c.csv", [9])
