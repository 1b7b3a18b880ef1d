import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpdf.chemistry import (
    PsrParams,
    Stability,
    drift,
    find_equilibria,
    mixing_rate,
    reaction_rate,
    stable_roots,
)
from qpdf.errors import DomainError

# bisection oracle on the default drift, computed once and frozen
LOW_STABLE = 3.7985391616e-4
UNSTABLE = 0.1648580922
HIGH_STABLE = 0.9174404502

phis = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
params_st = st.builds(
    PsrParams,
    rate_prefactor=st.floats(0.5, 40.0),
    phi_a=st.floats(0.2, 4.0),
    phi_i=st.floats(0.02, 1.0),
    mixing_rate=st.floats(0.01, 2.0),
)


def test_reaction_rate_examples():
    assert reaction_rate(1.0) == 0.0
    assert reaction_rate(0.5) == pytest.approx(7.5 * math.exp(-1.8 / 0.65), rel=1e-14)
    assert reaction_rate(0.5) == pytest.approx(0.4703266862, abs=1e-10)
    assert reaction_rate(0.0) == pytest.approx(15 * math.exp(-12), rel=1e-14)


def test_mixing_rate_examples():
    assert mixing_rate(0.0) == 0.0
    assert mixing_rate(1.0) == -0.25
    assert mixing_rate(0.5) == -0.125


def test_drift_examples():
    assert drift(1.0) == -0.25
    assert drift(0.5) == pytest.approx(0.4703266862 - 0.125, abs=1e-10)
    assert drift(0.0) == pytest.approx(9.2163185e-5, rel=1e-7)


def test_vectorized_matches_scalar():
    xs = np.linspace(0, 1, 17)
    np.testing.assert_array_equal(drift(xs), [drift(float(x)) for x in xs])


@pytest.mark.parametrize("bad", [-1e-9, 1.0 + 1e-9, float("nan")])
def test_domain_errors(bad):
    for fn in (reaction_rate, mixing_rate, drift):
        with pytest.raises(DomainError):
            fn(bad)


def test_invalid_params():
    with pytest.raises(DomainError):
        PsrParams(phi_i=0.0)
    with pytest.raises(DomainError):
        PsrParams(mixing_rate=-0.1)


def test_default_equilibria():
    eq = find_equilibria()
    locs = [e.location for e in eq]
    assert locs == pytest.approx([LOW_STABLE, UNSTABLE, HIGH_STABLE], abs=1e-9)
    assert [e.stability for e in eq] == [Stability.STABLE, Stability.UNSTABLE, Stability.STABLE]
    assert locs[0] < 1e-3
    assert stable_roots() == pytest.approx([LOW_STABLE, HIGH_STABLE], abs=1e-9)


def test_no_mixing_single_root_at_one():
    eq = find_equilibria(PsrParams(mixing_rate=0.0))
    assert len(eq) == 1
    assert eq[0].location == 1.0 and eq[0].stability is Stability.STABLE


def test_tol_must_be_positive():
    with pytest.raises(DomainError):
        find_equilibria(tol=0.0)


@given(phis)
def test_reaction_rate_nonnegative(phi):
    s = reaction_rate(phi)
    assert s >= 0.0
    assert (s == 0.0) == (phi == 1.0)


@given(phis)
def test_drift_is_sum(phi):
    assert drift(phi) == reaction_rate(phi) + mixing_rate(phi)


@settings(max_examples=40, deadline=None)
@given(params_st)
def test_equilibria_are_roots_with_consistent_stability(params):
    tol = 1e-12
    eq = find_equilibria(params, tol)
    for e in eq:
        assert abs(drift(e.location, params)) < tol
        h = 1e-5
        left = drift(max(0.0, e.location - h), params) if e.location > 0 else None
        right = drift(min(1.0, e.location + h), params) if e.location < 1 else None
        if e.stability is Stability.STABLE:
            assert (left is None or left >= 0) and (right is None or right <= 0)
        else:
            assert (left is None or left <= 0) and (right is None or right >= 0)


@settings(max_examples=40, deadline=None)
@given(params_st)
def test_constant_sign_between_equilibria(params):
    cuts = [0.0] + [e.location for e in find_equilibria(params)] + [1.0]
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-6:
            continue
        xs = np.linspace(a, b, 400)[1:-1]
        xs = xs[(xs - a > 1e-6) & (b - xs > 1e-6)]
        g = drift(xs, params)
        assert np.all(g > 0) or np.all(g < 0)
