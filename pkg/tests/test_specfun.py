"""Spectral-function identities, branch continuity, and the entrywise
functional-calculus action."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcdirac.specfun import (
    DeltaAction,
    F_FUNCTION,
    FDIV_FUNCTION,
    G_FUNCTION,
    Q_FUNCTION,
    apply_spectral,
    eval_F,
    eval_Fdiv,
    eval_G,
    eval_Q,
)

S_GRID = np.logspace(-3, 3, 50)


def test_values_at_one():
    assert abs(eval_G(1.0) - 2.0 / 3.0) <= 1e-12
    assert abs(eval_F(1.0)) <= 1e-12
    assert abs(eval_Fdiv(1.0)) <= 1e-12
    assert abs(eval_Q(1.0, 1.0)) <= 1e-12


def test_identity_grid_runtime():
    start = time.monotonic()
    for s in S_GRID:
        assert abs(eval_G(1.0) - 2.0 / 3.0) <= 1e-12
        assert abs(eval_F(1.0)) <= 1e-12
        assert abs(eval_F(1.0 / s) + eval_F(s)) <= 1e-12
        assert abs(eval_Q(s, 1.0) - eval_F(s)) <= 1e-12
    assert time.monotonic() - start < 1.0


def test_inversion_antisymmetry_of_F():
    for s in S_GRID:
        assert abs(eval_F(1.0 / s) + eval_F(s)) <= 1e-12


def test_Q_at_t_one_reduces_to_F():
    for s in S_GRID:
        assert abs(eval_Q(s, 1.0) - eval_F(s)) <= 1e-12


def _mp_reference(name, s, t=None):
    import mpmath as mp

    mp.mp.dps = 40
    s = mp.mpf(s)
    if name == "G":
        return 2 * (1 + mp.sqrt(s)) * mp.sqrt(s) / (s - 1) ** 3 * (
            (s + 1) * mp.log(s) - 2 * (s - 1)
        )
    if name == "F":
        return mp.sqrt(s) * ((s + 1) * mp.log(s) + 2 * (1 - s)) / (s - 1) ** 2
    if name == "Fdiv":
        return (1 + mp.sqrt(s)) * ((s - 1) - mp.sqrt(s) * mp.log(s)) / (s - 1) ** 2
    if name == "Q":
        t = mp.mpf(t)
        return mp.sqrt(s) * (s + mp.sqrt(t)) * mp.log(s) / ((s - 1) * (s - t)) - mp.sqrt(
            s * t
        ) * (mp.sqrt(t) + 1) * mp.log(t) / ((t - 1) * (s - t))
    raise KeyError(name)


@pytest.mark.parametrize("name,fn", [("G", eval_G), ("F", eval_F), ("Fdiv", eval_Fdiv)])
def test_one_variable_against_high_precision(name, fn):
    # avoid the exact singular point; include values straddling the
    # series/closed-form switchover
    for s in [0.002, 0.3, 0.99, 0.9995, 1.0004, 1.002, 1.1, 7.0, 431.0]:
        ref = float(_mp_reference(name, s))
        val = fn(s)
        assert abs(val - ref) <= 1e-10 * max(1.0, abs(ref)), (name, s)


def test_two_variable_against_high_precision():
    pts = [
        (0.5, 2.0),
        (3.0, 3.0001),
        (0.999, 1.002),
        (1e-2, 1e2),
        (40.0, 0.025),
        (1.0005, 0.9995),
    ]
    for s, t in pts:
        ref = float(_mp_reference("Q", s, t))
        assert abs(eval_Q(s, t) - ref) <= 1e-9 * max(1.0, abs(ref)), (s, t)


@given(st.floats(min_value=1e-4, max_value=1e4), st.floats(min_value=1e-4, max_value=1e4))
@settings(max_examples=200, deadline=None)
def test_Q_is_finite_and_continuous_under_jitter(s, t):
    v = eval_Q(s, t)
    assert math.isfinite(v)
    w = eval_Q(s * (1 + 1e-9), t)
    assert abs(v - w) <= 1e-5 * max(1.0, abs(v))


@pytest.mark.parametrize("fn", [eval_G, eval_F, eval_Fdiv])
def test_positive_domain_enforced(fn):
    with pytest.raises(ValueError):
        fn(0.0)
    with pytest.raises(ValueError):
        fn(-2.0)


def test_descriptors():
    assert G_FUNCTION.arity == 1 and Q_FUNCTION.arity == 2
    assert G_FUNCTION(1.0) == eval_G(1.0)
    assert Q_FUNCTION(2.0, 3.0) == eval_Q(2.0, 3.0)
    assert F_FUNCTION.name == "F" and FDIV_FUNCTION.name == "Fdiv"


def test_delta_action_ratios():
    act = DeltaAction((1.0, 2.0))
    S = act.ratios()
    assert S[0, 1] == pytest.approx(16.0)
    assert S[1, 0] == pytest.approx(1.0 / 16.0)
    assert np.allclose(np.diag(S), 1.0)
    with pytest.raises(ValueError):
        DeltaAction((1.0, -1.0))


def test_apply_spectral_scalar_H_reduces_to_value_at_one(rng):
    lam = (0.7, 0.7, 0.7)
    act = DeltaAction(lam)
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    out = apply_spectral(G_FUNCTION, act, X)
    assert np.allclose(out, eval_G(1.0) * X)
    Y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    out2 = apply_spectral(Q_FUNCTION, act, X, Y)
    assert np.allclose(out2, eval_Q(1.0, 1.0) * (X @ Y))


def test_apply_spectral_diagonal_conjugation_consistency(rng):
    # for arity 1, f(Delta)(X) must equal the matrix function applied to
    # the conjugation X -> H^-4 X H^4 in the eigenbasis
    lam = np.array([0.8, 1.1, 1.7])
    act = DeltaAction(tuple(lam))
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    # Delta(X) = H^-4 X H^4 entrywise: s_ij X_ij
    S = act.ratios()
    direct = np.diag(lam**-4.0) @ X @ np.diag(lam**4.0)
    assert np.allclose(S * X, direct)
