"""Exact xi-plane integration: the traced display, the integrated
density, and the quadrature oracle for the spectral-function forms."""

from fractions import Fraction

import numpy as np
import pytest

from mcdirac.symcalc.evalx import NumericEnv
from mcdirac.xi_integrate import (
    CurvatureDensity,
    DivergenceError,
    SandwichResidueError,
    beta_int,
    display_form,
    integrate_pureH,
    integrate_sandwich,
    radial_integral,
    total_density,
    xi_quadrature,
)

# The reference traced display of the A-independent order -2 symbol:
# per gradient direction (b0 power, H power, xi^2 power) -> coefficient,
# and the same for the Laplacian family.
GRAD_DISPLAY = {(2, 2, 0): -2, (3, 6, 1): 46, (4, 10, 2): -136, (5, 14, 3): 96}
LAP_DISPLAY = {(2, 3, 0): -1, (3, 7, 1): 8, (4, 11, 2): -8}


def test_beta_and_radial_integrals():
    assert beta_int(1, 1) == 1
    assert beta_int(2, 3) == Fraction(1, 12)
    # int r^3 (1+r^2)^-4 dr = B(2,2)/2 = 1/12
    assert radial_integral(1, 4) == Fraction(1, 12)
    assert radial_integral(0, 2, Fraction(9)) == Fraction(1, 18)
    with pytest.raises(DivergenceError):
        radial_integral(2, 3)


def _families(deg0):
    grad, lap = {}, {}
    for (cliff, (e1, e2, k), word), c in deg0.terms.items():
        assert cliff == 0 and e1 == 0 and e2 == 0
        b0p = sum(g[1] for g in word if g[0] == "b0")
        hp = sum(g[1] for g in word if g[0] == "H")
        kinds = sorted(g[0] for g in word if g[0] not in ("b0", "H"))
        if kinds == ["dH", "dH"]:
            d = {g[1] for g in word if g[0] == "dH"}
            assert len(d) == 1, "mixed-direction gradient term in the display"
            grad[(b0p, hp, k, d.pop())] = c
        else:
            assert kinds == ["lap"]
            lap[(b0p, hp, k)] = c
    return grad, lap


def test_seven_term_display(b2_parts):
    grad, lap = _families(b2_parts["deg0"])
    for direction in (1, 2):
        got = {(b, h, k): c for (b, h, k, d), c in grad.items() if d == direction}
        assert got == GRAD_DISPLAY
    assert lap == LAP_DISPLAY
    # coefficient multisets of the display
    assert sorted(set(int(c.re) for c in grad.values())) == [-136, -2, 46, 96]
    assert sorted(int(c.re) for c in lap.values()) == [-8, -1, 8]


def test_display_coefficient_perturbation_detected(b2_parts):
    from mcdirac.symcalc import SymbolPoly

    deg0 = SymbolPoly(dict(b2_parts["deg0"].terms))
    key = sorted(deg0.terms, key=str)[0]
    deg0.terms[key] = deg0.terms[key] + 1
    grad, lap = _families(deg0)
    flat = {(b, h, k): c for (b, h, k, d), c in grad.items() if d == 1}
    changed = flat != GRAD_DISPLAY or lap != LAP_DISPLAY or {
        (b, h, k): c for (b, h, k, d), c in grad.items() if d == 2
    } != GRAD_DISPLAY
    assert changed


def test_integrated_pure_density_is_exact(b2_parts):
    dens = integrate_pureH(b2_parts["deg0"])
    assert dens.pureH == {
        (("H", -1), ("lap",)): Fraction(1, 3),
        (("H", -2), ("dH", 1), ("dH", 1)): Fraction(-1, 3),
        (("H", -2), ("dH", 2), ("dH", 2)): Fraction(-1, 3),
    }
    assert dens.sandwich_terms == []


def test_pure_density_is_a_total_derivative():
    # the A-independent density equals -(pi/3) d_i (H^-1 d_i H): its
    # integral over the torus vanishes for any smooth positive profile
    dens = total_density()
    m = 64
    xs = np.arange(m) / m
    total = 0.0
    for x1 in xs:
        lam = np.exp(0.4 * np.cos(2 * np.pi * x1)) * np.ones(1)
        d1 = -0.8 * np.pi * np.sin(2 * np.pi * x1) * lam
        lap1 = (
            -1.6 * np.pi**2 * np.cos(2 * np.pi * x1) * lam
            + (0.8 * np.pi * np.sin(2 * np.pi * x1)) ** 2 * lam
        )
        val = dens.evaluate(lam, grad_lam=[d1, [0.0]], lap_lam=lap1)
        total += np.trace(val).real / m
    assert abs(total) < 1e-10


def test_sandwich_grammar_accepts_parts(b2_parts):
    for kind in ("linA", "linDA", "quadA"):
        out = integrate_sandwich(b2_parts[kind], kind)
        assert out.pureH == {}
        assert out.sandwich_terms
    with pytest.raises(SandwichResidueError):
        integrate_sandwich(b2_parts["linA"], "quadA")


def _random_env(rng, n):
    lam = rng.uniform(0.5, 2.0, size=n)
    grad = rng.normal(size=(2, n))
    lap = rng.normal(size=n)
    A = {}
    dA = {}
    for i in (1, 2):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A[i] = (M + M.conj().T) / 2
        for j in (1, 2):
            W = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            dA[(i, j)] = (W + W.conj().T) / 2
    return lam, grad, lap, A, dA


def _env_internal(lam, grad, lap, A, dA):
    # the symbol generators use the self-adjoint derivative d = -i d/dx
    return NumericEnv(
        lam,
        dH={i: -1j * grad[i - 1] for i in (1, 2)},
        lap=-lap,
        A=A,
        dA={k: -1j * v for k, v in dA.items()},
    )


@pytest.mark.parametrize("n", [2, 3])
def test_closed_forms_match_quadrature_oracle(b2_parts, rng, n):
    # entrywise spectral-function densities against direct numerical
    # xi-integration of the corresponding traced symbol parts
    for trial in range(10):
        lam, grad, lap, A, dA = _random_env(rng, n)
        env = _env_internal(lam, grad, lap, A, dA)
        for kind in ("linA", "linDA", "quadA"):
            dens = integrate_sandwich(b2_parts[kind], kind)
            closed = dens.evaluate(lam, grad_lam=grad, lap_lam=lap, A=A, grad_A=dA)
            quad = xi_quadrature(b2_parts[kind], env)
            scale = max(np.abs(quad).max(), 1.0)
            assert np.abs(closed - quad).max() <= 1e-8 * scale, (kind, trial)


def test_pure_part_matches_quadrature(b2_parts, rng):
    lam, grad, lap, A, dA = _random_env(rng, 3)
    env = _env_internal(lam, grad, lap, A, dA)
    dens = integrate_pureH(b2_parts["deg0"])
    closed = dens.evaluate(lam, grad_lam=grad, lap_lam=lap)
    quad = xi_quadrature(b2_parts["deg0"], env)
    assert np.abs(closed - quad).max() <= 1e-8 * max(np.abs(quad).max(), 1.0)


def test_trace_cancellations(rng):
    dens = total_density()
    lin = CurvatureDensity({}, [t for t in dens.sandwich_terms if t.slot == "A"])
    div = CurvatureDensity({}, [t for t in dens.sandwich_terms if t.slot == "divA"])
    quad = CurvatureDensity({}, [t for t in dens.sandwich_terms if t.slot == "AA"])
    for trial in range(100):
        n = 2 + trial % 2
        lam, grad, lap, A, dA = _random_env(rng, n)
        for part in (lin, div, quad):
            val = part.evaluate(lam, grad_lam=grad, lap_lam=lap, A=A, grad_A=dA)
            assert abs(np.trace(val)) <= 1e-10


def test_density_serialization_round_trip():
    import json

    dens = total_density()
    payload = json.loads(dens.to_json())
    assert len(payload["pureH"]) == 3
    kinds = sorted(t["slot"] for t in payload["sandwich"])
    assert kinds == ["A", "A", "AA", "divA"]
