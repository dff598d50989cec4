"""Integration of the traced parametrix symbol over the xi-plane.

The order -2 parametrix term b2, after taking the normalized Clifford
trace and averaging over the xi-angle, is a sum of diagonal "pure H"
terms and noncommutative sandwiches b0^p X b0^q with H-powers attached.
Integrating (xi^2)^k b0^m radially is an exact Beta-function evaluation;
the sandwiches integrate, entry by entry in the eigenbasis of H, to the
spectral multipliers G, F, Q of :mod:`mcdirac.specfun`.

Derivative conventions: the symbol calculus uses the self-adjoint
derivative d = -i d/dx, so the generators dH, lap, dA denote -i dH/dx,
-(d/dx)^2 H and -i dA/dx.  The evaluation API accepts ordinary partial
derivatives and converts internally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .specfun import DeltaAction, apply_spectral, get_function
from .symcalc import SymbolPoly, build_a_symbols, build_b_symbols
from .symcalc.evalx import NumericEnv, eval_numeric

__all__ = [
    "DivergenceError",
    "SandwichResidueError",
    "SandwichTerm",
    "CurvatureDensity",
    "radial_integral",
    "angular_average",
    "normalized_trace",
    "display_form",
    "build_b2_parts",
    "integrate_pureH",
    "integrate_sandwich",
    "total_density",
    "xi_quadrature",
]


class DivergenceError(ValueError):
    """Raised when a radial integral does not converge."""


class SandwichResidueError(ValueError):
    """Raised when a traced b2 term does not fit the sandwich grammar."""


def beta_int(a: int, b: int) -> Fraction:
    """Euler Beta function on positive integers, exactly."""
    if a < 1 or b < 1:
        raise ValueError("beta_int requires positive integer arguments")
    return Fraction(factorial(a - 1) * factorial(b - 1), factorial(a + b - 1))


def radial_integral(k: int, m: int, a_sq: Fraction = Fraction(1)) -> Fraction:
    """Exact value of the radial integral
    int_0^infty r^{2k+1} (1 + a^2 r^2)^{-m} dr = B(k+1, m-k-1) / (2 a^{2(k+1)}).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if m <= k + 1:
        raise DivergenceError(f"integral diverges for k={k}, m={m} (needs m > k+1)")
    a_sq = Fraction(a_sq)
    return beta_int(k + 1, m - k - 1) / (2 * a_sq ** (k + 1))


def angular_average(poly: SymbolPoly) -> SymbolPoly:
    """Average over the xi-angle at fixed xi^2.

    Odd monomials drop; xi_1^{2m} averages to (2m choose m)/4^m (xi^2)^m.
    (Terms carrying a single xi_2 power are odd in xi_2 and drop too.)
    """
    out = SymbolPoly()
    for (cliff, (e1, e2, q), word), c in poly.terms.items():
        if e2 == 1 or e1 % 2 == 1:
            continue
        m = e1 // 2
        out._add_term(c * Fraction(comb(2 * m, m), 4**m), cliff, (0, 0, q + m), word)
    return out


def normalized_trace(poly: SymbolPoly) -> SymbolPoly:
    """Clifford trace normalized so the identity traces to 1."""
    return poly.clifford_trace().scale(Fraction(1, 2))


def display_form(part: SymbolPoly) -> SymbolPoly:
    """Normalized trace followed by angular averaging: the form in which
    the order -2 symbol is listed term by term."""
    return angular_average(normalized_trace(part))


def build_b2_parts(include_A: bool = True):
    """Traced, angularly averaged b2 split by A-degree."""
    a_syms = build_a_symbols(include_A=include_A)
    _, _, b2 = build_b_symbols(*a_syms)
    return {k: display_form(v) for k, v in b2.split_by_A_degree().items()}


# ---------------------------------------------------------------------------
# Curvature density container


@dataclass(frozen=True)
class SandwichTerm:
    """One term coeff * pi * H^alpha [dH] fn(Delta)(slot) [dH] H^beta.

    slot: 'A' (summed over i, with the matching dH_i factor given by
    `outer`), 'divA' (delta_i A_i), or 'AA' (A_i . A_i, summed over i,
    two-slot function).
    """

    coeff: Fraction
    alpha: int
    fn: str
    slot: str
    beta: int
    outer: str | None = None  # None | 'dH_left' | 'dH_right'


@dataclass
class CurvatureDensity:
    """Exact pure-H expression plus spectral-function sandwich terms.

    pureH maps a generator word (as in SymbolPoly) to its rational
    coefficient; the stored value multiplies pi.
    """

    pureH: dict = field(default_factory=dict)
    sandwich_terms: list = field(default_factory=list)

    def __add__(self, other: "CurvatureDensity") -> "CurvatureDensity":
        merged = dict(self.pureH)
        for w, c in other.pureH.items():
            merged[w] = merged.get(w, Fraction(0)) + c
        return CurvatureDensity(
            {w: c for w, c in merged.items() if c},
            self.sandwich_terms + other.sandwich_terms,
        )

    # -- evaluation --------------------------------------------------------

    def evaluate(self, lam, grad_lam=None, lap_lam=None, A=None, grad_A=None):
        """Evaluate the density at a point, as an n x n matrix.

        lam: positive eigenvalues of H (diagonal). grad_lam: (2, n) ordinary
        partial derivatives of lam; lap_lam: (n,) ordinary Laplacian of lam;
        A: {1: n x n, 2: n x n} Hermitian matrices; grad_A: {(i, j): d A_i / d x_j}.
        """
        lam = np.asarray(lam, dtype=float)
        n = len(lam)
        grad_lam = np.zeros((2, n)) if grad_lam is None else np.asarray(grad_lam)
        lap_lam = np.zeros(n) if lap_lam is None else np.asarray(lap_lam)
        # internal self-adjoint derivative convention
        dH = {1: -1j * grad_lam[0], 2: -1j * grad_lam[1]}
        lap = -lap_lam
        out = np.zeros((n, n), dtype=complex)
        for word, c in self.pureH.items():
            diag = np.full(n, float(c) * math.pi, dtype=complex)
            for g in word:
                if g[0] == "H":
                    diag = diag * lam ** g[1]
                elif g[0] == "dH":
                    diag = diag * dH[g[1]]
                elif g[0] == "lap":
                    diag = diag * lap
                else:
                    raise SandwichResidueError(f"unexpected pure-H generator {g}")
            out += np.diag(diag)
        if not self.sandwich_terms:
            return out
        act = DeltaAction(tuple(lam))
        A = A or {}
        grad_A = grad_A or {}
        zero = np.zeros((n, n), dtype=complex)
        Amats = {i: np.asarray(A.get(i, zero), dtype=complex) for i in (1, 2)}
        divA = -1j * (
            np.asarray(grad_A.get((1, 1), zero), dtype=complex)
            + np.asarray(grad_A.get((2, 2), zero), dtype=complex)
        )
        for term in self.sandwich_terms:
            fn = get_function(term.fn)
            pref = float(term.coeff) * math.pi
            left = np.diag(lam ** term.alpha).astype(complex)
            right = np.diag(lam ** term.beta).astype(complex)
            if term.slot == "divA":
                out += pref * left @ apply_spectral(fn, act, divA) @ right
                continue
            for i in (1, 2):
                if term.slot == "A":
                    core = apply_spectral(fn, act, Amats[i])
                elif term.slot == "AA":
                    core = apply_spectral(fn, act, Amats[i], Amats[i])
                else:
                    raise SandwichResidueError(f"unknown slot {term.slot!r}")
                piece = left @ core @ right
                if term.outer == "dH_right":
                    piece = left @ core @ np.diag(dH[i]) @ right
                elif term.outer == "dH_left":
                    piece = left @ np.diag(dH[i]) @ core @ right
                elif term.outer is not None:
                    raise SandwichResidueError(f"unknown outer {term.outer!r}")
                out += pref * piece
        return out

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        pure = [
            {"coeff_pi": str(c), "word": ["%s%s" % (g[0], list(g[1:])) for g in w]}
            for w, c in sorted(self.pureH.items())
        ]
        sand = [
            {
                "coeff_pi": str(t.coeff),
                "alpha": t.alpha,
                "fn": t.fn,
                "slot": t.slot,
                "beta": t.beta,
                "outer": t.outer,
            }
            for t in self.sandwich_terms
        ]
        return json.dumps({"pureH": pure, "sandwich": sand}, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Integration of the traced, averaged parts


def _split_word(word):
    """Split a commuting word into (b0 power, H power, extra diagonal gens)."""
    p = 0
    hpow = 0
    extra = []
    for g in word:
        if g[0] == "b0":
            p += g[1]
        elif g[0] == "H":
            hpow += g[1]
        else:
            extra.append(g)
    return p, hpow, tuple(extra)


def integrate_pureH(traced_avg: SymbolPoly) -> CurvatureDensity:
    """Exact xi-plane integral of the A-independent traced b2.

    Each term c * b0^p H^m W (xi^2)^k integrates to
    pi * c * B(k+1, p-k-1) * H^{m-4(k+1)} W.
    """
    pure = {}
    for (cliff, (e1, e2, k), word), c in traced_avg.terms.items():
        if cliff != 0 or e1 or e2:
            raise SandwichResidueError("input must be traced and angularly averaged")
        p, hpow, extra = _split_word(word)
        for g in extra:
            if g[0] not in ("dH", "lap", "ddH"):
                raise SandwichResidueError(f"unexpected generator {g} in pure-H part")
        if p <= k + 1:
            raise DivergenceError(f"non-integrable term b0^{p} (xi^2)^{k}")
        if c.im:
            raise SandwichResidueError("pure-H coefficient is not real")
        # 2*pi from the angular measure times B/2 from the radial integral
        val = c.re * beta_int(k + 1, p - k - 1)
        new_h = hpow - 4 * (k + 1)
        key = tuple(sorted(extra)) + ((("H", new_h),) if new_h else ())
        key = tuple(sorted(key))
        pure[key] = pure.get(key, Fraction(0)) + val
    return CurvatureDensity({w: c for w, c in pure.items() if c}, [])


_SANDWICH_FORMS = {
    "linA": [
        SandwichTerm(Fraction(1), -1, "G", "A", 0, outer="dH_right"),
        SandwichTerm(Fraction(-1), -2, "G", "A", 1, outer="dH_left"),
    ],
    "linDA": [SandwichTerm(Fraction(1), -1, "Fdiv", "divA", 1)],
    "quadA": [SandwichTerm(Fraction(-1), -1, "Q", "AA", 1)],
}

_EXPECTED_NONCOMM = {
    "linA": {("A", "dH"), ("dH", "A")},
    "linDA": {("dA",)},
    "quadA": {("A", "A")},
}


def integrate_sandwich(part: SymbolPoly, kind: str) -> CurvatureDensity:
    """Spectral-function form of the xi-integral of one A-carrying part.

    The term grammar is validated (diagonal b0/H factors around the
    expected noncommutative slots); the multiplier functions themselves
    are the closed forms pinned against the entrywise quadrature oracle
    (see xi_quadrature and the oracle tests).
    """
    if kind not in _SANDWICH_FORMS:
        raise KeyError(f"unknown sandwich kind {kind!r}")
    expected = _EXPECTED_NONCOMM[kind]
    for (cliff, (e1, e2, k), word), c in part.terms.items():
        if cliff != 0 or e1 or e2:
            raise SandwichResidueError("input must be traced and angularly averaged")
        pattern = tuple(g[0] for g in word if g[0] in ("A", "dA", "dH"))
        if pattern not in expected:
            raise SandwichResidueError(
                f"term pattern {pattern} does not fit the {kind} sandwich grammar"
            )
        total_b0 = sum(g[1] for g in word if g[0] == "b0")
        if total_b0 <= k + 1:
            raise DivergenceError(f"non-integrable term b0^{total_b0} (xi^2)^{k}")
        if kind == "linDA":
            da = [g for g in word if g[0] == "dA"]
            if any(g[1] != g[2] for g in da):
                raise SandwichResidueError("off-diagonal derivative survives in linDA")
    return CurvatureDensity({}, list(_SANDWICH_FORMS[kind]))


def total_density() -> CurvatureDensity:
    """The full order -2 density: pure-H part plus all A-sandwiches."""
    parts = build_b2_parts(include_A=True)
    dens = integrate_pureH(parts["deg0"])
    for kind in ("linA", "linDA", "quadA"):
        dens = dens + integrate_sandwich(parts[kind], kind)
    return dens


# ---------------------------------------------------------------------------
# Quadrature oracle


def xi_quadrature(part: SymbolPoly, env: NumericEnv, nodes: int = 240) -> np.ndarray:
    """Direct numerical xi-plane integral of a traced, averaged symbol.

    Uses the substitution r = t/(1-t) with Gauss-Legendre nodes; serves
    as the independent oracle for the spectral-function closed forms.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    out = np.zeros((env.n, env.n), dtype=complex)
    for ti, wi in zip(t, wt):
        r = ti / (1.0 - ti)
        jac = 1.0 / (1.0 - ti) ** 2
        out += wi * 2.0 * math.pi * r * jac * eval_numeric(part, env, r * r)
    return out
