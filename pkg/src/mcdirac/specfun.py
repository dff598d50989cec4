"""Spectral functions G, F, Q and their functional-calculus action.

The three functions arise when the xi-plane integrals of the parametrix
densities are rewritten through the modular operator Delta(x) = H^{-4} x H^4:
each noncommutative sandwich b0^p X b0^q turns, in the eigenbasis of H, into
an entrywise multiplier that depends only on eigenvalue ratios.  G governs
the terms linear in A, F the terms linear in delta(A), and the two-variable
Q the terms quadratic in A.

Closed forms are used away from the removable singularities (s = 1, t = 1,
s = t); inside a small radius the evaluation switches to exact Taylor data
so both branches agree to well below 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "SpectralFunction",
    "DeltaAction",
    "G_FUNCTION",
    "F_FUNCTION",
    "FDIV_FUNCTION",
    "Q_FUNCTION",
    "eval_G",
    "eval_F",
    "eval_Fdiv",
    "eval_Q",
    "apply_spectral",
]

SERIES_RADIUS = 1e-3


@dataclass(frozen=True)
class SpectralFunction:
    """Descriptor of one spectral function: name, arity, where its closed
    form degenerates, and the radius for switching to the series branch."""

    name: str
    arity: int
    singular_set: frozenset
    series_radius: float = SERIES_RADIUS
    evaluator: object = field(default=None, repr=False, compare=False)

    def __call__(self, *args):
        return self.evaluator(*args)


def _check_positive(name, *vals):
    for v in vals:
        if not v > 0:
            raise ValueError(f"{name} requires positive arguments, got {v}")


# Taylor coefficients about s = 1 (exact rationals, degree 6)
_G_SERIES = [
    Fraction(2, 3),
    Fraction(-1, 6),
    Fraction(7, 120),
    Fraction(-1, 48),
    Fraction(13, 2688),
    Fraction(5, 1792),
    Fraction(-2141, 322560),
]
_F_SERIES = [
    Fraction(0),
    Fraction(1, 6),
    Fraction(-1, 12),
    Fraction(11, 240),
    Fraction(-13, 480),
    Fraction(449, 26880),
    Fraction(-113, 10752),
]


def _poly_eval(coeffs, u):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * u + float(c)
    return acc


def _log_defect(s: float) -> float:
    """(s+1) ln s - 2(s-1), computed without cancellation.

    Equals 2(s+1)(atanh(z) - z) with z = (s-1)/(s+1), and atanh(z) - z
    has the wholly positive series z^3 (1/3 + z^2/5 + ...).
    """
    u = s - 1.0
    z = u / (s + 1.0)
    if abs(z) < 0.25:
        return 2.0 * (s + 1.0) * z**3 * _atanh_tail(z * z)
    return (s + 1.0) * math.log(s) - 2.0 * u


def _atanh_tail(z2: float) -> float:
    # sum_{k>=0} z2^k / (2k+3)
    acc = 0.0
    for k in range(24, -1, -1):
        acc = acc * z2 + 1.0 / (2 * k + 3)
    return acc


def eval_G(s: float) -> float:
    """G(s) = 2 (1+sqrt(s)) sqrt(s) / (s-1)^3 * ((s+1) ln s - 2(s-1)).

    Continuous extension G(1) = 2/3.  The density linear in A is
    pi H^{-1} G(Delta)(A_i) delta_i(H) minus its mirrored partner; the
    factor 2 of the xi-integral is folded into G so that G(1) = 2/3.
    """
    _check_positive("eval_G", s)
    u = s - 1.0
    if abs(u) < SERIES_RADIUS:
        return _poly_eval(_G_SERIES, u)
    rs = math.sqrt(s)
    return 2.0 * (1.0 + rs) * rs / u**3 * _log_defect(s)


def eval_F(s: float) -> float:
    """F(s) = sqrt(s) ((s+1) ln s + 2(1-s)) / (s-1)^2.

    Antisymmetric under inversion: F(1/s) = -F(s), and F(s) = Q(s, 1).
    """
    _check_positive("eval_F", s)
    u = s - 1.0
    if abs(u) < SERIES_RADIUS:
        return _poly_eval(_F_SERIES, u)
    return math.sqrt(s) * _log_defect(s) / u**2


def eval_Fdiv(s: float) -> float:
    """The divergence-term multiplier:
    -(1+sqrt(s)) sqrt(s) ln(s)/(s-1)^2 + (sqrt(s)+1)/(s-1); value 0 at s=1.

    This is the function applied to delta_i(A_i); it vanishes at 1, which is
    what makes the trace of that density cancel.
    """
    _check_positive("eval_Fdiv", s)
    u = s - 1.0
    rs = math.sqrt(s)
    # (1+sqrt(s)) * (1/(s-1) - sqrt(s) ln s/(s-1)^2) = (1+sqrt(s)) * d(s)
    # d(s) = (u - sqrt(s) ln s)/u^2 has a removable-cancellation-free series
    if abs(u) < SERIES_RADIUS:
        # d(1+u) = -(1/2)? expand: u - sqrt(1+u)ln(1+u)
        #        = u - (1+u/2-u^2/8+u^3/16-...)(u-u^2/2+u^3/3-u^4/4+...)
        d = _poly_eval(
            [Fraction(0), Fraction(1, 24), Fraction(-1, 24), Fraction(71, 1920), Fraction(-31, 960)],
            u,
        )
        return (1.0 + rs) * d
    return (1.0 + rs) * (u - rs * math.log(s)) / u**2


# --- phi(x) = ln x / (x-1), its divided differences and odd derivatives ----


def _phi(x: float) -> float:
    u = x - 1.0
    if u == 0.0:
        return 1.0
    return math.log1p(u) / u


def _phi_deriv(m: float, order: int) -> float:
    """phi^{(order)}(m) for order in {1, 3, 5}, stable near m = 1."""
    w = m - 1.0
    if abs(w) < 0.25:
        # phi(1+w) = sum (-1)^k w^k/(k+1); differentiate termwise
        acc = 0.0
        for k in range(order, order + 40):
            c = (-1.0) ** k / (k + 1.0)
            fall = 1.0
            for j in range(order):
                fall *= k - j
            acc += c * fall * w ** (k - order)
        return acc
    L = math.log(m)
    if order == 1:
        return (-m * L + m - 1.0) / (m * w**2)
    if order == 3:
        return (-6 * m**3 * L + 11 * m**3 - 18 * m**2 + 9 * m - 2.0) / (m**3 * w**4)
    if order == 5:
        return (
            2.0
            * (-60 * m**5 * L + 137 * m**5 - 300 * m**4 + 300 * m**3 - 200 * m**2 + 75 * m - 12.0)
            / (m**5 * w**6)
        )
    raise ValueError(f"unsupported derivative order {order}")


def _dd_phi(s: float, t: float) -> float:
    """Divided difference (phi(s) - phi(t))/(s - t), continuous extension
    included; branches keep every regime cancellation-free."""
    u = s - 1.0
    v = t - 1.0
    d = s - t
    r = SERIES_RADIUS
    if abs(u) < r and abs(v) < r:
        # divided difference of the series of phi: complete homogeneous
        # symmetric polynomials h_{k-1}(u, v)
        acc = 0.0
        for k in range(1, 8):
            h = sum(u**i * v ** (k - 1 - i) for i in range(k))
            acc += (-1.0) ** k / (k + 1.0) * h
        return acc
    if abs(d) < r * min(1.0, s, t):
        m = 0.5 * (s + t)
        return (
            _phi_deriv(m, 1)
            + _phi_deriv(m, 3) * d**2 / 24.0
            + _phi_deriv(m, 5) * d**4 / 1920.0
        )
    return (_phi(s) - _phi(t)) / d


def eval_Q(s: float, t: float) -> float:
    """Two-variable multiplier for the terms quadratic in A.

    Q(s,t) = sqrt(s)(s+sqrt(t)) ln s / ((s-1)(s-t))
           - sqrt(s)sqrt(t)(sqrt(t)+1) ln t / ((t-1)(s-t)),
    continuously extended across s = 1, t = 1 and s = t; Q(s, 1) = F(s)
    and Q(1, 1) = 0.
    """
    _check_positive("eval_Q", s, t)
    rs = math.sqrt(s)
    rt = math.sqrt(t)
    # With psi(x) = (x + sqrt(x)) phi(x), the closed form is equivalent to
    #   Q(s,t) = sqrt(s) ( dd_psi(s,t) - phi(s)/(sqrt(s)+sqrt(t)) ),
    # and dd_psi splits into divided differences free of cancellation:
    #   dd_psi = (s + sqrt(s)) dd_phi(s,t) + phi(t) (1 + 1/(sqrt(s)+sqrt(t)))
    dd_psi = (s + rs) * _dd_phi(s, t) + _phi(t) * (1.0 + 1.0 / (rs + rt))
    return rs * (dd_psi - _phi(s) / (rs + rt))


G_FUNCTION = SpectralFunction("G", 1, frozenset({"s=1"}), SERIES_RADIUS, eval_G)
F_FUNCTION = SpectralFunction("F", 1, frozenset({"s=1"}), SERIES_RADIUS, eval_F)
FDIV_FUNCTION = SpectralFunction("Fdiv", 1, frozenset({"s=1"}), SERIES_RADIUS, eval_Fdiv)
Q_FUNCTION = SpectralFunction(
    "Q", 2, frozenset({"s=1", "t=1", "s=t"}), SERIES_RADIUS, eval_Q
)

_BY_NAME = {f.name: f for f in (G_FUNCTION, F_FUNCTION, FDIV_FUNCTION, Q_FUNCTION)}


def get_function(name: str) -> SpectralFunction:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown spectral function {name!r}; have {sorted(_BY_NAME)}")


@dataclass(frozen=True)
class DeltaAction:
    """Modular action data: Delta(x) = H^{-power} x H^{power} for diagonal
    positive H = diag(lambdas); its eigenvalues on matrix units are the
    ratios s_ij = (lambda_j / lambda_i)^power."""

    lambdas: tuple
    power: int = 4

    def __post_init__(self):
        if any(not l > 0 for l in self.lambdas):
            raise ValueError("DeltaAction requires positive eigenvalues")

    @property
    def n(self) -> int:
        return len(self.lambdas)

    def ratios(self) -> np.ndarray:
        lam = np.asarray(self.lambdas, dtype=float)
        return (lam[None, :] / lam[:, None]) ** self.power


def apply_spectral(fn: SpectralFunction, act: DeltaAction, X, Y=None) -> np.ndarray:
    """Apply fn(Delta) entrywise in the H-eigenbasis.

    Arity 1: out_ij = fn(s_ij) X_ij.
    Arity 2: out_ij = sum_k fn(s_ik, s_ij) X_ik Y_kj, i.e. the first slot
    sees the ratio across the left factor and the second slot the ratio
    across the full product (Y defaults to X).
    """
    X = np.asarray(X, dtype=complex)
    n = act.n
    if X.shape != (n, n):
        raise ValueError(f"matrix shape {X.shape} does not match n={n}")
    S = act.ratios()
    if fn.arity == 1:
        mult = np.vectorize(fn.evaluator)(S)
        return mult * X
    Y = X if Y is None else np.asarray(Y, dtype=complex)
    if Y.shape != (n, n):
        raise ValueError(f"matrix shape {Y.shape} does not match n={n}")
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            acc = 0.0 + 0.0j
            for k in range(n):
                acc += fn.evaluator(S[i, k], S[i, j]) * X[i, k] * Y[k, j]
            out[i, j] = acc
    return out
