"""Exact and floating-point evaluation of symbol polynomials.

Exact evaluation substitutes random rational data for the formal
generators (respecting that H and its derivatives are diagonal and that
b0 = (1 + H^4 xi^2)^{-1}) and is used to certify that a symbolic
expression vanishes identically: a nonzero polynomial identity cannot
vanish at several independent random rational points.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..rational import GaussRat
from .algebra import SymbolPoly

# 2x2 Pauli matrices with exact Gaussian-rational entries
_PAULI = {
    0: ((GaussRat(1), GaussRat(0)), (GaussRat(0), GaussRat(1))),
    1: ((GaussRat(0), GaussRat(1)), (GaussRat(1), GaussRat(0))),
    2: ((GaussRat(0), GaussRat(0, -1)), (GaussRat(0, 1), GaussRat(0))),
    3: ((GaussRat(1), GaussRat(0)), (GaussRat(0), GaussRat(-1))),
}


def _mat_mul(a, b, n):
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(n)), GaussRat(0)) for j in range(n))
        for i in range(n)
    )


def _diag_mat(vals):
    n = len(vals)
    return tuple(
        tuple(GaussRat(vals[i]) if i == j else GaussRat(0) for j in range(n))
        for i in range(n)
    )


@dataclass
class ExactEnv:
    """Random rational substitution point for the formal generators."""

    n: int
    H: list  # positive Fractions, diagonal of H
    dH: dict  # i -> list of Fractions
    ddH: dict  # (1,1)/(1,2) -> list of Fractions
    lap: list
    A: dict  # i -> n x n GaussRat matrix
    dA: dict  # (i,j) -> n x n GaussRat matrix
    xi1: Fraction
    xi2: Fraction
    _cache: dict = field(default_factory=dict)

    @property
    def xi_sq(self) -> Fraction:
        return self.xi1 * self.xi1 + self.xi2 * self.xi2

    def b0_diag(self):
        return [Fraction(1) / (1 + h**4 * self.xi_sq) for h in self.H]

    def generator_matrix(self, g):
        if g in self._cache:
            return self._cache[g]
        kind = g[0]
        n = self.n
        if kind == "H":
            m = _diag_mat([h ** g[1] for h in self.H])
        elif kind == "dH":
            m = _diag_mat(self.dH[g[1]])
        elif kind == "ddH":
            m = _diag_mat(self.ddH[(g[1], g[2])])
        elif kind == "lap":
            m = _diag_mat(self.lap)
        elif kind == "b0":
            m = _diag_mat([b ** g[1] for b in self.b0_diag()])
        elif kind == "A":
            m = self.A[g[1]]
        elif kind == "dA":
            m = self.dA[(g[1], g[2])]
        else:
            raise ValueError(f"unknown generator {g}")
        self._cache[g] = m
        return m


def _rand_frac(rng, lo=-6, hi=6, den=3):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def _rand_pos_frac(rng):
    return Fraction(rng.randint(1, 5), rng.randint(1, 3))


def _rand_matrix(rng, n):
    return tuple(
        tuple(GaussRat(_rand_frac(rng), _rand_frac(rng)) for _ in range(n))
        for _ in range(n)
    )


def random_env(n: int = 2, seed: int | None = None) -> ExactEnv:
    rng = random.Random(seed)
    return ExactEnv(
        n=n,
        H=[_rand_pos_frac(rng) for _ in range(n)],
        dH={i: [_rand_frac(rng) for _ in range(n)] for i in (1, 2)},
        ddH={k: [_rand_frac(rng) for _ in range(n)] for k in ((1, 1), (1, 2))},
        lap=[_rand_frac(rng) for _ in range(n)],
        A={i: _rand_matrix(rng, n) for i in (1, 2)},
        dA={(i, j): _rand_matrix(rng, n) for i in (1, 2) for j in (1, 2)},
        xi1=_rand_frac(rng),
        xi2=_rand_frac(rng),
    )


def eval_exact(poly: SymbolPoly, env: ExactEnv):
    """Evaluate to a (2, 2, n, n) nested tuple: Pauli block (a,b), matrix (i,j)."""
    n = env.n
    acc = [[[[GaussRat(0) for _ in range(n)] for _ in range(n)] for _ in range(2)] for _ in range(2)]
    ident = _diag_mat([Fraction(1)] * n)
    for (cliff, (e1, e2, q), word), c in poly.terms.items():
        scal = c * (env.xi1**e1) * (env.xi2**e2) * (env.xi_sq**q)
        mat = ident
        for g in word:
            mat = _mat_mul(mat, env.generator_matrix(g), n)
        pau = _PAULI[cliff]
        for a in range(2):
            for b in range(2):
                if not pau[a][b]:
                    continue
                f = scal * pau[a][b]
                for i in range(n):
                    for j in range(n):
                        if mat[i][j]:
                            acc[a][b][i][j] = acc[a][b][i][j] + f * mat[i][j]
    return acc


def poly_is_zero_exact(poly: SymbolPoly, trials: int = 3, n: int = 2, seed: int = 0) -> bool:
    """Certify that `poly` vanishes identically, by exact evaluation at
    several independent random rational points."""
    if poly.is_zero():
        return True
    for t in range(trials):
        env = random_env(n=n, seed=seed + 1000 * t)
        val = eval_exact(poly, env)
        for a in range(2):
            for b in range(2):
                for i in range(n):
                    for j in range(n):
                        if val[a][b][i][j]:
                            return False
    return True


def polys_equal_exact(p: SymbolPoly, q: SymbolPoly, trials: int = 3, n: int = 2, seed: int = 0) -> bool:
    return poly_is_zero_exact(p - q, trials=trials, n=n, seed=seed)


# ---------------------------------------------------------------------------
# Floating-point evaluation (for the xi-quadrature oracle)


class NumericEnv:
    """Numeric substitution: diagonal positive `lam` for H, arbitrary
    complex matrices for the A-type generators, a scalar value for xi^2.

    Only traced, angularly averaged symbols (no loose xi_1/xi_2 powers,
    identity Clifford factor) can be evaluated.
    """

    def __init__(self, lam, dH=None, ddH=None, lap=None, A=None, dA=None):
        self.lam = np.asarray(lam, dtype=float)
        n = len(self.lam)
        self.n = n
        zeros = np.zeros(n)
        zmat = np.zeros((n, n), dtype=complex)
        self.dH = dH or {1: zeros, 2: zeros}
        self.ddH = ddH or {(1, 1): zeros, (1, 2): zeros}
        self.lap = lap if lap is not None else zeros
        self.A = A or {1: zmat, 2: zmat}
        self.dA = dA or {(i, j): zmat for i in (1, 2) for j in (1, 2)}

    def generator_value(self, g, xi_sq: float) -> np.ndarray:
        kind = g[0]
        if kind == "H":
            return np.diag(self.lam ** g[1]).astype(complex)
        if kind == "dH":
            return np.diag(np.asarray(self.dH[g[1]], dtype=complex))
        if kind == "ddH":
            return np.diag(np.asarray(self.ddH[(g[1], g[2])], dtype=complex))
        if kind == "lap":
            return np.diag(np.asarray(self.lap, dtype=complex))
        if kind == "b0":
            return np.diag((1.0 / (1.0 + self.lam**4 * xi_sq)) ** g[1]).astype(complex)
        if kind == "A":
            return np.asarray(self.A[g[1]], dtype=complex)
        if kind == "dA":
            return np.asarray(self.dA[(g[1], g[2])], dtype=complex)
        raise ValueError(f"unknown generator {g}")


def eval_numeric(poly: SymbolPoly, env: NumericEnv, xi_sq: float) -> np.ndarray:
    """Evaluate a traced, averaged symbol at a given value of xi^2."""
    n = env.n
    out = np.zeros((n, n), dtype=complex)
    for (cliff, (e1, e2, q), word), c in poly.terms.items():
        if cliff != 0 or e1 or e2:
            raise ValueError("eval_numeric requires a traced, averaged symbol")
        mat = np.eye(n, dtype=complex)
        for g in word:
            mat = mat @ env.generator_value(g, xi_sq)
        out += c.to_complex() * (xi_sq**q) * mat
    return out
