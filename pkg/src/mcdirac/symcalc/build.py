"""Symbols of the squared rescaled Dirac operator and its parametrix."""

from __future__ import annotations

from fractions import Fraction

from ..rational import GaussRat
from .algebra import SymbolPoly, compose

__all__ = ["build_a_symbols", "build_b_symbols", "parametrix_defect"]


def _dirac_factor(include_A: bool) -> SymbolPoly:
    """Symbol of D + A with A identified with its Clifford image."""
    p = SymbolPoly()
    p._add_term(GaussRat(1), 1, (1, 0, 0), ())  # sigma^1 xi_1
    p._add_term(GaussRat(1), 2, (0, 1, 0), ())  # sigma^2 xi_2
    if include_A:
        p._add_term(GaussRat(1), 1, (0, 0, 0), (("A", 1),))
        p._add_term(GaussRat(1), 2, (0, 0, 0), (("A", 2),))
    return p


def build_a_symbols(include_A: bool = True):
    """Graded symbols (a2, a1, a0) of H (D+A) H^2 (D+A) H.

    The full symbol is obtained by exact composition of the five factors;
    the pieces are its xi-degree 2, 1 and 0 parts.
    """
    h1 = SymbolPoly.term(1, word=(("H", 1),))
    h2 = SymbolPoly.term(1, word=(("H", 2),))
    da = _dirac_factor(include_A)
    full = compose(h1, compose(da, compose(h2, compose(da, h1))))
    return (
        full.xi_degree_part(2),
        full.xi_degree_part(1),
        full.xi_degree_part(0),
    )


def build_b_symbols(a2: SymbolPoly, a1: SymbolPoly, a0: SymbolPoly):
    """Parametrix terms from the displayed recursion.

    b0 = (a2+1)^{-1} is kept opaque (generator b0 with the rewrite
    delta(b0) = -b0^2 delta(a2)); b1 and b2 follow the recursion with the
    half Hessian term included in b2.
    """
    b0 = SymbolPoly.term(1, word=(("b0", 1),))

    def dxi_sum(f, g):
        # sum_k dxi_k(f) * dx_k(g)
        return f.dxi(1) * g.dx(1) + f.dxi(2) * g.dx(2)

    b1 = -((b0 * a1 + dxi_sum(b0, a2)) * b0)

    hess = SymbolPoly.zero()
    for k in (1, 2):
        for j in (1, 2):
            hess = hess + b0.dxi(k).dxi(j) * a2.dx(k).dx(j)
    b2 = -(
        (
            b1 * a1
            + b0 * a0
            + dxi_sum(b0, a1)
            + dxi_sum(b1, a2)
            + hess.scale(Fraction(1, 2))
        )
        * b0
    )
    return b0, b1, b2


def parametrix_defect(a_syms, b_syms, side: str = "left") -> dict[int, SymbolPoly]:
    """Graded defects of the parametrix identity through order -2.

    Returns {0: D0, -1: D1, -2: D2} where D_j collects the order -j piece
    of compose(b0+b1+b2, a2+1+a1+a0) - 1 (side="left") or of the
    composition taken in the opposite order (side="right"), with b_i
    graded at order -2-i and a2+1 treated as the single leading block.
    Each D_j is a finite exact polynomial; the identity holds iff all
    three vanish identically (b0 being (1+H^4 xi^2)^{-1}).
    """
    a2, a1, a0 = a_syms
    b0, b1, b2 = b_syms
    a2p = a2 + SymbolPoly.one()

    def dsum(f, g):
        return f.dxi(1) * g.dx(1) + f.dxi(2) * g.dx(2)

    def ddsum(f, g):
        acc = SymbolPoly.zero()
        for k in (1, 2):
            for j in (1, 2):
                acc = acc + f.dxi(k).dxi(j) * g.dx(k).dx(j)
        return acc.scale(Fraction(1, 2))

    if side == "left":
        d0 = b0 * a2p - SymbolPoly.one()
        d1 = b1 * a2p + b0 * a1 + dsum(b0, a2)
        d2 = (
            b2 * a2p
            + b1 * a1
            + b0 * a0
            + dsum(b0, a1)
            + dsum(b1, a2)
            + ddsum(b0, a2)
        )
    elif side == "right":
        d0 = a2p * b0 - SymbolPoly.one()
        d1 = a2p * b1 + a1 * b0 + dsum(a2, b0)
        d2 = (
            a2p * b2
            + a1 * b1
            + a0 * b0
            + dsum(a2, b1)
            + dsum(a1, b0)
            + ddsum(a2, b0)
        )
    else:
        raise ValueError("side must be 'left' or 'right'")
    return {0: d0, -1: d1, -2: d2}
