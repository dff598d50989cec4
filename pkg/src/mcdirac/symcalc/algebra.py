"""Noncommutative symbol algebra on the flat two-torus.

Terms are monomials  coeff * cliff * xi1^e1 * xi2^e2 * (xi^2)^q * word,
where `word` is an ordered product of matrix-valued generators.  The
generators H^m, delta_i(H), Hess_{ij}(H), Lap(H) and b0^p commute with each
other (H is diagonal and commutes with all of its derivatives; b0 is a
function of H and xi), while A_i and delta_j(A_i) commute with nothing but
scalars.

Canonical form:
  * xi2^2 is eliminated via xi2^2 = xi^2 - xi1^2, so e2 is always 0 or 1;
  * Hess_{22} is eliminated via Hess_{22} = Lap - Hess_{11};
  * inside every maximal commuting run, H powers and b0 powers are merged
    and the generators are sorted by (kind, indices).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator

from ..rational import GaussRat, ONE

# ---------------------------------------------------------------------------
# Generators

# kinds: ('H', m)  ('dH', i)  ('ddH', i, j)  ('lap',)  ('A', i)  ('dA', i, j)
#        ('b0', p)
# ('dA', i, j) denotes delta_j(A_i).

COMMUTING = {"H", "dH", "ddH", "lap", "b0"}
_KIND_RANK = {"b0": 0, "H": 1, "lap": 2, "ddH": 3, "dH": 4, "A": 5, "dA": 6}


def hpow(m: int):
    return ("H", m)


def dH(i: int):
    return ("dH", i)


def ddH(i: int, j: int):
    i, j = min(i, j), max(i, j)
    if (i, j) == (2, 2):
        raise ValueError("Hess_22 is not a canonical generator; expand first")
    return ("ddH", i, j)


LAP = ("lap",)


def gen_A(i: int):
    return ("A", i)


def dA(i: int, j: int):
    return ("dA", i, j)


def b0pow(p: int):
    if p < 1:
        raise ValueError("b0 power must be positive")
    return ("b0", p)


def _gen_sort_key(g):
    return (_KIND_RANK[g[0]],) + tuple(g[1:])


def normalize_word(word) -> tuple | None:
    """Merge and sort commuting runs; return None if a zero factor appears."""
    out = []
    run = []

    def flush():
        if not run:
            return
        hp = 0
        bp = 0
        rest = []
        for g in run:
            if g[0] == "H":
                hp += g[1]
            elif g[0] == "b0":
                bp += g[1]
            else:
                rest.append(g)
        merged = []
        if bp:
            merged.append(("b0", bp))
        if hp:
            merged.append(("H", hp))
        merged.extend(sorted(rest, key=_gen_sort_key))
        out.extend(sorted(merged, key=_gen_sort_key))
        run.clear()

    for g in word:
        if g[0] in COMMUTING:
            run.append(g)
        else:
            flush()
            out.append(g)
    flush()
    return tuple(out)


def word_order(word) -> int:
    """Contribution of b0 factors to the xi-grading (-2 per b0 power)."""
    return -2 * sum(g[1] for g in word if g[0] == "b0")


def word_A_degree(word) -> tuple[int, int]:
    a = sum(1 for g in word if g[0] == "A")
    da = sum(1 for g in word if g[0] == "dA")
    return a, da


# ---------------------------------------------------------------------------
# Pauli algebra: 0=I, 1=s1, 2=s2, 3=s3.  s_i s_j = delta_ij + i eps_ijk s_k.

_EPS = {(1, 2): 3, (2, 3): 1, (3, 1): 2}


def pauli_mul(a: int, b: int) -> tuple[int, GaussRat]:
    """Product of two Pauli basis elements: returns (element, unit phase)."""
    if a == 0:
        return b, ONE
    if b == 0:
        return a, ONE
    if a == b:
        return 0, ONE
    if (a, b) in _EPS:
        return _EPS[(a, b)], GaussRat(0, 1)
    return _EPS[(b, a)], GaussRat(0, -1)


# ---------------------------------------------------------------------------
# Polynomials


class DerivativeRuleError(ValueError):
    """Raised when delta_x hits a generator without a derivative rule."""


class SymbolPoly:
    """Sum of canonical monomials; the workhorse of the symbol calculus.

    Terms are held as a dict mapping (cliff, (e1, e2, q), word) -> GaussRat.
    All mutating helpers are private; public operations return new objects.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls) -> "SymbolPoly":
        return cls()

    @classmethod
    def scalar(cls, c) -> "SymbolPoly":
        p = cls()
        p._add_term(GaussRat.coerce(c), 0, (0, 0, 0), ())
        return p

    @classmethod
    def one(cls) -> "SymbolPoly":
        return cls.scalar(1)

    @classmethod
    def term(cls, coeff, cliff=0, xi=(0, 0, 0), word=()) -> "SymbolPoly":
        p = cls()
        p._add_term(GaussRat.coerce(coeff), cliff, tuple(xi), tuple(word))
        return p

    def _add_term(self, coeff: GaussRat, cliff: int, xi, word):
        if not coeff:
            return
        e1, e2, q = xi
        # eliminate xi2^2 = xi^2 - xi1^2
        if e2 >= 2:
            self._add_term(coeff, cliff, (e1, e2 - 2, q + 1), word)
            self._add_term(-coeff, cliff, (e1 + 2, e2 - 2, q), word)
            return
        w = normalize_word(word)
        key = (cliff, (e1, e2, q), w)
        cur = self.terms.get(key)
        new = coeff if cur is None else cur + coeff
        if new:
            self.terms[key] = new
        elif cur is not None:
            del self.terms[key]

    def _add_poly(self, other: "SymbolPoly", scale: GaussRat | None = None):
        for (cliff, xi, word), c in other.terms.items():
            self._add_term(c if scale is None else c * scale, cliff, xi, word)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "SymbolPoly") -> "SymbolPoly":
        p = SymbolPoly(self.terms)
        p._add_poly(other)
        return p

    def __sub__(self, other: "SymbolPoly") -> "SymbolPoly":
        p = SymbolPoly(self.terms)
        p._add_poly(other, GaussRat(-1))
        return p

    def __neg__(self) -> "SymbolPoly":
        return SymbolPoly({k: -c for k, c in self.terms.items()})

    def scale(self, c) -> "SymbolPoly":
        c = GaussRat.coerce(c)
        if not c:
            return SymbolPoly()
        return SymbolPoly({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: "SymbolPoly") -> "SymbolPoly":
        out = SymbolPoly()
        for (ca, xa, wa), va in self.terms.items():
            for (cb, xb, wb), vb in other.terms.items():
                cliff, phase = pauli_mul(ca, cb)
                xi = (xa[0] + xb[0], xa[1] + xb[1], xa[2] + xb[2])
                out._add_term(va * vb * phase, cliff, xi, wa + wb)
        return out

    def __eq__(self, other):
        return isinstance(other, SymbolPoly) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("SymbolPoly is not hashable")

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator:
        return iter(self.terms.items())

    # -- grading -------------------------------------------------------------

    @staticmethod
    def term_order(key) -> int:
        _, (e1, e2, q), word = key
        return e1 + e2 + 2 * q + word_order(word)

    def max_order(self) -> int | None:
        if not self.terms:
            return None
        return max(self.term_order(k) for k in self.terms)

    def truncate(self, min_order: int) -> "SymbolPoly":
        """Drop all terms of xi-order below min_order."""
        return SymbolPoly(
            {k: c for k, c in self.terms.items() if self.term_order(k) >= min_order}
        )

    def graded_part(self, order: int) -> "SymbolPoly":
        return SymbolPoly(
            {k: c for k, c in self.terms.items() if self.term_order(k) == order}
        )

    def xi_degree_part(self, deg: int) -> "SymbolPoly":
        """Part of given polynomial xi-degree (ignores b0 grading)."""
        return SymbolPoly(
            {
                k: c
                for k, c in self.terms.items()
                if k[1][0] + k[1][1] + 2 * k[1][2] == deg
            }
        )

    def contains_b0(self) -> bool:
        return any(g[0] == "b0" for k in self.terms for g in k[2])

    # -- derivatives ---------------------------------------------------------

    def dxi(self, k: int) -> "SymbolPoly":
        """Partial derivative with respect to xi_k (k in {1, 2})."""
        out = SymbolPoly()
        for (cliff, (e1, e2, q), word), c in self.terms.items():
            ek = e1 if k == 1 else e2
            if ek:
                xi = (e1 - 1, e2, q) if k == 1 else (e1, e2 - 1, q)
                out._add_term(c * ek, cliff, xi, word)
            if q:
                xi = (e1 + 1, e2, q - 1) if k == 1 else (e1, e2 + 1, q - 1)
                out._add_term(c * (2 * q), cliff, xi, word)
            for pos, g in enumerate(word):
                if g[0] != "b0":
                    continue
                p = g[1]
                # d/dxi_k b0^p = -2 p xi_k H^4 b0^(p+1)
                neww = word[:pos] + (("b0", p + 1), ("H", 4)) + word[pos + 1 :]
                xi = (e1 + 1, e2, q) if k == 1 else (e1, e2 + 1, q)
                out._add_term(c * (-2 * p), cliff, xi, neww)
        return out

    def dx(self, j: int) -> "SymbolPoly":
        """Formal spatial derivative delta_j acting on the generators."""
        out = SymbolPoly()
        for (cliff, xi, word), c in self.terms.items():
            for pos, g in enumerate(word):
                for coeff, frag, dq in _gen_dx(g, j):
                    neww = word[:pos] + frag + word[pos + 1 :]
                    nxi = (xi[0], xi[1], xi[2] + dq)
                    out._add_term(c * coeff, cliff, nxi, neww)
        return out

    # -- Clifford trace ------------------------------------------------------

    def clifford_trace(self) -> "SymbolPoly":
        """Trace over the spin (Pauli) factor: tr(1)=2, tr(sigma^k)=0."""
        out = SymbolPoly()
        for (cliff, xi, word), c in self.terms.items():
            if cliff == 0:
                out._add_term(c * 2, 0, xi, word)
        return out

    # -- A-degree split ------------------------------------------------------

    def split_by_A_degree(self) -> dict:
        """Partition into deg0 / linA / linDA / quadA parts.

        The four parts sum to the original polynomial term-for-term; any
        term of an unexpected A-degree raises.
        """
        parts = {
            "deg0": SymbolPoly(),
            "linA": SymbolPoly(),
            "linDA": SymbolPoly(),
            "quadA": SymbolPoly(),
        }
        names = {(0, 0): "deg0", (1, 0): "linA", (0, 1): "linDA", (2, 0): "quadA"}
        for (cliff, xi, word), c in self.terms.items():
            deg = word_A_degree(word)
            if deg not in names:
                raise ValueError(f"unexpected A-degree {deg} in term {word}")
            parts[names[deg]]._add_term(c, cliff, xi, word)
        return parts


def _gen_dx(g, j: int):
    """delta_j of a single generator: list of (coeff, fragment, d(xi^2 power))."""
    kind = g[0]
    if kind == "H":
        m = g[1]
        return [(GaussRat(m), (("H", m - 1), ("dH", j)), 0)]
    if kind == "dH":
        i = g[1]
        lo, hi = min(i, j), max(i, j)
        if (lo, hi) == (2, 2):
            return [(ONE, (("lap",),), 0), (GaussRat(-1), (("ddH", 1, 1),), 0)]
        return [(ONE, (("ddH", lo, hi),), 0)]
    if kind == "A":
        return [(ONE, (("dA", g[1], j),), 0)]
    if kind == "b0":
        p = g[1]
        # delta_j b0^p = -p b0^(p+1) delta_j(a2) = -4 p H^3 dH_j xi^2 b0^(p+1)
        return [(GaussRat(-4 * p), (("b0", p + 1), ("H", 3), ("dH", j)), 1)]
    raise DerivativeRuleError(f"no spatial derivative rule for generator {g}")


# ---------------------------------------------------------------------------
# Composition


def compose(a: SymbolPoly, b: SymbolPoly, cutoff_order: int | None = None) -> SymbolPoly:
    """Symbol composition sum_alpha (1/alpha!) dxi^alpha(a) * dx^alpha(b).

    With cutoff_order given, terms of xi-order below it are discarded and
    the alpha sum is bounded accordingly.  With cutoff_order None both the
    xi-derivatives of `a` must terminate (no b0 factors), giving the exact
    finite composition of differential-operator symbols.
    """
    if a.is_zero() or b.is_zero():
        return SymbolPoly()
    if cutoff_order is None and a.contains_b0():
        raise ValueError("cutoff_order required when the left symbol contains b0")
    if cutoff_order is not None:
        amax = a.max_order()
        bmax = b.max_order()
        alpha_max = amax + bmax - cutoff_order
        if alpha_max < 0:
            return SymbolPoly()
    else:
        alpha_max = None

    out = SymbolPoly()
    a1 = a  # dxi_1^{alpha1}(a)
    alpha1 = 0
    while not a1.is_zero():
        if alpha_max is not None and alpha1 > alpha_max:
            break
        a12 = a1
        alpha2 = 0
        while not a12.is_zero():
            if alpha_max is not None and alpha1 + alpha2 > alpha_max:
                break
            # only terms of b that can still land at or above the cutoff
            # need differentiating (keeps delta_x away from generators
            # that legitimately have no derivative rule)
            if cutoff_order is not None:
                b12 = b.truncate(cutoff_order - a12.max_order())
            else:
                b12 = b
            for _ in range(alpha1):
                b12 = b12.dx(1)
            for _ in range(alpha2):
                b12 = b12.dx(2)
            fact = Fraction(1)
            for i in range(2, alpha1 + 1):
                fact *= i
            for i in range(2, alpha2 + 1):
                fact *= i
            contrib = (a12 * b12).scale(Fraction(1, 1) / fact)
            out._add_poly(contrib)
            a12 = a12.dxi(2)
            alpha2 += 1
        a1 = a1.dxi(1)
        alpha1 += 1
    if cutoff_order is not None:
        out = out.truncate(cutoff_order)
    return out
