"""Exact Gaussian-rational scalars used by the symbol calculus."""

from __future__ import annotations

from fractions import Fraction


class GaussRat:
    """A complex number with exact rational real and imaginary parts.

    Supports just enough arithmetic for the noncommutative symbol algebra:
    ring operations, division, equality and hashing.  Instances are
    immutable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    @staticmethod
    def coerce(x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussRat(x)
        if isinstance(x, complex):
            # exact only for integer-valued floats; used for unit phases
            re, im = Fraction(x.real), Fraction(x.imag)
            return GaussRat(re, im)
        raise TypeError(f"cannot coerce {type(x)!r} to GaussRat")

    def __add__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussRat.coerce(other) - self

    def __mul__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussRat.coerce(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussRat")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        return GaussRat.coerce(other) / self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __eq__(self, other):
        try:
            other = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def conj(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        if self.re == 0:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"

    def serialize(self) -> str:
        """Deterministic "p/q" or "p/q+r/s i" string form."""
        if self.im == 0:
            return str(self.re)
        return f"{self.re}{'+' if self.im >= 0 else ''}{self.im}i"


ZERO = GaussRat(0)
ONE = GaussRat(1)
I = GaussRat(0, 1)
HALF = GaussRat(Fraction(1, 2))
