"""Exact coefficient field: complex numbers with rational real and imaginary parts.

All engine arithmetic is exact; floating point only ever appears in the
numeric quadrature oracle.  Rendering follows the canonical text form
``p/q`` for real values and ``p/q+r/s i`` for complex ones, and
:func:`GaussianRational.parse` accepts exactly what :func:`str` produces
(plus unsurprising variants such as ``i`` or ``-2/3i``).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParseError

RatLike = Union[int, Fraction, "GaussianRational"]


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    # -- coercion ---------------------------------------------------------

    @staticmethod
    def coerce(value: RatLike) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(Fraction(value))
        raise TypeError(f"cannot coerce {value!r} to GaussianRational")

    # -- ring / field operations ------------------------------------------

    def __add__(self, other: RatLike) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other: RatLike) -> "GaussianRational":
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other: RatLike) -> "GaussianRational":
        return GaussianRational.coerce(other) + (-self)

    def __mul__(self, other: RatLike) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("inverse of zero GaussianRational")
        return GaussianRational(self.re / norm, -self.im / norm)

    def __truediv__(self, other: RatLike) -> "GaussianRational":
        return self * GaussianRational.coerce(other).inverse()

    def __rtruediv__(self, other: RatLike) -> "GaussianRational":
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "GaussianRational":
        if k < 0:
            return self.inverse() ** (-k)
        out = GaussianRational(Fraction(1))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GaussianRational(Fraction(other))
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    # -- text form ----------------------------------------------------------

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        im_abs = str(abs(self.im))
        if self.re == 0:
            sign = "-" if self.im < 0 else ""
            return f"{sign}{im_abs} i"
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{im_abs} i"

    def __repr__(self) -> str:  # pragma: no cover
        return f"GaussianRational({self})"

    @staticmethod
    def parse(text: str) -> "GaussianRational":
        s = text.replace(" ", "")
        if not s:
            raise ParseError("empty coefficient string")
        try:
            if not s.endswith(("i", "I")):
                return GaussianRational(Fraction(s))
            body = s[:-1]
            # split off the real part at the last top-level sign
            split = -1
            for idx in range(len(body) - 1, 0, -1):
                if body[idx] in "+-" and body[idx - 1] not in "+-/":
                    split = idx
                    break
            if split == -1:
                re_part, im_part = "", body
            else:
                re_part, im_part = body[:split], body[split:]
            if im_part in ("", "+"):
                im = Fraction(1)
            elif im_part == "-":
                im = Fraction(-1)
            else:
                im = Fraction(im_part)
            re = Fraction(re_part) if re_part else Fraction(0)
            return GaussianRational(re, im)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad coefficient {text!r}: {exc}") from exc


def grat(value: RatLike) -> GaussianRational:
    """Shorthand coercion used throughout the engine."""
    return GaussianRational.coerce(value)


def gfrac(p: int, q: int = 1) -> GaussianRational:
    """Real rational p/q as a GaussianRational."""
    return GaussianRational(Fraction(p, q))


ZERO = GaussianRational()
ONE = GaussianRational(Fraction(1))
IMAG = GaussianRational(Fraction(0), Fraction(1))
