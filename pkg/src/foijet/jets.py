"""Truncated formal series: Laurent scalars in nu and weighted polynomial jets.

The grading assigns weight 1 to each chart variable and weight 2 to the
formal parameter nu, so a monomial ``x^alpha nu^r`` has weight
``|alpha| + 2r``.  Negative powers of nu are allowed as long as every term
keeps weight at least the jet's filtration certificate.

Both containers track what they actually know:

* ``LaurentScalar.trunc``: coefficients of ``nu^r`` are exact for all
  ``r <= trunc``.
* ``WeightedJet.trunc`` (the weight cap W): coefficients of all terms with
  weight ``<= trunc`` are exact.
* ``WeightedJet.filt`` (the filtration certificate N): every term of the
  underlying object, stored or not, has weight ``>= filt``.

Arithmetic propagates these bounds: sums are exact to the smaller
truncation, and a product is exact to ``min(Wa + Nb, Wb + Na)``, which for
nonnegative filtrations is at least ``min(Wa, Wb)``.  Truncation is always
by total weight; requesting data beyond it raises
:class:`~foijet.errors.TruncationError` instead of returning wrong zeros.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import (
    DivisionError,
    FiltrationError,
    TruncationError,
    VariableMismatchError,
)
from .rational import GaussianRational, grat

#: Truncation sentinel for objects known exactly (polynomials, frozen values).
T_EXACT = 10**9

Alpha = tuple[int, ...]
TermKey = tuple[Alpha, int]
ScalarLike = Union[int, Fraction, GaussianRational, "LaurentScalar"]
JetLike = Union[int, Fraction, GaussianRational, "WeightedJet"]


def _cap(w: int) -> int:
    return min(w, T_EXACT)


# ---------------------------------------------------------------------------
# Laurent scalars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentScalar:
    """A truncated Laurent series in nu with GaussianRational coefficients."""

    coeffs: Mapping[int, GaussianRational] = field(default_factory=dict)
    trunc: int = T_EXACT

    def __post_init__(self) -> None:
        clean = {
            r: grat(c)
            for r, c in self.coeffs.items()
            if r <= self.trunc and grat(c)
        }
        object.__setattr__(self, "coeffs", clean)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def coerce(value: ScalarLike, trunc: int = T_EXACT) -> "LaurentScalar":
        if isinstance(value, LaurentScalar):
            return value
        return LaurentScalar({0: grat(value)}, trunc)

    @staticmethod
    def nu_power(r: int, coeff: GaussianRational | int = 1, trunc: int = T_EXACT) -> "LaurentScalar":
        return LaurentScalar({r: grat(coeff)}, trunc)

    @staticmethod
    def zero(trunc: int = T_EXACT) -> "LaurentScalar":
        return LaurentScalar({}, trunc)

    # -- structure ----------------------------------------------------------

    @property
    def nu_low(self) -> int:
        """Leading exponent; ``trunc + 1`` when zero to truncation."""
        if not self.coeffs:
            return self.trunc + 1
        return min(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, r: int) -> GaussianRational:
        if r > self.trunc:
            raise TruncationError(f"coefficient of nu^{r} not tracked", required=r)
        return self.coeffs.get(r, GaussianRational())

    def cut(self, trunc: int) -> "LaurentScalar":
        if trunc >= self.trunc:
            return self
        return LaurentScalar({r: c for r, c in self.coeffs.items() if r <= trunc}, trunc)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: ScalarLike) -> "LaurentScalar":
        o = LaurentScalar.coerce(other)
        trunc = min(self.trunc, o.trunc)
        out = dict(self.coeffs)
        for r, c in o.coeffs.items():
            out[r] = out.get(r, GaussianRational()) + c
        return LaurentScalar(out, trunc)

    __radd__ = __add__

    def __neg__(self) -> "LaurentScalar":
        return LaurentScalar({r: -c for r, c in self.coeffs.items()}, self.trunc)

    def __sub__(self, other: ScalarLike) -> "LaurentScalar":
        return self + (-LaurentScalar.coerce(other))

    def __rsub__(self, other: ScalarLike) -> "LaurentScalar":
        return LaurentScalar.coerce(other) + (-self)

    def __mul__(self, other: ScalarLike) -> "LaurentScalar":
        o = LaurentScalar.coerce(other)
        trunc = _cap(min(self.trunc + o.nu_low, o.trunc + self.nu_low))
        out: dict[int, GaussianRational] = {}
        for r1, c1 in self.coeffs.items():
            for r2, c2 in o.coeffs.items():
                r = r1 + r2
                if r > trunc:
                    continue
                out[r] = out.get(r, GaussianRational()) + c1 * c2
        return LaurentScalar(out, trunc)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentScalar":
        """Multiply by nu^k."""
        return LaurentScalar({r + k: c for r, c in self.coeffs.items()}, _cap(self.trunc + k))

    def inverse(self) -> "LaurentScalar":
        if self.is_zero:
            raise DivisionError("division by a series that vanishes to its truncation")
        low = self.nu_low
        lead = self.coeffs[low]
        rel = self.trunc - low
        # u = self / (lead nu^low) - 1 has positive nu-order
        u = {r - low: c / lead for r, c in self.coeffs.items() if r != low}
        acc = {0: GaussianRational(Fraction(1))}
        power = {0: GaussianRational(Fraction(1))}
        for _ in range(rel):
            nxt: dict[int, GaussianRational] = {}
            for r1, c1 in power.items():
                for r2, c2 in u.items():
                    r = r1 + r2
                    if r > rel:
                        continue
                    nxt[r] = nxt.get(r, GaussianRational()) - c1 * c2
            power = {r: c for r, c in nxt.items() if c}
            if not power:
                break
            for r, c in power.items():
                acc[r] = acc.get(r, GaussianRational()) + c
        inv = {r - low: c / lead for r, c in acc.items()}
        return LaurentScalar(inv, _cap(self.trunc - 2 * low))

    def __truediv__(self, other: ScalarLike) -> "LaurentScalar":
        return self * LaurentScalar.coerce(other).inverse()

    def nu_derive(self) -> "LaurentScalar":
        return LaurentScalar(
            {r - 1: c * r for r, c in self.coeffs.items() if r != 0},
            _cap(self.trunc - 1),
        )

    # -- comparison and rendering -------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = LaurentScalar.coerce(other)
        if not isinstance(other, LaurentScalar):
            return NotImplemented
        t = min(self.trunc, other.trunc)
        a = {r: c for r, c in self.coeffs.items() if r <= t}
        b = {r: c for r, c in other.coeffs.items() if r <= t}
        return a == b

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for r in sorted(self.coeffs):
                c = self.coeffs[r]
                if r == 0:
                    parts.append(f"{c}" if c.is_real else f"({c})")
                else:
                    mono = "nu" if r == 1 else f"nu^{r}"
                    cs = f"{c}" if (c.is_real and c.re >= 0) else f"({c})"
                    parts.append(f"{cs} {mono}")
            body = " + ".join(parts)
        if self.trunc >= T_EXACT:
            return body
        return f"{body} + O(nu^{self.trunc + 1})"

    def __repr__(self) -> str:  # pragma: no cover
        return f"LaurentScalar({self})"


# ---------------------------------------------------------------------------
# Weighted jets
# ---------------------------------------------------------------------------


def _add_alpha(a: Alpha, b: Alpha) -> Alpha:
    return tuple(x + y for x, y in zip(a, b))


def term_weight(key: TermKey) -> int:
    alpha, r = key
    return sum(alpha) + 2 * r


@dataclass(frozen=True)
class WeightedJet:
    """Jet of a formal function at the base point, truncated by total weight."""

    vars: tuple[str, ...]
    terms: Mapping[TermKey, GaussianRational]
    trunc: int = T_EXACT
    filt: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        floor = self.filt
        clean: dict[TermKey, GaussianRational] = {}
        low = self.trunc + 1
        for key, c in self.terms.items():
            c = grat(c)
            if not c:
                continue
            alpha, r = key
            if len(alpha) != len(self.vars) or any(e < 0 for e in alpha):
                raise VariableMismatchError(f"bad exponent tuple {alpha} for vars {self.vars}")
            w = term_weight(key)
            if w < floor:
                raise FiltrationError(
                    f"term {key} has weight {w} below the declared filtration {floor}"
                )
            if w > self.trunc:
                continue
            clean[(tuple(alpha), r)] = c
            low = min(low, w)
        object.__setattr__(self, "terms", clean)
        # tighten the certificate to what the stored data supports
        object.__setattr__(self, "filt", min(low, _cap(self.trunc + 1)))

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(vars: Iterable[str], trunc: int = T_EXACT) -> "WeightedJet":
        return WeightedJet(tuple(vars), {}, trunc, min(0, trunc + 1))

    @staticmethod
    def const(vars: Iterable[str], value: int | Fraction | GaussianRational,
              trunc: int = T_EXACT) -> "WeightedJet":
        vars = tuple(vars)
        return WeightedJet(vars, {((0,) * len(vars), 0): grat(value)}, trunc, 0)

    @staticmethod
    def coerce(value: JetLike, vars: tuple[str, ...]) -> "WeightedJet":
        if isinstance(value, WeightedJet):
            if value.vars != vars:
                raise VariableMismatchError(f"jet over {value.vars}, expected {vars}")
            return value
        return WeightedJet.const(vars, value)

    @staticmethod
    def monomial(vars: Iterable[str], alpha: Iterable[int], r: int = 0,
                 coeff: int | Fraction | GaussianRational = 1,
                 trunc: int = T_EXACT) -> "WeightedJet":
        vars = tuple(vars)
        alpha = tuple(alpha)
        key = (alpha, r)
        return WeightedJet(vars, {key: grat(coeff)}, trunc, min(term_weight(key), trunc + 1))

    @staticmethod
    def variable(vars: Iterable[str], name: str, trunc: int = T_EXACT) -> "WeightedJet":
        vars = tuple(vars)
        alpha = tuple(1 if v == name else 0 for v in vars)
        if sum(alpha) != 1:
            raise VariableMismatchError(f"unknown variable {name!r} in {vars}")
        return WeightedJet.monomial(vars, alpha, 0, 1, trunc)

    @staticmethod
    def from_scalar(s: LaurentScalar, vars: Iterable[str]) -> "WeightedJet":
        vars = tuple(vars)
        zero_alpha = (0,) * len(vars)
        terms = {(zero_alpha, r): c for r, c in s.coeffs.items()}
        # every term with nonzero alpha is exactly zero, so weights up to
        # 2*trunc + 1 are fully known
        trunc = _cap(2 * s.trunc + 1) if s.trunc < T_EXACT else T_EXACT
        floor = min((2 * r for r in s.coeffs), default=0)
        return WeightedJet(vars, terms, trunc, floor)

    # -- structure ----------------------------------------------------------

    def var_index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise VariableMismatchError(f"unknown variable {name!r} in {self.vars}") from None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> list[tuple[TermKey, GaussianRational]]:
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def coeff(self, alpha: Iterable[int], r: int = 0) -> GaussianRational:
        key = (tuple(alpha), r)
        w = term_weight(key)
        if w > self.trunc:
            raise TruncationError(
                f"coefficient at {key} has weight {w} beyond truncation {self.trunc}",
                required=w,
            )
        return self.terms.get(key, GaussianRational())

    def truncate(self, trunc: int) -> "WeightedJet":
        if trunc >= self.trunc:
            return self
        return WeightedJet(
            self.vars,
            {k: c for k, c in self.terms.items() if term_weight(k) <= trunc},
            trunc,
            min(self.filt, trunc + 1),
        )

    def max_degree(self) -> int:
        return max((sum(a) for (a, _r) in self.terms), default=0)

    def nu_levels(self) -> list[int]:
        return sorted({r for (_a, r) in self.terms})

    def nu_component(self, r: int) -> "WeightedJet":
        """The coefficient of nu^r as a nu-free jet, exact to degree trunc - 2r."""
        terms = {(a, 0): c for (a, rr), c in self.terms.items() if rr == r}
        return WeightedJet(self.vars, terms, _cap(self.trunc - 2 * r), 0)

    # -- ring operations ----------------------------------------------------

    def _check_vars(self, other: "WeightedJet") -> None:
        if self.vars != other.vars:
            raise VariableMismatchError(f"jets over {self.vars} and {other.vars}")

    def __add__(self, other: JetLike) -> "WeightedJet":
        o = WeightedJet.coerce(other, self.vars)
        trunc = min(self.trunc, o.trunc)
        out = {k: c for k, c in self.terms.items() if term_weight(k) <= trunc}
        for k, c in o.terms.items():
            if term_weight(k) > trunc:
                continue
            out[k] = out.get(k, GaussianRational()) + c
        return WeightedJet(self.vars, out, trunc, min(self.filt, o.filt))

    __radd__ = __add__

    def __neg__(self) -> "WeightedJet":
        return WeightedJet(self.vars, {k: -c for k, c in self.terms.items()},
                           self.trunc, self.filt)

    def __sub__(self, other: JetLike) -> "WeightedJet":
        return self + (-WeightedJet.coerce(other, self.vars))

    def __rsub__(self, other: JetLike) -> "WeightedJet":
        return WeightedJet.coerce(other, self.vars) + (-self)

    def __mul__(self, other: JetLike) -> "WeightedJet":
        o = WeightedJet.coerce(other, self.vars)
        trunc = _cap(min(self.trunc + o.filt, o.trunc + self.filt))
        out: dict[TermKey, GaussianRational] = {}
        for (a1, r1), c1 in self.terms.items():
            w1 = sum(a1) + 2 * r1
            for (a2, r2), c2 in o.terms.items():
                if w1 + sum(a2) + 2 * r2 > trunc:
                    continue
                key = (_add_alpha(a1, a2), r1 + r2)
                out[key] = out.get(key, GaussianRational()) + c1 * c2
        return WeightedJet(self.vars, out, trunc, _cap(self.filt + o.filt))

    __rmul__ = __mul__

    def scale(self, c: int | Fraction | GaussianRational) -> "WeightedJet":
        c = grat(c)
        return WeightedJet(self.vars, {k: c * v for k, v in self.terms.items()},
                           self.trunc, self.filt)

    def scalar_mul(self, s: LaurentScalar) -> "WeightedJet":
        return self * WeightedJet.from_scalar(s, self.vars)

    def nu_mul(self, k: int) -> "WeightedJet":
        """Multiply by nu^k."""
        return WeightedJet(self.vars, {(a, r + k): c for (a, r), c in self.terms.items()},
                           _cap(self.trunc + 2 * k), _cap(self.filt + 2 * k))

    def derive(self, name: str) -> "WeightedJet":
        i = self.var_index(name)
        out: dict[TermKey, GaussianRational] = {}
        for (a, r), c in self.terms.items():
            if a[i] == 0:
                continue
            na = list(a)
            na[i] -= 1
            out[(tuple(na), r)] = c * a[i]
        return WeightedJet(self.vars, out, _cap(self.trunc - 1), _cap(self.filt - 1))

    def derive_multi(self, beta: Iterable[int]) -> "WeightedJet":
        """Apply the composite partial derivative with exponent tuple beta."""
        beta = tuple(beta)
        if len(beta) != len(self.vars):
            raise VariableMismatchError(f"derivative tuple {beta} for vars {self.vars}")
        out = self
        for name, e in zip(self.vars, beta):
            for _ in range(e):
                out = out.derive(name)
        return out

    def nu_derive(self) -> "WeightedJet":
        out = {(a, r - 1): c * r for (a, r), c in self.terms.items() if r != 0}
        return WeightedJet(self.vars, out, _cap(self.trunc - 2), _cap(self.filt - 2))

    # -- series maps ---------------------------------------------------------

    def exp(self) -> "WeightedJet":
        """exp of a jet with strictly positive filtration."""
        if not self.is_zero and self.filt < 1:
            raise FiltrationError(
                f"exp needs filtration >= 1, got {self.filt} (term weights start there)"
            )
        one = WeightedJet.const(self.vars, 1, self.trunc)
        acc = one
        power = one
        k = 0
        while True:
            k += 1
            # re-truncate: products legitimately raise trunc, the loop must not
            power = (power * self).truncate(self.trunc)
            if power.is_zero:
                break
            acc = acc + power.scale(Fraction(1, _factorial(k)))
        return acc.truncate(self.trunc)

    def log(self) -> "WeightedJet":
        """log of a jet of the form 1 + (filtration >= 1)."""
        g = self - WeightedJet.const(self.vars, 1, self.trunc)
        if not g.is_zero and g.filt < 1:
            raise FiltrationError(
                "log needs the nonconstant part to have filtration >= 1, got "
                f"{g.filt}"
            )
        acc = WeightedJet.zero(self.vars, g.trunc)
        power = WeightedJet.const(self.vars, 1, g.trunc)
        k = 0
        while True:
            k += 1
            power = (power * g).truncate(g.trunc)
            if power.is_zero:
                break
            sign = 1 if k % 2 == 1 else -1
            acc = acc + power.scale(Fraction(sign, k))
        return acc.truncate(g.trunc)

    def substitute(self, plan: Mapping[str, str | None],
                   new_vars: Iterable[str]) -> "WeightedJet":
        """Graded rename-or-zero substitution.

        ``plan`` maps old variable names to new names (or None to set the
        variable to zero); unlisted variables keep their names.  Two source
        variables may not collide on one target.
        """
        new_vars = tuple(new_vars)
        targets: dict[str, int | None] = {}
        seen: dict[str, str] = {}
        for v in self.vars:
            tgt = plan.get(v, v)
            if tgt is None:
                targets[v] = None
                continue
            if tgt in seen:
                raise VariableMismatchError(
                    f"substitution collision: {seen[tgt]!r} and {v!r} both map to {tgt!r}"
                )
            seen[tgt] = v
            if tgt not in new_vars:
                raise VariableMismatchError(f"target {tgt!r} not among {new_vars}")
            targets[v] = new_vars.index(tgt)
        out: dict[TermKey, GaussianRational] = {}
        for (a, r), c in self.terms.items():
            na = [0] * len(new_vars)
            dead = False
            for i, e in enumerate(a):
                if e == 0:
                    continue
                j = targets[self.vars[i]]
                if j is None:
                    dead = True
                    break
                na[j] += e
            if dead:
                continue
            key = (tuple(na), r)
            out[key] = out.get(key, GaussianRational()) + c
        return WeightedJet(new_vars, out, self.trunc, self.filt)

    def eval0(self) -> LaurentScalar:
        """Evaluate at the base point: keep alpha = 0 terms."""
        zero_alpha = (0,) * len(self.vars)
        coeffs = {r: c for (a, r), c in self.terms.items() if a == zero_alpha}
        trunc = T_EXACT if self.trunc >= T_EXACT else self.trunc // 2
        return LaurentScalar(coeffs, trunc)

    def conj_swap(self, pairing: Mapping[str, str]) -> "WeightedJet":
        """Conjugate coefficients and swap paired variables (reality checks)."""
        full = dict(pairing)
        full.update({v: k for k, v in pairing.items()})
        perm = [self.var_index(full.get(v, v)) for v in self.vars]
        out: dict[TermKey, GaussianRational] = {}
        for (a, r), c in self.terms.items():
            na = [0] * len(a)
            for i, e in enumerate(a):
                na[perm[i]] = e
            out[(tuple(na), r)] = c.conjugate()
        return WeightedJet(self.vars, out, self.trunc, self.filt)

    # -- comparison and rendering -------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = WeightedJet.const(self.vars, other)
        if not isinstance(other, WeightedJet):
            return NotImplemented
        self._check_vars(other)
        t = min(self.trunc, other.trunc)
        a = {k: c for k, c in self.terms.items() if term_weight(k) <= t}
        b = {k: c for k, c in other.terms.items() if term_weight(k) <= t}
        return a == b

    __hash__ = None  # type: ignore[assignment]

    def render(self) -> str:
        """Canonical text form: terms sorted by (r, alpha lexicographic)."""
        if not self.terms:
            return "0"
        parts = []
        for (a, r), c in self.sorted_terms():
            factors = []
            if r:
                factors.append("nu" if r == 1 else f"nu^{r}")
            for v, e in zip(self.vars, a):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            mono = " ".join(factors) if factors else "1"
            parts.append(f"({c}) {mono}")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:  # pragma: no cover
        return f"WeightedJet({self.render()}; W={self.trunc}, N={self.filt})"


def _factorial(k: int) -> int:
    return math.factorial(k)


def multi_factorial(alpha: Alpha) -> int:
    """Product of factorials alpha_i!."""
    out = 1
    for e in alpha:
        out *= math.factorial(e)
    return out


def monomials_exact(nvars: int, degree: int) -> list[Alpha]:
    """All exponent tuples with |alpha| = degree, lexicographically sorted."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out: list[Alpha] = []

    def rec(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e, slots - 1)

    rec([], degree, nvars)
    return sorted(out)


def monomials_up_to(nvars: int, max_degree: int) -> list[Alpha]:
    """All exponent tuples with |alpha| <= max_degree, sorted by (degree, lex)."""
    out: list[Alpha] = []
    for d in range(max_degree + 1):
        out.extend(monomials_exact(nvars, d))
    return out
