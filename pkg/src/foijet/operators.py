"""Formal differential operators and origin-supported distributions.

A :class:`DiffOperator` is a finite sum ``sum_t nu^{r_t} c_t(x) d^{beta_t}``
with jet coefficients.  A :class:`PointDistribution` is a functional
``f -> sum_r nu^r sum_alpha rows[r][alpha] (d^alpha f)(0)`` supported at the
base point; formal oscillatory integrals are stored in this shape, one row
per power of nu.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import TruncationError, VariableMismatchError
from .jets import (
    Alpha,
    LaurentScalar,
    T_EXACT,
    TermKey,
    WeightedJet,
    _cap,
    multi_factorial,
)
from .rational import GaussianRational, grat

OpTerm = tuple[int, Alpha, WeightedJet]


@dataclass(frozen=True)
class DiffOperator:
    """Finite nu-graded differential operator with jet coefficients.

    ``shift_trunc`` bounds what the operator knows about itself: terms whose
    weight shift ``2r + filt(c) - |beta|`` exceeds it may be missing, and
    ``apply`` lowers the output truncation accordingly.  Operators written
    down exactly leave it None.
    """

    vars: tuple[str, ...]
    terms: tuple[OpTerm, ...]
    shift_trunc: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        clean = []
        for r, beta, coeff in self.terms:
            beta = tuple(beta)
            if coeff.vars != self.vars:
                raise VariableMismatchError(
                    f"operator over {self.vars} with coefficient over {coeff.vars}"
                )
            if len(beta) != len(self.vars):
                raise VariableMismatchError(f"derivative tuple {beta} for vars {self.vars}")
            clean.append((r, beta, coeff))
        clean.sort(key=lambda t: (t[0], t[1]))
        object.__setattr__(self, "terms", tuple(clean))

    def apply(self, f: WeightedJet) -> WeightedJet:
        if f.vars != self.vars:
            raise VariableMismatchError(f"operator over {self.vars} applied to jet over {f.vars}")
        acc = WeightedJet.zero(self.vars, T_EXACT)
        for r, beta, coeff in self.terms:
            piece = (coeff * f.derive_multi(beta)).nu_mul(r)
            acc = acc + piece
        if self.shift_trunc is not None:
            acc = acc.truncate(min(acc.trunc, _cap(self.shift_trunc + f.filt)))
        return acc

    def __call__(self, f: WeightedJet) -> WeightedJet:
        return self.apply(f)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for r, beta, coeff in self.terms:
            factors = []
            if r:
                factors.append("nu" if r == 1 else f"nu^{r}")
            for v, e in zip(self.vars, beta):
                if e == 1:
                    factors.append(f"d_{v}")
                elif e > 1:
                    factors.append(f"d_{v}^{e}")
            head = " ".join(factors) if factors else "1"
            parts.append(f"[{head}] ({coeff.render()})")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()


Row = Mapping[Alpha, GaussianRational]


@dataclass(frozen=True)
class PointDistribution:
    """nu-graded distribution supported at the origin.

    ``rows[r]`` maps derivative multi-indices alpha to the coefficient of
    ``(d^alpha f)(0)`` in the nu^r component.  Rows with ``r <= trunc`` are
    exact; beyond that nothing is claimed.
    """

    vars: tuple[str, ...]
    rows: Mapping[int, Row]
    trunc: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        clean: dict[int, dict[Alpha, GaussianRational]] = {}
        for r, row in self.rows.items():
            if r > self.trunc:
                continue
            kept = {tuple(a): grat(c) for a, c in row.items() if grat(c)}
            if kept:
                clean[r] = kept
        object.__setattr__(self, "rows", clean)

    @property
    def nu_low(self) -> int:
        if not self.rows:
            return self.trunc + 1
        return min(self.rows)

    def row(self, r: int) -> Row:
        if r > self.trunc:
            raise TruncationError(f"row nu^{r} beyond truncation {self.trunc}", required=r)
        return self.rows.get(r, {})

    @property
    def leading_is_delta(self) -> bool:
        zero_alpha = (0,) * len(self.vars)
        return self.rows.get(0, {}) == {zero_alpha: grat(1)}

    def max_row_order(self, alpha_bound: int | None = None) -> int:
        return self.trunc

    def apply(self, f: WeightedJet, order: int | None = None) -> LaurentScalar:
        """Pair with a jet, tracking which nu-orders of the value are exact.

        The jet's own truncation decides how far the pairing can be trusted:
        a row (r, alpha) needs the coefficient of x^alpha at nu^s, which the
        jet knows only while ``|alpha| + 2s <= f.trunc``.  Missing rows
        beyond ``self.trunc`` cut the order at ``trunc + s_min`` where
        ``s_min`` is the lowest nu-level stored in f.
        """
        if f.vars != self.vars:
            raise VariableMismatchError(f"distribution over {self.vars} paired with {f.vars}")
        s_min = min((r for (_a, r) in f.terms), default=0)
        reliable = self.trunc + s_min if self.trunc < T_EXACT else T_EXACT
        for r, row in self.rows.items():
            for alpha in row:
                if f.trunc >= T_EXACT:
                    continue
                s_bad = (f.trunc - sum(alpha)) // 2 + 1
                reliable = min(reliable, r + s_bad - 1)
        if order is None:
            order = reliable
        elif order > reliable:
            needed = max(
                (sum(alpha) + 2 * (order - r)
                 for r, row in self.rows.items() for alpha in row),
                default=0,
            )
            raise TruncationError(
                f"pairing requested to nu^{order} but reliable only to nu^{reliable}",
                required=needed,
            )
        acc: dict[int, GaussianRational] = {}
        for r, row in self.rows.items():
            for alpha, c in row.items():
                fac = multi_factorial(alpha)
                for s in range(s_min, order - r + 1):
                    fc = f.terms.get((alpha, s))
                    if fc is None:
                        continue
                    key = r + s
                    if key > order:
                        continue
                    acc[key] = acc.get(key, grat(0)) + c * fc * fac
        return LaurentScalar(acc, order)

    def __call__(self, f: WeightedJet, order: int | None = None) -> LaurentScalar:
        return self.apply(f, order)

    def scale(self, s: LaurentScalar) -> "PointDistribution":
        """Multiply the whole distribution by a Laurent scalar."""
        trunc = _cap(min(self.trunc + s.nu_low, s.trunc + self.nu_low))
        rows: dict[int, dict[Alpha, GaussianRational]] = {}
        for r, row in self.rows.items():
            for k, ck in s.coeffs.items():
                tgt = r + k
                if tgt > trunc:
                    continue
                dst = rows.setdefault(tgt, {})
                for alpha, c in row.items():
                    dst[alpha] = dst.get(alpha, grat(0)) + c * ck
        return PointDistribution(self.vars, rows, trunc)

    def sub(self, other: "PointDistribution") -> "PointDistribution":
        if other.vars != self.vars:
            raise VariableMismatchError("mismatched distributions")
        trunc = min(self.trunc, other.trunc)
        rows: dict[int, dict[Alpha, GaussianRational]] = {
            r: dict(row) for r, row in self.rows.items() if r <= trunc
        }
        for r, row in other.rows.items():
            if r > trunc:
                continue
            dst = rows.setdefault(r, {})
            for alpha, c in row.items():
                dst[alpha] = dst.get(alpha, grat(0)) - c
        return PointDistribution(self.vars, rows, trunc)

    def render(self) -> str:
        lines = []
        for r in sorted(self.rows):
            row = self.rows[r]
            parts = []
            for alpha in sorted(row):
                factors = [f"d_{v}^{e}" if e > 1 else f"d_{v}"
                           for v, e in zip(self.vars, alpha) if e]
                head = " ".join(factors) if factors else "eval"
                parts.append(f"({row[alpha]}) {head}")
            lines.append(f"nu^{r}: " + " + ".join(parts))
        return "\n".join(lines) if lines else "0"

    def __str__(self) -> str:
        return self.render()
