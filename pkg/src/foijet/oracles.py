"""Independent cross-checks for the symbolic machinery.

Everything here recomputes values through a second route that shares as
little code as possible with the construction under test: Gaussian moments
by explicit perfect-matching enumeration, functionals by naive dict-based
series expansion against those moments, multiplication operators by direct
commutators with the chart generators, and one-dimensional and
two-dimensional pairs by adaptive numeric quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.integrate import dblquad, quad

from .errors import CriticalPointError, RealityError, SingularHessianError
from .foi import PhasePair, construct_foi, real_model_constant_numeric
from .jets import LaurentScalar, WeightedJet
from .linalg import mat_det, mat_inv
from .operators import DiffOperator
from .rational import GaussianRational, grat
from .sepvars import KahlerPotential

Alpha = tuple[int, ...]


def wick_moment(pairing: list[list[GaussianRational]], alpha: Alpha) -> GaussianRational:
    """Sum over perfect matchings of x^alpha with the given pair weights.

    This is the nu-free part of the Gaussian moment: the full moment is
    nu^{|alpha|/2} times this value, and odd degrees vanish.  Matchings are
    counted by pairing the first open slot with every partner, memoized on
    the remaining exponent vector.
    """
    if sum(alpha) % 2:
        return grat(0)
    seen: dict[Alpha, GaussianRational] = {}

    def match(counts: Alpha) -> GaussianRational:
        if not any(counts):
            return grat(1)
        cached = seen.get(counts)
        if cached is not None:
            return cached
        i = next(k for k, e in enumerate(counts) if e)
        total = grat(0)
        for j, e in enumerate(counts):
            ways = counts[i] - 1 if j == i else e
            if not ways:
                continue
            rest = tuple(
                c - (2 if k == i == j else 1 if k in (i, j) else 0)
                for k, c in enumerate(counts)
            )
            total = total + pairing[i][j] * match(rest) * ways
        seen[counts] = total
        return total

    return match(alpha)


def _dict_mul(a: dict, b: dict, weight: int) -> dict:
    out: dict = {}
    for (aa, ra), ca in a.items():
        for (ab, rb), cb in b.items():
            alpha = tuple(x + y for x, y in zip(aa, ab))
            r = ra + rb
            if sum(alpha) + 2 * r > weight:
                continue
            key = (alpha, r)
            val = out.get(key, grat(0)) + ca * cb
            if val:
                out[key] = val
            elif key in out:
                del out[key]
    return out


def _dict_exp(a: dict, nvars: int, weight: int) -> dict:
    one = ((0,) * nvars, 0)
    out = {one: grat(1)}
    power = {one: grat(1)}
    k = 1
    while True:
        power = _dict_mul(power, a, weight)
        if not power:
            break
        inv = Fraction(1, math.factorial(k))
        for key, c in power.items():
            val = out.get(key, grat(0)) + c * inv
            if val:
                out[key] = val
            elif key in out:
                del out[key]
        k += 1
        if k > weight + 2:
            raise CriticalPointError("exponent has terms below weight one")
    return out


def oracle_foi_apply(p: PhasePair, f: WeightedJet, order: int) -> LaurentScalar:
    """Pair a jet against the functional by raw Wick expansion.

    Independently of the symbol-table construction: split the combined
    exponent by hand, exponentiate the non-quadratic part as a plain dict
    series, and contract every term against perfect-matching moments of the
    quadratic level.
    """
    n = p.n
    combined = p.reduced().phase
    h = [[grat(0)] * n for _ in range(n)]
    rest: dict = {}
    for (alpha, r), c in combined.terms.items():
        deg = sum(alpha)
        if r == -1 and deg == 0:
            raise CriticalPointError("phase has a value at the origin")
        if r == -1 and deg == 1:
            raise CriticalPointError("phase has a gradient at the origin")
        if r == -1 and deg == 2:
            idx = [i for i, e in enumerate(alpha) for _ in range(e)]
            i, j = idx
            if i == j:
                h[i][i] = h[i][i] + c + c
            else:
                h[i][j] = h[i][j] + c
                h[j][i] = h[j][i] + c
            continue
        if (deg, r) == (0, 0):
            # the nu^0 constant belongs to the model constant, exactly as
            # the construction drops it
            continue
        rest[(alpha, r)] = c
    if not mat_det(h):
        raise SingularHessianError("quadratic level is degenerate")
    pairing = [[-e for e in row] for row in mat_inv(h)]
    weight = 2 * order
    big = _dict_exp(rest, n, weight)
    acc: dict[int, GaussianRational] = {}
    for (alpha, r), c in _dict_mul(
        big, {(a, r): c for (a, r), c in f.terms.items()}, weight + f.max_degree()
    ).items():
        if sum(alpha) % 2:
            continue
        level = r + sum(alpha) // 2
        if level > order:
            continue
        val = c * wick_moment(pairing, alpha)
        if val:
            acc[level] = acc.get(level, grat(0)) + val
    return LaurentScalar(acc, order)


def commutation_residuals(kp: KahlerPotential, op: DiffOperator, side: str,
                          f: WeightedJet,
                          tests: tuple[WeightedJet, ...]) -> tuple[WeightedJet, ...]:
    """Residuals that vanish iff op is the multiplication operator of f.

    A left operator must commute with every g_l = d_{zb^l}(Phi) + d_{zb^l}
    and send 1 to f; a right operator mirrors this with the z side.  The
    first residual is op(1) - f, the rest are [op, g_l](t) over the tests.
    """
    gen = kp.anti if side == "left" else kp.hol
    one = WeightedJet.const(kp.vars, 1)
    out = [op.apply(one) - f]
    for name in gen:
        w = kp.jet.derive(name)
        for t in tests:
            lhs = op.apply(w * t + t.derive(name))
            rhs = w * op.apply(t) + op.apply(t).derive(name)
            out.append(lhs - rhs)
    return tuple(out)


# ---------------------------------------------------------------------------
# numeric validation of real pairs
# ---------------------------------------------------------------------------


def _numeric_poly(jet: WeightedJet, nu: float):
    rows = []
    for (alpha, r), c in jet.terms.items():
        if not c.is_real:
            raise RealityError("numeric validation needs real coefficients")
        rows.append((alpha, float(c.re) * nu ** r))

    def ev(point: tuple[float, ...]) -> float:
        total = 0.0
        for alpha, w in rows:
            v = w
            for x, e in zip(point, alpha):
                if e:
                    v *= x ** e
            total += v
        return total

    return ev


@dataclass(frozen=True)
class LaplaceRow:
    h: float
    numeric: float
    predicted: float
    abs_err: float
    rel_err: float


@dataclass(frozen=True)
class LaplaceReport:
    """Numeric Laplace check of a real pair against its functional.

    The remainder of the depth-R series scales like h^{R+1} relative to the
    leading magnitude; ``slope`` is the least-squares exponent measured from
    the error rows and should sit near ``expected_slope`` when the box
    captures the mass of the kernel.
    """

    rows: tuple[LaplaceRow, ...]
    series: LaurentScalar
    slope: float
    expected_slope: float
    max_rel_err: float


def laplace_validate(p: PhasePair, f: WeightedJet, r_max: int,
                     hs: tuple[float, ...],
                     box: tuple[tuple[float, float], ...] | None = None,
                     rel_tol: float = 1e-9) -> LaplaceReport:
    """Integrate f e^{phase+logdensity} numerically and compare.

    Only real one- and two-dimensional pairs are supported.  The series
    side is magnitude h^{n/2} sum_r a_r h^r with the positive orientation
    of the Gaussian factor; the box defaults to [-1, 1]^n and is part of
    the validation setup, since the series is asymptotic to the integral
    only when the box holds the kernel mass.
    """
    n = p.n
    if n > 2:
        raise ValueError("numeric validation supports one or two variables")
    if box is None:
        box = tuple((-1.0, 1.0) for _ in range(n))
    if len(box) != n:
        raise ValueError(f"box has {len(box)} intervals for {n} variables")
    lam = construct_foi(p, r_max)
    series = lam.apply(f, r_max)
    coeffs = []
    for r in range(r_max + 1):
        c = series.coeff(r)
        if not c.is_real:
            raise RealityError("numeric validation needs real coefficients")
        coeffs.append(float(c.re))
    magnitude = real_model_constant_numeric(p).magnitude

    rows = []
    for h in hs:
        phase_ev = _numeric_poly(p.phase, h)
        dens_ev = _numeric_poly(p.logdensity, h)
        f_ev = _numeric_poly(f, h)

        if n == 1:
            def integrand(x: float) -> float:
                pt = (x,)
                return f_ev(pt) * math.exp(phase_ev(pt) + dens_ev(pt))

            numeric, _ = quad(
                integrand, box[0][0], box[0][1],
                epsabs=0.0, epsrel=rel_tol, limit=300,
            )
        else:
            def integrand2(y: float, x: float) -> float:
                pt = (x, y)
                return f_ev(pt) * math.exp(phase_ev(pt) + dens_ev(pt))

            numeric, _ = dblquad(
                integrand2, box[0][0], box[0][1],
                box[1][0], box[1][1],
                epsabs=0.0, epsrel=rel_tol,
            )
        predicted = magnitude * h ** (n / 2) * sum(
            c * h ** r for r, c in enumerate(coeffs)
        )
        abs_err = abs(numeric - predicted)
        rel = abs_err / abs(predicted) if predicted else math.inf
        rows.append(LaplaceRow(h, numeric, predicted, abs_err, rel))

    # least-squares exponent of the error against h, relative to the
    # Gaussian prefactor h^{n/2}
    pts = [
        (math.log(row.h), math.log(row.abs_err) - (n / 2) * math.log(row.h))
        for row in rows
        if row.abs_err > 0.0
    ]
    if len(pts) >= 2:
        mx = sum(x for x, _ in pts) / len(pts)
        my = sum(y for _, y in pts) / len(pts)
        num = sum((x - mx) * (y - my) for x, y in pts)
        den = sum((x - mx) ** 2 for x, _ in pts)
        slope = num / den if den else math.inf
    else:
        slope = math.inf
    return LaplaceReport(
        tuple(rows), series, slope, float(r_max + 1),
        max(row.rel_err for row in rows),
    )
