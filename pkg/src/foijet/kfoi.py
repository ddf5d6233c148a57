"""Multi-point functionals built from a separation chart.

For l evaluation points the chart variables are copied into a product chart
(z^k_i holomorphic, zb^k_i antiholomorphic, i = 1..l) carrying the chained
phase

    F = sum_{i=0..l} Phit(x_i, x_{i+1}) - sum_{i=1..l} Phi(x_i) - Phit(0, 0)

with x_0 = x_{l+1} = 0, where Phit(x, y) extends the potential
holomorphically in its first slot and antiholomorphically in the second,
together with the density exponent

    u = sum_{i=1..l} (Phi + Psi)(x_i)

built from the dual potential.  The nu^{-1} levels of Phi and Psi cancel,
so u is a genuine log-density, the chain is critical at the origin for any
potential, and the nu^{-1} mixed Hessian of F is block bidiagonal: -G on
the diagonal, +G on the first upper block diagonal.

The functional of the chained pair, normalized to take the value 1 on the
constant 1, reproduces iterated products evaluated at the origin:

    K(f_1 x ... x f_l) = (I f_1 * ... * I f_l)(0)

which is what `kl_apply` computes directly on the chart; `kl_axiom_suite`
cross-checks the two routes together with the defining identities of K
(integration by parts in every direction, the nu-derivative identity with
the ml/nu volume term, and collapse of a trailing constant slot).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import InconsistentSystemError
from .foi import PhasePair, construct_foi, ibp_residual
from .jets import LaurentScalar, WeightedJet, monomials_up_to
from .operators import PointDistribution
from .rational import GaussianRational, grat
from .sepvars import KahlerPotential, _berezin_forward, dual_potential, star_w
from .wedge import form_power, top_coefficient


def point_vars(m: int, points: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Holomorphic and antiholomorphic names of the product chart."""
    hol = tuple(f"z{k + 1}_{i + 1}" for i in range(points) for k in range(m))
    anti = tuple(f"zb{k + 1}_{i + 1}" for i in range(points) for k in range(m))
    return hol, anti


def analytic_extend(kp: KahlerPotential, vars: tuple[str, ...],
                    hol_to: tuple[str | None, ...],
                    anti_to: tuple[str | None, ...]) -> WeightedJet:
    """The potential with z renamed to hol_to and zb to anti_to.

    A None target sets that variable to zero, which is how the fixed
    origin slots of the chain enter.
    """
    plan: dict[str, str | None] = {}
    plan.update(zip(kp.hol, hol_to))
    plan.update(zip(kp.anti, anti_to))
    return kp.jet.substitute(plan, vars)


def _chain_phase(kp: KahlerPotential, points: int) -> tuple[tuple[str, ...], WeightedJet]:
    m = kp.m
    hol, anti = point_vars(m, points)
    vars = hol + anti

    def hol_at(i: int) -> tuple[str | None, ...]:
        if i < 1 or i > points:
            return (None,) * m
        return tuple(hol[(i - 1) * m:i * m])

    def anti_at(i: int) -> tuple[str | None, ...]:
        if i < 1 or i > points:
            return (None,) * m
        return tuple(anti[(i - 1) * m:i * m])

    phase = WeightedJet.zero(vars, kp.jet.trunc)
    for i in range(points + 1):
        phase = phase + analytic_extend(kp, vars, hol_at(i), anti_at(i + 1))
    for i in range(1, points + 1):
        phase = phase - analytic_extend(kp, vars, hol_at(i), anti_at(i))
    phase = phase - analytic_extend(kp, vars, (None,) * m, (None,) * m)
    return vars, phase


def chain_pair(kp: KahlerPotential, points: int, weight: int) -> PhasePair:
    """Phase pair of the l-point chain, with per-point trace density.

    The log-density needs the dual potential, which is only available to a
    finite weight; ``weight`` must cover the orders the pair will feed
    (2 r_max for a depth-r_max functional).
    """
    if points < 1:
        raise ValueError("need at least one evaluation point")
    m = kp.m
    vars, phase = _chain_phase(kp, points)
    hol, anti = point_vars(m, points)
    updens = kp.jet + dual_potential(kp, weight).psi
    if any(r < 0 for _, r in updens.terms):
        raise InconsistentSystemError(
            "potential and dual potential do not cancel at nu^{-1}"
        )
    logdensity = WeightedJet.zero(vars, updens.trunc)
    for i in range(points):
        plan: dict[str, str | None] = {}
        plan.update(zip(kp.hol, hol[i * m:(i + 1) * m]))
        plan.update(zip(kp.anti, anti[i * m:(i + 1) * m]))
        logdensity = logdensity + updens.substitute(plan, vars)
    pairs = tuple(zip(hol, anti))
    return PhasePair(vars, phase, logdensity, pairs)


@dataclass(frozen=True)
class HessianReport:
    """Mixed nu^{-1} Hessian of the chain and its expected block shape."""

    blocks: tuple[tuple[GaussianRational, ...], ...]
    pattern_ok: bool
    determinant: GaussianRational


def hessian_report(kp: KahlerPotential, points: int) -> HessianReport:
    vars, phase = _chain_phase(kp, points)
    m = kp.m
    n = m * points
    low = phase.nu_component(-1)

    def entry(a: int, b: int) -> GaussianRational:
        alpha = [0] * len(vars)
        alpha[a] += 1
        alpha[n + b] += 1
        return low.coeff(tuple(alpha), 0)

    H = tuple(tuple(entry(a, b) for b in range(n)) for a in range(n))
    g0 = kp.constant_metric()
    ok = True
    for a in range(n):
        for b in range(n):
            i, k = divmod(a, m)
            j, q = divmod(b, m)
            if i == j:
                want = -g0[k][q]
            elif j == i + 1:
                want = g0[k][q]
            else:
                want = grat(0)
            if H[a][b] != want:
                ok = False
    # exact determinant via the wedge engine, matching the orientation used
    # by the model-constant normalization
    form = [(a, n + b, H[a][b]) for a in range(n) for b in range(n) if H[a][b]]
    top = top_coefficient(form_power(form, n, grat(1)), 2 * n)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    det = (top if top is not None else grat(0)) / (
        grat(math.factorial(n)) * grat(sign)
    )
    return HessianReport(H, ok, det)


def kfoi_functional(kp: KahlerPotential, points: int,
                    r_max: int) -> PointDistribution:
    """The chain functional, normalized so the constant 1 pairs to 1."""
    lam = construct_foi(chain_pair(kp, points, 2 * r_max), r_max)
    unit = lam.apply(WeightedJet.const(lam.vars, 1))
    return lam.scale(unit.inverse())


def product_jet(kp: KahlerPotential, fs: tuple[WeightedJet, ...]) -> WeightedJet:
    """f_1(x_1) ... f_l(x_l) on the product chart."""
    points = len(fs)
    hol, anti = point_vars(kp.m, points)
    vars = hol + anti
    m = kp.m
    out = WeightedJet.const(vars, 1)
    for i, f in enumerate(fs):
        plan: dict[str, str | None] = {}
        plan.update(zip(kp.hol, hol[i * m:(i + 1) * m]))
        plan.update(zip(kp.anti, anti[i * m:(i + 1) * m]))
        out = out * f.substitute(plan, vars)
    return out


def kl_apply(kp: KahlerPotential, fs: tuple[WeightedJet, ...],
             order: int) -> LaurentScalar:
    """(I f_1 * ... * I f_l)(0) exact through nu^order."""
    if not fs:
        raise ValueError("need at least one factor")
    weight = 2 * order + sum(f.max_degree() for f in fs)
    acc = _berezin_forward(kp, fs[0], weight)
    for f in fs[1:]:
        acc = star_w(kp, acc, _berezin_forward(kp, f, weight), weight)
    return acc.eval0().cut(order)


@dataclass(frozen=True)
class KlReport:
    """Residuals of the chain-functional identities; all vanish on
    consistent data."""

    points: int
    normalizer: LaurentScalar
    ibp_residuals: tuple[LaurentScalar, ...]
    nu_residuals: tuple[LaurentScalar, ...]
    star_residuals: tuple[LaurentScalar, ...]
    collapse_residuals: tuple[LaurentScalar, ...]

    @property
    def ok(self) -> bool:
        return all(
            r.is_zero
            for rs in (
                self.ibp_residuals,
                self.nu_residuals,
                self.star_residuals,
                self.collapse_residuals,
            )
            for r in rs
        )


def kl_axiom_suite(kp: KahlerPotential, points: int, r_max: int,
                   tests: tuple[tuple[WeightedJet, ...], ...]) -> KlReport:
    """Check the chain functional against its defining identities.

    Each entry of ``tests`` is an l-tuple of chart jets.  The suite verifies
    integration by parts in every product direction, the nu-derivative
    identity carrying the ml/nu volume term, agreement with the iterated
    product route, and collapse of a trailing constant slot onto the
    (l-1)-point functional.
    """
    pair = chain_pair(kp, points, 2 * r_max)
    lam = construct_foi(pair, r_max)
    unit = lam.apply(WeightedJet.const(lam.vars, 1))
    norm = lam.scale(unit.inverse())
    ml = kp.m * points

    ibp = []
    mono_tests = [
        WeightedJet.monomial(pair.vars, alpha)
        for alpha in monomials_up_to(len(pair.vars), 2)[1:]
    ]
    for direction in pair.vars:
        for f in mono_tests:
            ibp.append(ibp_residual(lam, pair, direction, f))

    volume = pair.combined().nu_derive() - WeightedJet.from_scalar(
        LaurentScalar({-1: grat(ml)}), pair.vars
    )
    nu_res = []
    star_res = []
    collapse = []
    for fs in tests:
        if len(fs) != points:
            raise ValueError(f"test tuple has {len(fs)} slots, chain has {points}")
        prod = product_jet(kp, fs)
        lhs = norm.apply(prod).nu_derive()
        rhs = norm.apply(prod.nu_derive() + volume * prod)
        nu_res.append(lhs - rhs)
        order = min(r_max - 1, lam.trunc)
        star_res.append(
            norm.apply(prod, order) - kl_apply(kp, fs, order)
        )
        if points > 1:
            shorter = kfoi_functional(kp, points - 1, r_max)
            ones = fs[:-1] + (WeightedJet.const(kp.vars, 1),)
            collapse.append(
                norm.apply(product_jet(kp, ones), order)
                - shorter.apply(product_jet(kp, fs[:-1]), order)
            )
    return KlReport(
        points, unit, tuple(ibp), tuple(nu_res), tuple(star_res),
        tuple(collapse),
    )


@dataclass(frozen=True)
class MultinomialReport:
    """Integer cross-check of the chained-Hessian top power."""

    m: int
    points: int
    wedge_value: int
    determinant_value: int

    @property
    def ok(self) -> bool:
        return self.wedge_value == self.determinant_value


def _int_det(rows: list[list[int]]) -> int:
    """Bareiss elimination; exact for integer matrices."""
    a = [row[:] for row in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def multinomial_check(m: int, points: int, seed: int = 0) -> MultinomialReport:
    """Validate the block top-power identity on random integer metrics.

    Draws an invertible integer m x m metric, assembles the bidiagonal
    chain pattern, and compares the top wedge power (with i^{ml} pulled
    out, so the arithmetic is pure integer) against
    (ml)! det(pattern) (-1)^{ml(ml-1)/2}.
    """
    rng = random.Random(seed)
    while True:
        g = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(m)]
        if _int_det(g):
            break
    n = m * points
    H = [[0] * n for _ in range(n)]
    for i in range(points):
        for j in range(points):
            if i == j:
                scale = -1
            elif j == i + 1:
                scale = 1
            else:
                continue
            for k in range(m):
                for q in range(m):
                    H[i * m + k][j * m + q] = scale * g[k][q]
    form = [(a, n + b, H[a][b]) for a in range(n) for b in range(n) if H[a][b]]
    top = top_coefficient(form_power(form, n, 1), 2 * n)
    wedge_value = top if top is not None else 0
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    det_value = math.factorial(n) * _int_det(H) * sign
    return MultinomialReport(m, points, wedge_value, det_value)
