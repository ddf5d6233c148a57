"""Formal oscillatory integrals supported at the origin.

A functional Lambda acts on weighted jets and returns Laurent series in nu.
It is determined by rows: at each nu-level r a finite combination of
derivatives-at-zero.  Everything here is exact over Gaussian rationals.

Kernel data is a phase pair (phi, rho = e^u dx).  The defining axiom is that
Lambda kills every integration-by-parts direction:

    Lambda(d_i f + (d_i (phi + u)) f) = 0.

The constructive route: split the reduced phase into its Hessian part,
the cubic-and-higher nu^{-1} tail chi, and the nu^{>=0} remainder; then push
the Gaussian functional through exp(nu^{-1} chi + phitilde) by convolving
moment tables.  Row r of the result only involves derivatives of order at
most 2r, which the IBP residual tests cross-check against independent
Wick-pairing oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    CriticalPointError,
    HermitianTypeError,
    InconsistentSystemError,
    RealityError,
    SingularHessianError,
    SingularMatrixError,
    TruncationError,
)
from .jets import (
    T_EXACT,
    Alpha,
    LaurentScalar,
    WeightedJet,
    monomials_up_to,
    multi_factorial,
)
from .linalg import mat_det, mat_inv, subset_det
from .operators import PointDistribution
from .rational import IMAG, GaussianRational, gfrac, grat
from .wedge import form_power, top_coefficient

Matrix = tuple[tuple[GaussianRational, ...], ...]


def _freeze_matrix(rows) -> Matrix:
    return tuple(tuple(GaussianRational.coerce(c) for c in row) for row in rows)


@dataclass(frozen=True)
class PhasePair:
    """Kernel data (phi, rho = e^u dx) on a fixed chart.

    phase levels run from nu^{-1} up; the density exponent u is regular in
    nu.  complex_pairs, when set, names (holomorphic, antiholomorphic)
    variable pairs and marks the chart as complex type.
    """

    vars: tuple[str, ...]
    phase: WeightedJet
    logdensity: WeightedJet
    complex_pairs: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        for jet, label in ((self.phase, "phase"), (self.logdensity, "logdensity")):
            if jet.vars != self.vars:
                raise InconsistentSystemError(
                    f"{label} uses variables {jet.vars}, pair declares {self.vars}"
                )
        if any(r < -1 for _, r in self.phase.terms):
            raise InconsistentSystemError("phase has nu-levels below -1")
        if any(r < 0 for _, r in self.logdensity.terms):
            raise InconsistentSystemError("log-density must be regular in nu")
        if self.complex_pairs is not None:
            pairs = tuple((a, b) for a, b in self.complex_pairs)
            names = [v for ab in pairs for v in ab]
            if sorted(names) != sorted(self.vars):
                raise InconsistentSystemError(
                    "complex pairs must enumerate the chart variables exactly"
                )
            object.__setattr__(self, "complex_pairs", pairs)

    @property
    def n(self) -> int:
        return len(self.vars)

    def combined(self) -> WeightedJet:
        """phi + u, the exponent steering integration by parts."""
        return self.phase + self.logdensity

    def reduced(self) -> "PhasePair":
        """The equivalent pair with u folded into the phase and rho = dx."""
        return PhasePair(
            self.vars,
            self.combined(),
            WeightedJet.zero(self.vars),
            self.complex_pairs,
        )


def equivalent_pair(p: PhasePair, u_prime: WeightedJet) -> PhasePair:
    """Move u_prime from the density exponent into the phase."""
    if u_prime.vars != p.vars:
        raise InconsistentSystemError("u' is on a different chart")
    if any(r < 0 for _, r in u_prime.terms):
        raise InconsistentSystemError("u' must be regular in nu")
    return PhasePair(
        p.vars,
        p.phase + u_prime,
        p.logdensity - u_prime,
        p.complex_pairs,
    )


def shift_phase(p: PhasePair, b: LaurentScalar) -> PhasePair:
    """Add the x-independent scalar b(nu) to the phase."""
    shift = WeightedJet.from_scalar(b, p.vars)
    return PhasePair(p.vars, p.phase + shift, p.logdensity, p.complex_pairs)


@dataclass(frozen=True)
class HessianData:
    """Nondegenerate symmetric matrix h with its inverse, h = Hess(phi_{-1})(0)."""

    h: Matrix
    h_inv: Matrix

    @staticmethod
    def from_matrix(rows) -> "HessianData":
        h = _freeze_matrix(rows)
        n = len(h)
        if any(len(row) != n for row in h):
            raise InconsistentSystemError("Hessian matrix must be square")
        if any(h[i][j] != h[j][i] for i in range(n) for j in range(n)):
            raise InconsistentSystemError("Hessian matrix must be symmetric")
        try:
            inv = mat_inv(h)
        except SingularMatrixError as exc:
            raise SingularHessianError(str(exc)) from exc
        return HessianData(h, _freeze_matrix(inv))

    @property
    def n(self) -> int:
        return len(self.h)


def phase_split(p: PhasePair) -> tuple[HessianData, WeightedJet, WeightedJet]:
    """Split a reduced phase at a nondegenerate critical point.

    Returns (h, chi, phitilde): the Hessian of the nu^{-1} part, the
    cubic-and-higher tail of the nu^{-1} part as an x-jet, and the
    nu^{>=0} remainder with its constant term dropped.  The critical value
    and gradient of the nu^{-1} part must vanish.
    """
    phi = p.combined()
    n = p.n
    zero_alpha = (0,) * n
    low = phi.nu_component(-1)
    if low.coeff(zero_alpha, 0):
        raise CriticalPointError("nu^{-1} phase has nonzero value at the origin")
    for i in range(n):
        e_i = tuple(1 if j == i else 0 for j in range(n))
        if low.coeff(e_i, 0):
            raise CriticalPointError("origin is not a critical point of the phase")
    h_rows = []
    for i in range(n):
        row = []
        for j in range(n):
            alpha = tuple(
                (1 if k == i else 0) + (1 if k == j else 0) for k in range(n)
            )
            c = low.coeff(alpha, 0)
            row.append(c + c if i == j else c)
        h_rows.append(row)
    hd = HessianData.from_matrix(h_rows)
    chi_terms = {
        (alpha, 0): c for (alpha, _), c in low.terms.items() if sum(alpha) >= 3
    }
    chi = WeightedJet(p.vars, chi_terms, low.trunc, min(low.filt, 3))
    tail_terms = {
        (alpha, r): c
        for (alpha, r), c in phi.terms.items()
        if r >= 0 and (alpha, r) != (zero_alpha, 0)
    }
    phitilde = WeightedJet(p.vars, tail_terms, phi.trunc, min(phi.filt, 1))
    return hd, chi, phitilde


def _gaussian_rows(
    hd: HessianData, r_max: int
) -> list[dict[Alpha, GaussianRational]]:
    """Derivative tables of the model functional, rows k = 0..r_max.

    Row k represents Delta^k/k! with Delta = -(1/2) h^{ij} d_i d_j as a sum
    of plain derivative monomials: entry gamma carries the symbol
    coefficient [xi^gamma] Q^k/k! with Q = -(1/2) h^{ij} xi_i xi_j, so only
    |gamma| = 2k appears.
    """
    n = hd.n
    half = gfrac(-1, 2)
    pair: dict[tuple[int, int], GaussianRational] = {}
    for i in range(n):
        for j in range(n):
            c = half * hd.h_inv[i][j]
            if c:
                pair[i, j] = c
    rows: list[dict[Alpha, GaussianRational]] = [{(0,) * n: grat(1)}]
    for k in range(1, r_max + 1):
        prev = rows[-1]
        nxt: dict[Alpha, GaussianRational] = {}
        inv_k = gfrac(1, k)
        for gamma, val in prev.items():
            for (i, j), c in pair.items():
                new = list(gamma)
                new[i] += 1
                new[j] += 1
                key = tuple(new)
                term = val * c * inv_k
                nxt[key] = nxt[key] + term if key in nxt else term
        rows.append({g: v for g, v in nxt.items() if v})
    return rows


def gaussian_foi(
    hd: HessianData, r_max: int, vars: tuple[str, ...] | None = None
) -> PointDistribution:
    """The model functional of a pure quadratic phase nu^{-1}(1/2) h x x."""
    names = tuple(vars) if vars is not None else tuple(
        f"x{i + 1}" for i in range(hd.n)
    )
    if len(names) != hd.n:
        raise InconsistentSystemError("variable count does not match Hessian size")
    rows = _gaussian_rows(hd, r_max)
    return PointDistribution(names, dict(enumerate(rows)), r_max)


def construct_foi(p: PhasePair, r_max: int) -> PointDistribution:
    """Build the functional of a general phase pair to nu-order r_max.

    The phase is reduced, split, and the Gaussian moment tables are pushed
    through exp(nu^{-1} chi + phitilde) by exact convolution.  The input
    jets must carry weight at least 2 r_max.
    """
    if r_max < 0:
        raise InconsistentSystemError("order must be nonnegative")
    red = p.reduced()
    hd, chi, phitilde = phase_split(red)
    w_need = 2 * r_max
    amp = (chi.nu_mul(-1) + phitilde).truncate(w_need)
    if amp.trunc < w_need:
        raise TruncationError(
            "phase data too shallow for the requested order", required=w_need
        )
    big = amp.exp()
    s_min = min((s for (_b, s) in big.terms), default=0)
    gauss = _gaussian_rows(hd, r_max - min(s_min, 0))
    rows: dict[int, dict[Alpha, GaussianRational]] = {
        r: {} for r in range(r_max + 1)
    }
    n = p.n
    for (beta, s), ce in big.terms.items():
        for k in range(0, r_max - s + 1):
            for gamma, d in gauss[k].items():
                if any(gamma[i] < beta[i] for i in range(n)):
                    continue
                alpha = tuple(gamma[i] - beta[i] for i in range(n))
                ratio = Fraction(
                    multi_factorial(gamma), multi_factorial(alpha)
                )
                term = ce * d * ratio
                row = rows[s + k]
                row[alpha] = row[alpha] + term if alpha in row else term
    return PointDistribution(p.vars, rows, r_max)


def ibp_residual(
    lam: PointDistribution,
    p: PhasePair,
    direction: str,
    f: WeightedJet,
    order: int | None = None,
) -> LaurentScalar:
    """Lambda(d_i f + (d_i(phi+u)) f); zero when lam pairs with (phi, rho)."""
    if lam.vars != p.vars:
        raise InconsistentSystemError("functional and pair live on different charts")
    dw = p.combined().derive(direction)
    g = f.derive(direction) + dw * f
    return lam.apply(g, order)


@dataclass(frozen=True)
class Lambda1Report:
    """Fit of the first subleading row against the model-correction ansatz.

    The row is fitted as Lambda_1(f) = ((1/2) A^{kl} d_k d_l + B^k d_k + K) f(0).
    quad is asserted to equal -alpha0 h^{kl}.  paper_linear is the closed-form
    candidate -alpha0 h^{ki} d_i(phi_0+u_0)(0); correction is the observed
    difference, and predicted_correction the cubic-tail term
    (1/2) alpha0 h^{ab} h^{kc} d^3 phi_{-1}(0)_{abc} that accounts for it.
    """

    alpha0: GaussianRational
    quad: Matrix
    linear: tuple[GaussianRational, ...]
    constant: GaussianRational
    paper_linear: tuple[GaussianRational, ...]
    correction: tuple[GaussianRational, ...]
    paper_formula_holds: bool
    predicted_correction: tuple[GaussianRational, ...]
    prediction_matches: bool


def lambda1_check(lam: PointDistribution, p: PhasePair) -> Lambda1Report:
    """Fit row 1 of lam as a second-order operator and compare corrections."""
    red = p.reduced()
    hd, chi, _ = phase_split(red)
    n = p.n
    zero_alpha = (0,) * n
    row0 = lam.row(0)
    extra = [a for a in row0 if a != zero_alpha]
    if extra:
        raise InconsistentSystemError("leading row is not a multiple of delta")
    alpha0 = row0.get(zero_alpha, grat(0))
    row1 = lam.row(1)
    if any(sum(a) > 2 for a in row1):
        raise InconsistentSystemError("row 1 is not a second-order operator")

    def unit(i: int) -> Alpha:
        return tuple(1 if j == i else 0 for j in range(n))

    quad_rows = []
    for k in range(n):
        row = []
        for l in range(n):
            alpha = tuple(
                (1 if j == k else 0) + (1 if j == l else 0) for j in range(n)
            )
            c = row1.get(alpha, grat(0))
            row.append(c + c if k == l else c)
        quad_rows.append(row)
    quad = _freeze_matrix(quad_rows)
    expected = tuple(
        tuple(-(alpha0 * hd.h_inv[k][l]) for l in range(n)) for k in range(n)
    )
    if quad != expected:
        raise InconsistentSystemError(
            "second-order part of row 1 does not match -alpha0 h^{kl}"
        )
    linear = tuple(row1.get(unit(k), grat(0)) for k in range(n))
    constant = row1.get(zero_alpha, grat(0))
    w0 = red.phase.nu_component(0)
    grad = [w0.coeff(unit(i), 0) for i in range(n)]
    paper_linear = tuple(
        -(alpha0 * sum((hd.h_inv[k][i] * grad[i] for i in range(n)), grat(0)))
        for k in range(n)
    )
    correction = tuple(linear[k] - paper_linear[k] for k in range(n))

    def third(a: int, b: int, c: int) -> GaussianRational:
        alpha = tuple(
            (1 if j == a else 0) + (1 if j == b else 0) + (1 if j == c else 0)
            for j in range(n)
        )
        coeff = chi.terms.get((alpha, 0), grat(0))
        return coeff * multi_factorial(alpha)

    predicted = []
    for k in range(n):
        acc = grat(0)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    acc = acc + hd.h_inv[a][b] * hd.h_inv[c][k] * third(a, b, c)
        predicted.append(gfrac(1, 2) * alpha0 * acc)
    predicted_correction = tuple(predicted)
    return Lambda1Report(
        alpha0=alpha0,
        quad=quad,
        linear=linear,
        constant=constant,
        paper_linear=paper_linear,
        correction=correction,
        paper_formula_holds=all(not c for c in correction),
        predicted_correction=predicted_correction,
        prediction_matches=correction == predicted_correction,
    )


def nu_transform(
    lam: PointDistribution, p: PhasePair, order: int | None = None
) -> PointDistribution:
    """The derived functional -(2 nu / n)(d/dnu Lambda - Lambda(d/dnu (phi+u) .)).

    One nu-order is consumed: the default output order is lam.trunc - 1.
    """
    if lam.vars != p.vars:
        raise InconsistentSystemError("functional and pair live on different charts")
    n = p.n
    r_out = lam.trunc - 1 if order is None else order
    if r_out > lam.trunc - 1:
        raise TruncationError(
            "requested order exceeds what the input functional supports",
            required=order + 1 if order is not None else None,
        )
    dw = p.combined().nu_derive()
    scale = gfrac(-2, n)
    rows: dict[int, dict[Alpha, GaussianRational]] = {}
    for alpha in monomials_up_to(n, 2 * r_out + 2):
        mono = WeightedJet.monomial(p.vars, alpha)
        term1 = lam.apply(mono).nu_derive()
        term2 = lam.apply(dw * mono)
        val = (term1 - term2).shift(1) * scale
        fact = multi_factorial(alpha)
        for r, c in val.coeffs.items():
            if r > r_out:
                continue
            row = rows.setdefault(r, {})
            row[alpha] = c / fact
    return PointDistribution(p.vars, rows, r_out)


def strong_defect(lam: PointDistribution, p: PhasePair) -> LaurentScalar:
    """a(nu) with transformed(1) = a(nu) Lambda(1); equals 1 for strong pairs."""
    if lam.vars != p.vars:
        raise InconsistentSystemError("functional and pair live on different charts")
    one = WeightedJet.const(p.vars, grat(1))
    dw = p.combined().nu_derive()
    base = lam.apply(one)
    transformed = (base.nu_derive() - lam.apply(dw)).shift(1) * gfrac(-2, p.n)
    return transformed / base


def strong_normalize(lam: PointDistribution, p: PhasePair) -> LaurentScalar:
    """The phase shift b(nu) that makes the pair strong.

    Requires the defect a(nu) to lead with 1; then the shifted pair
    shift_phase(p, b) has defect 1, with b_r = -(n/2) a_r / r for r >= 1.
    """
    a = strong_defect(lam, p)
    if a.coeff(0) != grat(1):
        raise InconsistentSystemError(
            "defect does not lead with 1; pair cannot be normalized by a shift"
        )
    n = p.n
    coeffs = {
        r: c * gfrac(-n, 2 * r) for r, c in a.coeffs.items() if r >= 1
    }
    return LaurentScalar(coeffs, a.trunc)


@dataclass(frozen=True)
class RankCertificate:
    """Leading principal minors of the Gram pairing up to monomial degree d."""

    degree: int
    basis: tuple[Alpha, ...]
    minors: tuple[LaurentScalar, ...]
    full_rank: bool


def pairing_rank(lam: PointDistribution, d: int) -> RankCertificate:
    """Certify nondegeneracy of M_{alpha beta} = Lambda(x^{alpha+beta}), degrees <= d.

    Minors are exact Laurent series; a minor that vanishes through a finite
    truncation is inconclusive and raises rather than certifying.
    """
    n = len(lam.vars)
    zero_alpha = (0,) * n
    row0 = lam.row(0)
    if list(row0) != [zero_alpha] or not row0[zero_alpha]:
        raise InconsistentSystemError("leading row must be a nonzero multiple of delta")
    basis = tuple(monomials_up_to(n, d))
    size = len(basis)
    gram = []
    for a in basis:
        row = []
        for b in basis:
            mono = WeightedJet.monomial(
                lam.vars, tuple(a[i] + b[i] for i in range(n))
            )
            row.append(lam.apply(mono))
        gram.append(row)
    minors = []
    zero = LaurentScalar.zero()
    one = LaurentScalar.coerce(grat(1))
    for k in range(1, size + 1):
        sub = [row[:k] for row in gram[:k]]
        det = subset_det(sub, zero, one)
        if det.is_zero:
            if det.trunc >= T_EXACT:
                return RankCertificate(d, basis, tuple(minors), False)
            raise TruncationError(
                f"minor {k} vanishes through nu^{det.trunc}; "
                "truncation too low to certify rank"
            )
        minors.append(det)
    return RankCertificate(d, basis, tuple(minors), True)


@dataclass(frozen=True)
class NormConstant:
    """A constant of the closed form c (2 pi)^{k/2} e^{g}, multiplied exactly."""

    c: GaussianRational
    two_pi_half: int = 0
    exp_arg: GaussianRational = grat(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", GaussianRational.coerce(self.c))
        object.__setattr__(self, "exp_arg", GaussianRational.coerce(self.exp_arg))

    @staticmethod
    def coerce(value) -> "NormConstant":
        if isinstance(value, NormConstant):
            return value
        return NormConstant(GaussianRational.coerce(value))

    def mul(self, other: "NormConstant") -> "NormConstant":
        return NormConstant(
            self.c * other.c,
            self.two_pi_half + other.two_pi_half,
            self.exp_arg + other.exp_arg,
        )

    def truediv(self, other: "NormConstant") -> "NormConstant":
        return NormConstant(
            self.c / other.c,
            self.two_pi_half - other.two_pi_half,
            self.exp_arg - other.exp_arg,
        )

    def value(self) -> complex:
        if not self.exp_arg.is_real:
            raise RealityError("cannot evaluate a complex exponent numerically")
        return (
            complex(self.c)
            * (2.0 * math.pi) ** (self.two_pi_half / 2.0)
            * math.exp(float(self.exp_arg.re))
        )

    def __str__(self) -> str:
        parts = [f"({self.c})"]
        if self.two_pi_half:
            exp = (
                str(self.two_pi_half // 2)
                if self.two_pi_half % 2 == 0
                else f"{self.two_pi_half}/2"
            )
            parts.append(f"(2pi)^{exp}")
        if self.exp_arg:
            parts.append(f"exp({self.exp_arg})")
        return " ".join(parts)


def hermitian_model_constant(p: PhasePair, tau) -> NormConstant:
    """Normalization alpha = e^{gamma} lambda for a complex-type pair.

    gamma is the constant term of (phi_0 + u_0); lambda = m! (2 pi)^m tau
    divided by the top coefficient of Omega^m against the separated ordering
    dz^1...dz^m dzb^1...dzb^m, where Omega is the (1,1)-form -i H_{pq}
    dz^p dzb^q built from the Hermitian Hessian of the nu^{-1} phase.
    """
    if p.complex_pairs is None:
        raise HermitianTypeError("pair does not declare a complex structure")
    red = p.reduced()
    m = len(p.complex_pairs)
    n = p.n
    idx = {name: i for i, name in enumerate(p.vars)}
    holo = [idx[a] for a, _ in p.complex_pairs]
    anti = [idx[b] for _, b in p.complex_pairs]
    low = red.phase.nu_component(-1)

    def second(i: int, j: int) -> GaussianRational:
        alpha = tuple(
            (1 if k == i else 0) + (1 if k == j else 0) for k in range(n)
        )
        c = low.coeff(alpha, 0)
        return c + c if i == j else c

    for block in (holo, anti):
        for i in block:
            for j in block:
                if second(i, j):
                    raise HermitianTypeError(
                        "nu^{-1} phase is not of Hermitian type: "
                        "pure holomorphic or antiholomorphic second derivatives"
                    )
    hmat = [[second(holo[a], anti[b]) for b in range(m)] for a in range(m)]
    if not mat_det(_freeze_matrix(hmat)):
        raise SingularHessianError("Hermitian Hessian is degenerate")
    form = [
        (a, m + b, -(IMAG * hmat[a][b]))
        for a in range(m)
        for b in range(m)
        if hmat[a][b]
    ]
    top = top_coefficient(form_power(form, m, grat(1)), 2 * m)
    if top is None or not top:
        raise SingularHessianError("top wedge power of the Hessian form vanishes")
    gamma = red.phase.nu_component(0).coeff((0,) * n, 0)
    lam = NormConstant(grat(math.factorial(m)), 2 * m).mul(
        NormConstant.coerce(tau)
    ).truediv(NormConstant(top))
    return lam.mul(NormConstant(grat(1), 0, gamma))


@dataclass(frozen=True)
class RealModelMagnitude:
    """|alpha| for a real-type pair; the phase of alpha stays undetermined."""

    magnitude: float
    sign_ambiguous: bool = True


def real_model_constant_numeric(p: PhasePair) -> RealModelMagnitude:
    """|alpha| = (2 pi)^{n/2} e^{u_0(0)} / sqrt(|det(-h)|) for real data."""
    red = p.reduced()
    hd, _, _ = phase_split(red)
    if any(
        not c.is_real for c in list(p.phase.terms.values())
        + list(p.logdensity.terms.values())
    ):
        raise RealityError("real-model normalization needs real phase data")
    gamma = red.phase.nu_component(0).coeff((0,) * p.n, 0)
    neg_h = tuple(tuple(-c for c in row) for row in hd.h)
    det = mat_det(neg_h)
    magnitude = (
        (2.0 * math.pi) ** (p.n / 2.0)
        * math.exp(float(gamma.re))
        / math.sqrt(abs(float(det.re)))
    )
    return RealModelMagnitude(magnitude)
