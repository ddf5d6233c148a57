"""Star products with separation of variables on a formal Kaehler chart.

The chart carries holomorphic variables z^1..z^m and antiholomorphic
zb^1..zb^m, treated as independent, and a real potential Phi with nu-levels
starting at -1 whose mixed Hessian G_{kl} = d_{z^k} d_{zb^l} Phi_{-1} is
invertible at the origin.

Left star-multiplication by f is a differential operator in the z-derivatives
only, right multiplication differentiates in zb only; consequently
f * g = f g whenever f is antiholomorphic-free on the right or g is
holomorphic-free on the left (the separation property).  The operators are
pinned down by commutation with the multiplication generators

    d_{zb^l} Phi + d_{zb^l}      (for left operators)
    d_{z^k} Phi  + d_{z^k}       (for right operators)

together with A(1) = f, and are solved order by order: at each nu-level the
coefficients of a given derivative degree satisfy m x m linear systems over
the function ring with matrix (gamma_k + 1) G_{kl}.  Overlapping systems are
cross-checked and the boundary equations (those whose unknowns must vanish
by the derivative-order bound) are verified, so an inconsistent input fails
loudly instead of producing a wrong product.

Conventions fixed here once and used everywhere:

* the Poisson bracket induced by the leading form is
  {f, g} = i ginv^{lk} (df/dz^k dg/dzb^l - df/dzb^l dg/dz^k),
  the sign chosen so that C1(f, g) - C1(g, f) = i {f, g};
* the Berezin-style transform is I(f) = sum zb^b * z^a per monomial, with
  inverse computed as a nu-adically convergent fixed point;
* the dual potential Psi solves dPsi/dz^k = -I^{-1}(dPhi/dz^k), is real,
  has Psi_0(0) = 0, and its nu-constants are pinned by
  dPhi/dnu + I(dPsi/dnu) = m/nu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    InconsistentSystemError,
    IntegrabilityError,
    RealityError,
    SingularMatrixError,
    TruncationError,
    VariableMismatchError,
)
from .jets import (
    Alpha,
    LaurentScalar,
    T_EXACT,
    WeightedJet,
    monomials_exact,
)
from .linalg import jmat_inv, mat_det, jmat_det
from .operators import DiffOperator
from .rational import IMAG, GaussianRational, grat
from .foi import NormConstant
from .wedge import form_power, top_coefficient


def _binom_multi(gamma: Alpha, beta: Alpha) -> int:
    out = 1
    for g, b in zip(gamma, beta):
        out *= math.comb(g + b, b)
    return out


@dataclass(frozen=True)
class KahlerPotential:
    """Potential data of a separation-of-variables chart.

    ``jet`` lives over ``hol + anti`` and must be real under conjugation
    (coefficients conjugated, z and zb swapped); its nu^{-1} mixed Hessian
    at the origin must be invertible.
    """

    hol: tuple[str, ...]
    anti: tuple[str, ...]
    jet: WeightedJet

    def __post_init__(self) -> None:
        object.__setattr__(self, "hol", tuple(self.hol))
        object.__setattr__(self, "anti", tuple(self.anti))
        if len(self.hol) != len(self.anti) or not self.hol:
            raise VariableMismatchError("need matching z and zb variable lists")
        if self.jet.vars != self.vars:
            raise VariableMismatchError(
                f"potential over {self.jet.vars}, chart is {self.vars}"
            )
        if any(r < -1 for _, r in self.jet.terms):
            raise InconsistentSystemError("potential has nu-levels below -1")
        if self.jet.conj_swap(self.pairing()) != self.jet:
            raise RealityError("potential is not real under conjugation")
        g0 = [
            [
                self.jet.nu_component(-1).coeff(self._mixed_alpha(k, l), 0)
                for l in range(self.m)
            ]
            for k in range(self.m)
        ]
        if not mat_det(g0):
            raise SingularMatrixError("metric is degenerate at the origin")
        object.__setattr__(self, "_cache", {})

    def _mixed_alpha(self, k: int, l: int) -> Alpha:
        m = self.m
        return tuple(
            (1 if i == k else 0) + (1 if i == m + l else 0) for i in range(2 * m)
        )

    @property
    def m(self) -> int:
        return len(self.hol)

    @property
    def vars(self) -> tuple[str, ...]:
        return self.hol + self.anti

    def pairing(self) -> dict[str, str]:
        return dict(zip(self.hol, self.anti))

    @staticmethod
    def flat(m: int) -> "KahlerPotential":
        hol = tuple(f"z{i + 1}" for i in range(m))
        anti = tuple(f"zb{i + 1}" for i in range(m))
        vars = hol + anti
        terms = {}
        for i in range(m):
            alpha = tuple(
                (1 if j == i else 0) + (1 if j == m + i else 0)
                for j in range(2 * m)
            )
            terms[(alpha, -1)] = grat(1)
        return KahlerPotential(hol, anti, WeightedJet(vars, terms, T_EXACT, 0))

    def metric(self) -> list[list[WeightedJet]]:
        """G_{kl} = d_{z^k} d_{zb^l} of the nu^{-1} level, as function jets."""
        if "metric" not in self._cache:
            low = self.jet.nu_component(-1)
            self._cache["metric"] = [
                [low.derive(zk).derive(zl) for zl in self.anti]
                for zk in self.hol
            ]
        return self._cache["metric"]

    def metric_inverse(self, trunc: int) -> list[list[WeightedJet]]:
        key = ("metric_inv", trunc)
        if key not in self._cache:
            self._cache[key] = jmat_inv(self.metric(), trunc)
        return self._cache[key]

    def constant_metric(self) -> list[list[GaussianRational]]:
        low = self.jet.nu_component(-1)
        return [
            [low.coeff(self._mixed_alpha(k, l), 0) for l in range(self.m)]
            for k in range(self.m)
        ]


def _jet_key(f: WeightedJet) -> tuple:
    return (f.render(), f.trunc, f.filt)


def _sov_op(kp: KahlerPotential, f: WeightedJet, sigma: int, side: str) -> DiffOperator:
    """Multiplication operator of f, exact as a weight shift up to sigma.

    side "left" gives the left-multiplication operator (z-derivatives);
    side "right" the right one (zb-derivatives).  Coefficients at nu-level r
    and derivative degree |alpha| are guaranteed to degree
    sigma - 2r + |alpha|; the derivative order never exceeds r - r0 where r0
    is the lowest nu-level of f.
    """
    if f.vars != kp.vars:
        raise VariableMismatchError(f"jet over {f.vars}, chart is {kp.vars}")
    cache_key = ("op", side, _jet_key(f), sigma)
    if cache_key in kp._cache:
        return kp._cache[cache_key]
    m = kp.m
    vars = kp.vars
    if f.is_zero:
        return DiffOperator(vars, (), sigma)
    deriv = kp.hol if side == "left" else kp.anti
    gen = kp.anti if side == "left" else kp.hol
    deriv_off = 0 if side == "left" else m

    def full_beta(beta: Alpha) -> Alpha:
        out = [0] * (2 * m)
        for i, e in enumerate(beta):
            out[deriv_off + i] = e
        return tuple(out)

    r0 = min(r for _, r in f.terms)
    r_max = sigma - r0
    # generators: w_l = d_{gen_l} Phi, split by nu-level
    w_levels: list[dict[int, WeightedJet]] = []
    for name in gen:
        wl = kp.jet.derive(name)
        w_levels.append({j: wl.nu_component(j) for j in wl.nu_levels()})
    # system matrix M[l][k] = d_{deriv_k} w_l^{(-1)}; its inverse acts on RHS
    system = [
        [w_levels[l].get(-1, WeightedJet.zero(vars)).derive(deriv[k])
         for k in range(m)]
        for l in range(m)
    ]
    trunc_inv = sigma - 2 * min(r0, 0) + 2
    inv_key = ("sysinv", side, trunc_inv)
    if inv_key not in kp._cache:
        kp._cache[inv_key] = jmat_inv(system, trunc_inv)
    minv = kp._cache[inv_key]

    coeffs: dict[tuple[int, Alpha], WeightedJet] = {}

    def rhs_for(r: int, gamma: Alpha, l: int) -> WeightedJet:
        prev = coeffs.get((r - 1, gamma))
        acc = prev.derive(gen[l]) if prev is not None else WeightedJet.zero(vars)
        for (rr, alpha), a in coeffs.items():
            if not all(x >= y for x, y in zip(alpha, gamma)):
                continue
            beta = tuple(x - y for x, y in zip(alpha, gamma))
            db = sum(beta)
            if db == 0:
                continue
            j = r - 1 - rr
            if j == -1 and db == 1:
                continue
            wj = w_levels[l].get(j)
            if wj is None:
                continue
            term = a * wj.derive_multi(full_beta(beta))
            acc = acc - term.scale(_binom_multi(gamma, beta))
        return acc

    zero_gamma = (0,) * m
    for r in range(r0, r_max + 1):
        coeffs[(r, zero_gamma)] = f.nu_component(r)
        deg_cap = r - r0
        # solving top-down in degree keeps the same-level couplings (the
        # |beta| >= 2 terms of the generator) on the known side
        for d in range(deg_cap - 1, -1, -1):
            for gamma in monomials_exact(m, d):
                rhs = [rhs_for(r, gamma, l) for l in range(m)]
                for k in range(m):
                    acc = minv[k][0] * rhs[0]
                    for l in range(1, m):
                        acc = acc + minv[k][l] * rhs[l]
                    val = acc.scale(Fraction(1, gamma[k] + 1))
                    key = (r, tuple(
                        g + (1 if i == k else 0) for i, g in enumerate(gamma)
                    ))
                    if key in coeffs:
                        if coeffs[key] != val:
                            raise InconsistentSystemError(
                                f"overlapping systems disagree at level {r}, "
                                f"derivative {key[1]}"
                            )
                        # keep the better-resolved jet
                        if val.trunc > coeffs[key].trunc:
                            coeffs[key] = val
                    else:
                        coeffs[key] = val
    # drop coefficients that cannot influence anything within the shift budget
    terms = []
    for (r, alpha), a in coeffs.items():
        if a.is_zero:
            continue
        budget = sigma - 2 * r + sum(alpha)
        if budget < 0:
            continue
        if a.trunc < budget:
            raise TruncationError(
                "potential data too shallow for the requested operator",
                required=budget,
            )
        terms.append((r, full_beta(alpha), a))
    op = DiffOperator(vars, tuple(terms), sigma)
    kp._cache[cache_key] = op
    return op


def left_mult(kp: KahlerPotential, f: WeightedJet, order: int) -> DiffOperator:
    """Left star-multiplication operator of f with nu-levels up to order."""
    if f.is_zero:
        return DiffOperator(kp.vars, (), order)
    r0 = min(r for _, r in f.terms)
    return _sov_op(kp, f, order + r0, "left")


def right_mult(kp: KahlerPotential, f: WeightedJet, order: int) -> DiffOperator:
    """Right star-multiplication operator of f with nu-levels up to order."""
    if f.is_zero:
        return DiffOperator(kp.vars, (), order)
    r0 = min(r for _, r in f.terms)
    return _sov_op(kp, f, order + r0, "right")


def star_w(kp: KahlerPotential, f: WeightedJet, g: WeightedJet,
           weight: int) -> WeightedJet:
    """f * g exact to total weight ``weight``."""
    if f.is_zero or g.is_zero:
        return WeightedJet.zero(kp.vars, weight)
    op = _sov_op(kp, f, weight - g.filt, "left")
    return op.apply(g).truncate(weight)


def _star_weight(order: int, *jets: WeightedJet) -> int:
    return 2 * order + sum(j.max_degree() for j in jets)


def star(kp: KahlerPotential, f: WeightedJet, g: WeightedJet,
         order: int) -> WeightedJet:
    """f * g with every term of nu-level <= order exact."""
    return star_w(kp, f, g, _star_weight(order, f, g))


def berezin(kp: KahlerPotential, f: WeightedJet, order: int,
            direction: str = "forward") -> WeightedJet:
    """The transform I (monomial-wise zb^b * z^a) or its nu-adic inverse."""
    weight = _star_weight(order, f)
    if direction == "forward":
        return _berezin_forward(kp, f, weight)
    if direction == "inverse":
        return _berezin_inverse(kp, f, weight)
    raise ValueError(f"unknown direction {direction!r}")


def _berezin_forward(kp: KahlerPotential, f: WeightedJet, weight: int) -> WeightedJet:
    m = kp.m
    vars = kp.vars
    acc = WeightedJet.zero(vars, weight)
    for (alpha, s), c in f.terms.items():
        a, b = alpha[:m], alpha[m:]
        za = WeightedJet.monomial(vars, a + (0,) * m)
        zbb = WeightedJet.monomial(vars, (0,) * m + b)
        piece = star_w(kp, zbb, za, weight - 2 * s)
        acc = acc + piece.nu_mul(s).scale(c)
    return acc


def _berezin_inverse(kp: KahlerPotential, g: WeightedJet, weight: int) -> WeightedJet:
    f = g.truncate(weight)
    err = _berezin_forward(kp, f, weight) - f
    # err = I(f) - g; each sweep raises its lowest nu-level, and the weight
    # cap then empties it after finitely many sweeps
    guard = 0
    while not err.is_zero:
        if guard > weight + 2:
            raise InconsistentSystemError("inverse transform failed to converge")
        f = f - err
        err = -(_berezin_forward(kp, err, weight) - err)
        guard += 1
    return f


def star_prime(kp: KahlerPotential, f: WeightedJet, g: WeightedJet,
               order: int) -> WeightedJet:
    """The dual product: I^{-1}(I(f) * I(g))."""
    weight = _star_weight(order, f, g)
    fi = _berezin_forward(kp, f, weight)
    gi = _berezin_forward(kp, g, weight)
    return _berezin_inverse(kp, star_w(kp, fi, gi, weight), weight)


# ---------------------------------------------------------------------------
# dual potential, trace density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualPotential:
    """Psi with dPsi/dz^k = -I^{-1}(dPhi/dz^k), real, Psi_0(0) = 0, and
    nu-constants pinned by dPhi/dnu + I(dPsi/dnu) = m/nu."""

    psi: WeightedJet
    gradients: tuple[WeightedJet, ...]
    psinu_residual: WeightedJet


def dual_potential(kp: KahlerPotential, weight: int) -> DualPotential:
    cache_key = ("dual", weight)
    if cache_key in kp._cache:
        return kp._cache[cache_key]
    m = kp.m
    vars = kp.vars
    grads = []
    for name in kp.hol:
        gk = kp.jet.derive(name).truncate(weight - 1)
        grads.append(-_berezin_inverse(kp, gk, weight - 1))
    for k in range(m):
        for l in range(k + 1, m):
            if grads[k].derive(kp.hol[l]) != grads[l].derive(kp.hol[k]):
                raise IntegrabilityError(
                    f"gradient system is not symmetric in z^{k + 1}, z^{l + 1}"
                )
    psi_terms: dict[tuple[Alpha, int], GaussianRational] = {}
    for k in range(m):
        for (alpha, s), c in grads[k].terms.items():
            target = list(alpha)
            target[k] += 1
            key = (tuple(target), s)
            val = c / (alpha[k] + 1)
            if key in psi_terms:
                if psi_terms[key] != val:
                    raise IntegrabilityError(
                        "inconsistent coefficients while integrating the gradient"
                    )
            else:
                psi_terms[key] = val
    trunc = min(g.trunc + 1 for g in grads) if grads else weight
    trunc = min(trunc, weight)
    psi = WeightedJet(vars, psi_terms, trunc, min(0, trunc))
    # terms free of z are invisible to the gradients; reality supplies them
    mirror = psi.conj_swap(kp.pairing())
    missing = {
        (alpha, s): c
        for (alpha, s), c in mirror.terms.items()
        if not any(alpha[:m])
    }
    psi = psi + WeightedJet(vars, missing, trunc, min(0, trunc))
    if psi.conj_swap(kp.pairing()) != psi:
        raise RealityError("integrated dual potential is not real")
    # nu-dependent constants from the normalization identity
    excess = (
        kp.jet.nu_derive()
        + _berezin_forward(kp, psi.nu_derive(), trunc - 2)
        - WeightedJet.from_scalar(LaurentScalar({-1: grat(m)}), vars)
    )
    zero_alpha = (0,) * (2 * m)
    for (alpha, s), c in excess.terms.items():
        if alpha != zero_alpha and c:
            raise InconsistentSystemError(
                "normalization excess is not a constant in the chart variables"
            )
    const_fix = {}
    for (_alpha, s), c in excess.terms.items():
        level = s + 1
        if level == 0:
            raise InconsistentSystemError(
                "normalization excess has a nu^{-1} term; no constant fixes it"
            )
        const_fix[(zero_alpha, level)] = -c / level
    if const_fix:
        psi = psi + WeightedJet(vars, const_fix, trunc, min(0, trunc))
    residual = (
        kp.jet.nu_derive()
        + _berezin_forward(kp, psi.nu_derive(), trunc - 2)
        - WeightedJet.from_scalar(LaurentScalar({-1: grat(m)}), vars)
    )
    out = DualPotential(psi, tuple(grads), residual)
    kp._cache[cache_key] = out
    return out


@dataclass(frozen=True)
class TraceDensity:
    """Trace data: density exponent Phi + Psi and the matching constant.

    The full density is prefactor nu^{-m} e^{log_density} against the
    separated top form dz^1..dz^m dzb^1..dzb^m; the prefactor normalizes its
    leading coefficient at the origin to that of (omega_{-1}/2 pi nu)^m / m!.
    identity_residual is the x-dependent part of
    (Phi_0 + Psi_0) - log det(G ginv(0)), which vanishes for consistent data.
    """

    log_density: WeightedJet
    prefactor: NormConstant
    psi: WeightedJet
    identity_residual: WeightedJet


def trace_density(kp: KahlerPotential, weight: int) -> TraceDensity:
    m = kp.m
    dual = dual_potential(kp, weight)
    log_density = kp.jet.truncate(weight) + dual.psi
    g0 = kp.constant_metric()
    form = [
        (p, m + q, IMAG * g0[p][q])
        for p in range(m)
        for q in range(m)
        if g0[p][q]
    ]
    top = top_coefficient(form_power(form, m, grat(1)), 2 * m)
    if top is None or not top:
        raise SingularMatrixError("leading form has no top power")
    gamma0 = log_density.nu_component(0).coeff((0,) * (2 * m), 0)
    prefactor = NormConstant(
        top / math.factorial(m), -2 * m, -gamma0
    )
    # x-dependence identity for the nu^0 level
    level0 = log_density.nu_component(0)
    detg = jmat_det(kp.metric()).truncate(max(weight, 0))
    det0 = detg.terms.get(((0,) * (2 * m), 0), grat(0))
    ratio = detg.scale(det0.inverse())
    resid = level0 - ratio.log()
    resid = resid - WeightedJet.const(
        kp.vars, resid.terms.get(((0,) * (2 * m), 0), grat(0)), resid.trunc
    )
    return TraceDensity(log_density, prefactor, dual.psi, resid)


# ---------------------------------------------------------------------------
# derivations and the bracket
# ---------------------------------------------------------------------------


def poisson_bracket(kp: KahlerPotential, f: WeightedJet, g: WeightedJet,
                    weight: int | None = None) -> WeightedJet:
    """{f, g} = i ginv^{lk} (d_k f dbar_l g - dbar_l f d_k g)."""
    if weight is None:
        weight = f.max_degree() + g.max_degree()
    ginv = kp.metric_inverse(weight)
    m = kp.m
    acc = WeightedJet.zero(kp.vars, weight)
    for k in range(m):
        for l in range(m):
            part = (
                f.derive(kp.hol[k]) * g.derive(kp.anti[l])
                - f.derive(kp.anti[l]) * g.derive(kp.hol[k])
            )
            acc = acc + (ginv[l][k] * part)
    return acc.scale(IMAG).truncate(weight)


@dataclass(frozen=True)
class DerivationReport:
    """Residuals of the canonical derivation identities; all vanish when the
    chart data is consistent."""

    left_leibniz: WeightedJet
    right_leibniz: WeightedJet
    transform_intertwine: WeightedJet

    @property
    def ok(self) -> bool:
        return (
            self.left_leibniz.is_zero
            and self.right_leibniz.is_zero
            and self.transform_intertwine.is_zero
        )


def derivation_suite(kp: KahlerPotential, f: WeightedJet, g: WeightedJet,
                     order: int) -> DerivationReport:
    """Check the nu-derivations against the product structure.

    delta_l(x) = dx/dnu + w x - w * x with w = dPhi/dnu is a derivation of
    the product (left form); delta_r uses x w - x * w.  The dual-side
    derivation with Psi intertwines with the transform:
    delta_r(I(f)) = I(delta'_l(f)).
    """
    w = kp.jet.nu_derive()
    weight = _star_weight(order, f, g) + 2 * max(
        1, w.max_degree() // 2
    )

    def delta_l(x: WeightedJet) -> WeightedJet:
        return x.nu_derive() + w * x - star_w(kp, w, x, weight)

    def delta_r(x: WeightedJet) -> WeightedJet:
        op = _sov_op(kp, w, weight - x.filt, "right")
        return x.nu_derive() + x * w - op.apply(x).truncate(weight)

    fg = star_w(kp, f, g, weight)
    left = delta_l(fg) - star_w(kp, delta_l(f), g, weight) - star_w(
        kp, f, delta_l(g), weight
    )
    right = delta_r(fg) - star_w(kp, delta_r(f), g, weight) - star_w(
        kp, f, delta_r(g), weight
    )
    dual = dual_potential(kp, weight + 2)
    wt = dual.psi.nu_derive()

    def delta_lp(x: WeightedJet) -> WeightedJet:
        prod = _berezin_inverse(
            kp,
            star_w(
                kp,
                _berezin_forward(kp, wt, weight),
                _berezin_forward(kp, x, weight),
                weight,
            ),
            weight,
        )
        return x.nu_derive() + wt * x - prod

    fid = _berezin_forward(kp, f, weight)
    inter = delta_r(fid) - _berezin_forward(kp, delta_lp(f), weight - 2)
    return DerivationReport(left, right, inter)
