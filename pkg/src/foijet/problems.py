"""Exact JSON descriptions of jets, phase pairs, and chart potentials.

A term is {"exponents": [..], "nu": r, "coeff": {"re": "p/q", "im": "p/q"}}
with coefficients given as exact fraction strings (plain integers are also
accepted, "im" may be omitted).  A jet object carries "variables", an
optional positive "truncation", and a "terms" list; a pair object replaces
"terms" with "phase" and optional "logdensity" and "complex_pairs"; a
potential object uses "hol", "anti", and "potential".  Rendering is
canonical: terms sorted, every coefficient emitted as a fraction string
with both parts, so equal objects serialize identically.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .errors import FoijetError, ParseError
from .foi import PhasePair
from .jets import T_EXACT, WeightedJet
from .rational import GaussianRational
from .sepvars import KahlerPotential


def _expect(cond: bool, message: str, field: str) -> None:
    if not cond:
        raise ParseError(message, field)


def _parse_fraction(value: Any, field: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError("expected an integer or a fraction string", field)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad fraction: {exc}", field) from None


def parse_coeff(obj: Any, field: str) -> GaussianRational:
    _expect(isinstance(obj, dict), "coeff must be an object", field)
    unknown = set(obj) - {"re", "im"}
    _expect(not unknown, f"unknown coeff keys {sorted(unknown)}", field)
    re = _parse_fraction(obj.get("re", 0), f"{field}.re")
    im = _parse_fraction(obj.get("im", 0), f"{field}.im")
    return GaussianRational(re, im)


def _parse_names(obj: Any, field: str) -> tuple[str, ...]:
    _expect(isinstance(obj, list) and obj, "expected a nonempty name list", field)
    names = []
    for i, name in enumerate(obj):
        _expect(isinstance(name, str) and name, "expected a variable name",
                f"{field}[{i}]")
        names.append(name)
    _expect(len(set(names)) == len(names), "variable names repeat", field)
    return tuple(names)


def parse_terms(obj: Any, nvars: int, field: str) -> dict:
    _expect(isinstance(obj, list), "expected a term list", field)
    out: dict = {}
    for i, term in enumerate(obj):
        at = f"{field}[{i}]"
        _expect(isinstance(term, dict), "term must be an object", at)
        unknown = set(term) - {"exponents", "nu", "coeff"}
        _expect(not unknown, f"unknown term keys {sorted(unknown)}", at)
        exps = term.get("exponents")
        _expect(
            isinstance(exps, list) and len(exps) == nvars
            and all(isinstance(e, int) and not isinstance(e, bool) and e >= 0
                    for e in exps),
            f"exponents must be {nvars} nonnegative integers",
            f"{at}.exponents",
        )
        r = term.get("nu", 0)
        _expect(isinstance(r, int) and not isinstance(r, bool),
                "nu level must be an integer", f"{at}.nu")
        c = parse_coeff(term.get("coeff", {}), f"{at}.coeff")
        key = (tuple(exps), r)
        _expect(key not in out, "term repeats an (exponents, nu) key", at)
        if c:
            out[key] = c
    return out


def _parse_trunc(obj: dict, field: str) -> int:
    if "truncation" not in obj:
        return T_EXACT
    t = obj["truncation"]
    _expect(isinstance(t, int) and not isinstance(t, bool),
            "truncation must be an integer", f"{field}.truncation")
    _expect(t > 0, "truncation must be positive", f"{field}.truncation")
    return t


def parse_jet(obj: Any, field: str = "jet",
              variables: tuple[str, ...] | None = None) -> WeightedJet:
    _expect(isinstance(obj, dict), "expected a jet object", field)
    if variables is None:
        variables = _parse_names(obj.get("variables"), f"{field}.variables")
    elif "variables" in obj:
        got = _parse_names(obj["variables"], f"{field}.variables")
        _expect(got == variables,
                f"variables {list(got)} do not match {list(variables)}",
                f"{field}.variables")
    trunc = _parse_trunc(obj, field)
    terms = parse_terms(obj.get("terms", []), len(variables), f"{field}.terms")
    return WeightedJet(variables, terms, trunc, min([0] + [r * 2 for _, r in terms]))


def parse_pair(obj: Any, field: str = "pair") -> PhasePair:
    _expect(isinstance(obj, dict), "expected a pair object", field)
    vars = _parse_names(obj.get("variables"), f"{field}.variables")
    trunc = _parse_trunc(obj, field)
    phase_terms = parse_terms(obj.get("phase"), len(vars), f"{field}.phase")
    _expect(all(r >= -1 for _, r in phase_terms),
            "phase has nu-levels below -1", f"{field}.phase")
    phase = WeightedJet(vars, phase_terms, trunc, -2)
    dens_terms = parse_terms(obj.get("logdensity", []), len(vars),
                             f"{field}.logdensity")
    _expect(all(r >= 0 for _, r in dens_terms),
            "log-density must be regular in nu", f"{field}.logdensity")
    dens = WeightedJet(vars, dens_terms, trunc, 0)
    pairs = None
    if "complex_pairs" in obj:
        raw = obj["complex_pairs"]
        _expect(isinstance(raw, list), "expected a pair list",
                f"{field}.complex_pairs")
        pairs = []
        for i, item in enumerate(raw):
            at = f"{field}.complex_pairs[{i}]"
            _expect(isinstance(item, list) and len(item) == 2
                    and all(isinstance(s, str) for s in item),
                    "expected [holomorphic, antiholomorphic]", at)
            pairs.append((item[0], item[1]))
        pairs = tuple(pairs)
    try:
        return PhasePair(vars, phase, dens, pairs)
    except FoijetError as exc:
        raise ParseError(str(exc), field) from None


def parse_potential(obj: Any, field: str = "potential") -> KahlerPotential:
    _expect(isinstance(obj, dict), "expected a potential object", field)
    hol = _parse_names(obj.get("hol"), f"{field}.hol")
    anti = _parse_names(obj.get("anti"), f"{field}.anti")
    _expect(len(hol) == len(anti), "hol and anti lists differ in length", field)
    trunc = _parse_trunc(obj, field)
    vars = hol + anti
    terms = parse_terms(obj.get("potential"), len(vars), f"{field}.potential")
    _expect(all(r >= -1 for _, r in terms),
            "potential has nu-levels below -1", f"{field}.potential")
    jet = WeightedJet(vars, terms, trunc, -2)
    try:
        return KahlerPotential(hol, anti, jet)
    except FoijetError as exc:
        raise ParseError(str(exc), field) from None


# ---------------------------------------------------------------------------
# canonical rendering
# ---------------------------------------------------------------------------


def render_coeff(c: GaussianRational) -> dict:
    return {"re": str(c.re), "im": str(c.im)}


def render_terms(jet: WeightedJet) -> list[dict]:
    return [
        {"exponents": list(alpha), "nu": r, "coeff": render_coeff(c)}
        for (alpha, r), c in jet.sorted_terms()
    ]


def render_jet(jet: WeightedJet) -> dict:
    out: dict[str, Any] = {"variables": list(jet.vars)}
    if jet.trunc != T_EXACT:
        out["truncation"] = jet.trunc
    out["terms"] = render_terms(jet)
    return out


def render_pair(p: PhasePair) -> dict:
    out: dict[str, Any] = {"variables": list(p.vars)}
    trunc = min(p.phase.trunc, p.logdensity.trunc)
    if trunc != T_EXACT:
        out["truncation"] = trunc
    out["phase"] = render_terms(p.phase)
    if not p.logdensity.is_zero:
        out["logdensity"] = render_terms(p.logdensity)
    if p.complex_pairs is not None:
        out["complex_pairs"] = [list(pair) for pair in p.complex_pairs]
    return out


def render_potential(kp: KahlerPotential) -> dict:
    out: dict[str, Any] = {"hol": list(kp.hol), "anti": list(kp.anti)}
    if kp.jet.trunc != T_EXACT:
        out["truncation"] = kp.jet.trunc
    out["potential"] = render_terms(kp.jet)
    return out


def canonical_json(obj: Any) -> str:
    """Deterministic serialization used for hashing report inputs."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", path) from None
