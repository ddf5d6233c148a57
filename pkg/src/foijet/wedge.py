"""Exact exterior algebra on a small model space.

Multivectors are dicts from bitmasks (one bit per basis 1-form) to
coefficients.  Only what the engine needs: wedging 2-forms into an
accumulated multivector, with exact signs.  Coefficients are anything with
ring arithmetic (GaussianRational in the normalization code, plain ints in
the large multinomial checks).
"""
from __future__ import annotations

from typing import Sequence, TypeVar

C = TypeVar("C")

TwoForm = Sequence[tuple[int, int, C]]


def wedge_two_form(state: dict[int, C], form: TwoForm) -> dict[int, C]:
    """Wedge a 2-form (list of (u, v, coeff) with u < v) onto a multivector."""
    out: dict[int, C] = {}
    for mask, val in state.items():
        for u, v, c in form:
            bu, bv = 1 << u, 1 << v
            if mask & bu or mask & bv:
                continue
            sign = bin(mask >> (u + 1)).count("1")
            sign += bin((mask | bu) >> (v + 1)).count("1")
            term = val * c
            if sign % 2:
                term = -term
            key = mask | bu | bv
            out[key] = out[key] + term if key in out else term
    return {k: v for k, v in out.items() if v}


def form_power(form: TwoForm, power: int, one: C) -> dict[int, C]:
    """The wedge power form^power as a multivector, starting from scalar one."""
    state: dict[int, C] = {0: one}
    for _ in range(power):
        state = wedge_two_form(state, form)
        if not state:
            break
    return state


def top_coefficient(state: dict[int, C], dim: int) -> C | None:
    """Coefficient of the full wedge e_0 ^ ... ^ e_{dim-1}, if present."""
    return state.get((1 << dim) - 1)
