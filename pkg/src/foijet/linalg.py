"""Exact linear algebra on the small matrices the engine meets.

Matrices are plain lists of lists.  Entries are GaussianRational for
numeric matrices (Hessians, metrics) or WeightedJet for matrix-valued jets
(variable metrics).  Dimensions here are the chart dimension, so cubic
cost algorithms and permutation expansions are fine.
"""
from __future__ import annotations

from itertools import permutations
from typing import Callable, Sequence, TypeVar

from .errors import FiltrationError, SingularMatrixError
from .jets import WeightedJet
from .rational import GaussianRational, grat

Matrix = list[list[GaussianRational]]
T = TypeVar("T")


def mat_identity(n: int) -> Matrix:
    return [[grat(1 if i == j else 0) for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    return [
        [sum((a[i][t] * b[t][j] for t in range(k)), grat(0)) for j in range(m)]
        for i in range(n)
    ]


def mat_det(a: Matrix) -> GaussianRational:
    n = len(a)
    total = grat(0)
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        prod = grat(sign)
        for i, j in enumerate(perm):
            prod = prod * a[i][j]
        total = total + prod
    return total


def mat_inv(a: Matrix) -> Matrix:
    n = len(a)
    work = [[a[i][j] for j in range(n)] + [grat(1 if i == j else 0) for j in range(n)]
            for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col]), None)
        if pivot is None:
            raise SingularMatrixError(f"singular {n}x{n} matrix")
        work[col], work[pivot] = work[pivot], work[col]
        inv = work[col][col].inverse()
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r == col or not work[r][col]:
                continue
            factor = work[r][col]
            work[r] = [v - factor * w for v, w in zip(work[r], work[col])]
    return [row[n:] for row in work]


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# -- matrices of jets -------------------------------------------------------

JetMatrix = list[list[WeightedJet]]


def jmat_constant_part(m: JetMatrix) -> Matrix:
    return [[e.terms.get(((0,) * len(e.vars), 0), grat(0)) for e in row] for row in m]


def jmat_mul(a: JetMatrix, b: JetMatrix) -> JetMatrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def jmat_det(m: JetMatrix) -> WeightedJet:
    n = len(m)
    acc = None
    for perm in permutations(range(n)):
        prod = m[0][perm[0]]
        for i in range(1, n):
            prod = prod * m[i][perm[i]]
        prod = prod.scale(_perm_sign(perm))
        acc = prod if acc is None else acc + prod
    assert acc is not None
    return acc


def jmat_inv(m: JetMatrix, trunc: int) -> JetMatrix:
    """Inverse of a jet matrix whose constant part is invertible.

    Neumann series around the constant part; the variable part must have
    filtration >= 1 so the series terminates at the requested weight.
    """
    n = len(m)
    vars = m[0][0].vars
    m = [[e.truncate(trunc) for e in row] for row in m]
    const = jmat_constant_part(m)
    inv0_num = mat_inv(const)
    inv0 = [[WeightedJet.const(vars, inv0_num[i][j], trunc) for j in range(n)]
            for i in range(n)]
    delta = [
        [m[i][j] - WeightedJet.const(vars, const[i][j], trunc) for j in range(n)]
        for i in range(n)
    ]
    for row in delta:
        for e in row:
            if not e.is_zero and e.filt < 1:
                raise FiltrationError("jet matrix inverse needs variable part of filtration >= 1")
    # X = sum_k (-inv0 delta)^k inv0
    step = [[(-(jmat_mul(inv0, delta)[i][j])) for j in range(n)] for i in range(n)]
    out = [row[:] for row in inv0]
    power = [row[:] for row in inv0]
    while True:
        power = [[e.truncate(trunc) for e in row] for row in jmat_mul(step, power)]
        if all(e.is_zero for row in power for e in row):
            break
        out = [[out[i][j] + power[i][j] for j in range(n)] for i in range(n)]
    return out


# -- division-free determinant over a commutative ring ----------------------


def subset_det(m: Sequence[Sequence[T]], zero: T, one: T) -> T:
    """Determinant by dynamic programming over column subsets.

    Only ring addition and multiplication are used, so truncation-tracking
    series go through without divisions.
    """
    n = len(m)
    if n == 0:
        return one
    states: dict[int, T] = {0: one}
    for i in range(n):
        nxt: dict[int, T] = {}
        for mask, val in states.items():
            for j in range(n):
                bit = 1 << j
                if mask & bit:
                    continue
                sign = -1 if bin(mask >> (j + 1)).count("1") % 2 else 1
                term = val * m[i][j]
                if sign < 0:
                    term = -term
                key = mask | bit
                nxt[key] = nxt.get(key, zero) + term if key in nxt else term
        states = nxt
    return states[(1 << n) - 1]
