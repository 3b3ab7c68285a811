"""Toy characteristic-ideal calculus over one-variable Iwasawa algebras.

A torsion module is presented as the cokernel of a square matrix over
O[[T]]; its characteristic ideal is generated by the determinant, read off
through Weierstrass preparation as (mu, lambda, distinguished polynomial).
Additivity along short exact sequences is realized by block-triangular
composition and checked as multiplicativity of determinants.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rings import DomainError, PrecisionExhausted
from .series import TruncSeries, weierstrass_prep

__all__ = [
    "LambdaPresentation",
    "char_ideal",
    "det_series",
    "additivity_check",
    "block_triangular",
]


@dataclass
class LambdaPresentation:
    base: object                 # RingSpec
    matrix: list                 # square, entries TruncSeries over base

    def __post_init__(self):
        n = len(self.matrix)
        for row in self.matrix:
            if len(row) != n:
                raise DomainError("presentation matrix must be square")

    @property
    def size(self):
        return len(self.matrix)

    def to_json(self):
        return {
            "base": self.base.to_json(),
            "matrix": [[e.to_json() for e in row] for row in self.matrix],
        }

    @staticmethod
    def from_json(obj):
        from .rings import RingSpec
        base = RingSpec.from_json(obj["base"])
        mat = [[TruncSeries.from_json(e) for e in row] for row in obj["matrix"]]
        return LambdaPresentation(base, mat)


def det_series(matrix, spec, cap):
    """Determinant by column-subset Laplace expansion with memoization."""
    n = len(matrix)
    if n == 0:
        return TruncSeries.one(spec, cap)
    memo = {}

    def minor(r, mask):
        key = (r, mask)
        if key in memo:
            return memo[key]
        acc = TruncSeries.zero(spec, cap)
        sign = 1
        for c in range(n):
            if not (mask >> c) & 1:
                continue
            entry = matrix[r][c]
            if not entry.is_zero():
                sub = TruncSeries.one(spec, cap) if r == n - 1 \
                    else minor(r + 1, mask & ~(1 << c))
                term = entry * sub
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        memo[key] = acc
        return acc

    return minor(0, (1 << n) - 1)


def char_ideal(pres):
    """Characteristic ideal data of the cokernel: Weierstrass data of det."""
    cap = min(e.cap for row in pres.matrix for e in row)
    d = det_series(pres.matrix, pres.base, cap)
    if d.canonical().is_zero():
        raise PrecisionExhausted("zero determinant at working precision: "
                                 "module is not torsion at this precision")
    return weierstrass_prep(d)


def block_triangular(sub, quot, off=None):
    """Middle term [[A, C], [0, B]] of a short exact sequence of cokernels."""
    if sub.base != quot.base:
        raise DomainError("mixed base rings")
    n1, n2 = sub.size, quot.size
    cap = min(e.cap for row in sub.matrix + quot.matrix for e in row)
    zero = TruncSeries.zero(sub.base, cap)
    mat = []
    for i in range(n1):
        row = list(sub.matrix[i])
        row += [off[i][j] if off else zero for j in range(n2)]
        mat.append(row)
    for i in range(n2):
        row = [zero] * n1 + list(quot.matrix[i])
        mat.append(row)
    return LambdaPresentation(sub.base, mat)


def additivity_check(sub, quot, off=None, n_check=None):
    """char(middle) = char(sub) * char(quot) up to a unit.

    Compared through (mu, lambda) and the distinguished polynomials, which
    are canonical; returns (ok, data).
    """
    mid = block_triangular(sub, quot, off)
    wa, wb, wm = char_ideal(sub), char_ideal(quot), char_ideal(mid)
    ok = (wm.mu == wa.mu + wb.mu) and (wm.lam == wa.lam + wb.lam)
    if ok:
        cap = wm.unit.cap
        prod = (wa.dist_series(cap) * wb.dist_series(cap)).canonical()
        nc = n_check or min(wa.n_eff, wb.n_eff, wm.n_eff)
        ok = prod.eq_mod(wm.dist_series(cap), nc)
    return ok, {"sub": (wa.mu, wa.lam), "quot": (wb.mu, wb.lam),
                "middle": (wm.mu, wm.lam)}
