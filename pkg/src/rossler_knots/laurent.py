"""Integer Laurent polynomials with exact arithmetic.

The knot-type certificates of this package are Alexander polynomials,
computed as determinants of integer polynomial matrices by fraction-free
(Bareiss) elimination: floating point anywhere in here would destroy the
certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import NotCoprimeError

__all__ = ["LaurentPoly", "bareiss_det", "torus_alexander"]


@dataclass(frozen=True)
class LaurentPoly:
    """sum_i coeffs[i] * t^(lo + i), integer coefficients.

    Normalized on construction: zero has coeffs == () and lo == 0;
    otherwise the first and last stored coefficients are nonzero.
    """

    coeffs: tuple[int, ...]
    lo: int = 0

    def __post_init__(self):
        cs = list(self.coeffs)
        lo = self.lo
        while cs and cs[0] == 0:
            cs.pop(0)
            lo += 1
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            lo = 0
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "lo", lo)

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero() -> "LaurentPoly":
        return LaurentPoly(())

    @staticmethod
    def one() -> "LaurentPoly":
        return LaurentPoly((1,))

    @staticmethod
    def term(coef: int, exp: int = 0) -> "LaurentPoly":
        return LaurentPoly((coef,), exp)

    @staticmethod
    def from_dict(d: dict[int, int]) -> "LaurentPoly":
        if not d:
            return LaurentPoly.zero()
        lo = min(d)
        hi = max(d)
        return LaurentPoly(tuple(d.get(e, 0) for e in range(lo, hi + 1)), lo)

    # -- basic queries -------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    def as_dict(self) -> dict[int, int]:
        return {self.lo + i: c for i, c in enumerate(self.coeffs) if c}

    def __call__(self, t: int):
        """Exact evaluation at an integer (Fraction-free only for t = +-1)."""
        if self.is_zero:
            return 0
        val = 0
        for i, c in enumerate(self.coeffs):
            val += c * t ** (self.lo + i)
        return val

    # -- ring operations ------------------------------------------------
    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        cs = [0] * (hi - lo + 1)
        for i, c in enumerate(self.coeffs):
            cs[self.lo + i - lo] += c
        for i, c in enumerate(other.coeffs):
            cs[other.lo + i - lo] += c
        return LaurentPoly(tuple(cs), lo)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(tuple(-c for c in self.coeffs), self.lo)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        if self.is_zero or other.is_zero:
            return LaurentPoly.zero()
        cs = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ci in enumerate(self.coeffs):
            if ci:
                for j, cj in enumerate(other.coeffs):
                    cs[i + j] += ci * cj
        return LaurentPoly(tuple(cs), self.lo + other.lo)

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by t^k."""
        if self.is_zero:
            return self
        return LaurentPoly(self.coeffs, self.lo + k)

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact quotient self / other; raises ArithmeticError on remainder."""
        if other.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero:
            return self
        rem = list(self.coeffs)
        div = other.coeffs
        dn = len(div)
        qn = len(rem) - dn + 1
        if qn <= 0:
            raise ArithmeticError("degree of divisor exceeds dividend")
        q = [0] * qn
        for k in range(qn - 1, -1, -1):
            head = rem[k + dn - 1]
            if head % div[-1] != 0:
                raise ArithmeticError("inexact polynomial division")
            q[k] = head // div[-1]
            if q[k]:
                for j in range(dn):
                    rem[k + j] -= q[k] * div[j]
        if any(rem):
            raise ArithmeticError("inexact polynomial division (remainder)")
        return LaurentPoly(tuple(q), self.lo - other.lo)

    # -- knot-certificate helpers ----------------------------------------
    def reversed_poly(self) -> "LaurentPoly":
        """t -> 1/t."""
        return LaurentPoly(tuple(reversed(self.coeffs)), -self.hi)

    def is_palindromic(self) -> bool:
        return self.coeffs == tuple(reversed(self.coeffs))

    def alexander_normalized(self) -> "LaurentPoly":
        """Canonical unit multiple: lowest exponent 0, positive leading coefficient.

        Alexander polynomials are defined up to +-t^k; this fixes the
        representative used for equality tests.  The symmetric (t^-m ... t^m)
        display is recovered by shift(-(hi - lo) // 2).
        """
        if self.is_zero:
            return self
        p = self.shift(-self.lo)
        if p.coeffs[-1] < 0:
            p = -p
        return p

    def symmetric(self) -> "LaurentPoly":
        """Representative centered so that p(t) = p(1/t) when palindromic."""
        p = self.alexander_normalized()
        if p.is_zero:
            return p
        return p.shift(-(p.hi // 2)) if p.hi % 2 == 0 else p

    # -- display ---------------------------------------------------------
    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            e = self.lo + i
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                tp = "t" if e == 1 else f"t^{e}"
                body = tp if mag == 1 else f"{mag}*{tp}"
            parts.append(("-" if c < 0 else "+", body))
        sign0, body0 = parts[0]
        out = ("-" if sign0 == "-" else "") + body0
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def bareiss_det(matrix: list[list[LaurentPoly]]) -> LaurentPoly:
    """Determinant over Z[t, 1/t] by fraction-free Bareiss elimination.

    Every entry is first shifted row-wise to clear negative exponents
    (changing the result only by a unit t^k, which the Alexander
    normalization removes anyway).
    """
    n = len(matrix)
    if n == 0:
        return LaurentPoly.one()
    m = []
    for row in matrix:
        assert len(row) == n
        kmin = min((e.lo for e in row if not e.is_zero), default=0)
        m.append([e.shift(-kmin) if kmin < 0 else e for e in row])

    sign = 1
    prev = LaurentPoly.one()
    for k in range(n - 1):
        if m[k][k].is_zero:
            for j in range(k + 1, n):
                if not m[j][k].is_zero:
                    m[k], m[j] = m[j], m[k]
                    sign = -sign
                    break
            else:
                return LaurentPoly.zero()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                m[i][j] = num.exact_div(prev)
            m[i][k] = LaurentPoly.zero()
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def torus_alexander(p: int, q: int) -> LaurentPoly:
    """Alexander polynomial of the (p, q) torus knot, exactly.

    (t^(pq) - 1)(t - 1) / ((t^p - 1)(t^q - 1)), normalized.  Requires
    coprime p, q >= 2.
    """
    if p < 2 or q < 2 or gcd(p, q) != 1:
        raise NotCoprimeError(f"need coprime integers >= 2, got ({p}, {q})")

    def t_pow_minus_1(k: int) -> LaurentPoly:
        cs = [0] * (k + 1)
        cs[0] = -1
        cs[k] = 1
        return LaurentPoly(tuple(cs))

    num = t_pow_minus_1(p * q) * t_pow_minus_1(1)
    den1 = t_pow_minus_1(p)
    den2 = t_pow_minus_1(q)
    return num.exact_div(den1).exact_div(den2).alexander_normalized()
