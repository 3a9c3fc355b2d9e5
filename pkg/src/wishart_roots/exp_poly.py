"""Exact arithmetic in the ring Q[x, 1/x, E] with E = exp(-x).

Every series coefficient of the distribution functions handled by this
package lives in this ring: lower incomplete gamma functions at integer
first argument reduce to it via

    gamma(1, x) = 1 - E,    gamma(a+1, x) = a*gamma(a, x) - x^a * E.

The ring is closed under d/dx, which is what makes exact annihilation
checks of differential operators possible: a residual is either the zero
element or it is not, with no tolerance involved.

Elements are immutable; all operations return new values.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Tuple

Term = Tuple[int, int]  # (power of x, power of E); x-power may be negative

_FRAC_ONE = Fraction(1)


class ExpPoly:
    """A finite sum  sum_{i,j} c_{ij} * x^i * E^j  with exact rational c_{ij}.

    ``i`` is any integer, ``j`` is a nonnegative integer.  Zero coefficients
    are never stored, so structural equality of the term maps is semantic
    equality.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Term, Fraction] | None = None):
        clean: Dict[Term, Fraction] = {}
        if terms:
            for (i, j), c in terms.items():
                if j < 0:
                    raise ValueError("E-power must be nonnegative")
                c = Fraction(c)
                if c != 0:
                    clean[(int(i), int(j))] = c
        self.terms = clean

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero() -> "ExpPoly":
        return ExpPoly()

    @staticmethod
    def one() -> "ExpPoly":
        return ExpPoly({(0, 0): _FRAC_ONE})

    @staticmethod
    def const(c) -> "ExpPoly":
        return ExpPoly({(0, 0): Fraction(c)})

    @staticmethod
    def term(c, xpow: int = 0, epow: int = 0) -> "ExpPoly":
        """c * x^xpow * E^epow."""
        return ExpPoly({(xpow, epow): Fraction(c)})

    @staticmethod
    def x(power: int = 1) -> "ExpPoly":
        return ExpPoly({(power, 0): _FRAC_ONE})

    @staticmethod
    def e(power: int = 1) -> "ExpPoly":
        return ExpPoly({(0, power): _FRAC_ONE})

    # -- ring operations -------------------------------------------------

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, 0) + c
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        res = ExpPoly.__new__(ExpPoly)
        res.terms = out
        return res

    def __neg__(self) -> "ExpPoly":
        res = ExpPoly.__new__(ExpPoly)
        res.terms = {k: -c for k, c in self.terms.items()}
        return res

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other) -> "ExpPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out: Dict[Term, Fraction] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                s = out.get(key, 0) + c1 * c2
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        res = ExpPoly.__new__(ExpPoly)
        res.terms = out
        return res

    __rmul__ = __mul__

    def scale(self, c) -> "ExpPoly":
        c = Fraction(c)
        if c == 0:
            return ExpPoly.zero()
        res = ExpPoly.__new__(ExpPoly)
        res.terms = {k: v * c for k, v in self.terms.items()}
        return res

    def mul_xpow(self, i: int) -> "ExpPoly":
        """Multiply by x^i (i may be negative)."""
        res = ExpPoly.__new__(ExpPoly)
        res.terms = {(a + i, b): c for (a, b), c in self.terms.items()}
        return res

    def __pow__(self, k: int) -> "ExpPoly":
        if k < 0:
            raise ValueError("negative powers of general elements not supported")
        out = ExpPoly.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus ---------------------------------------------------------

    def diff(self) -> "ExpPoly":
        """Exact d/dx.  d(x^i E^j)/dx = i x^{i-1} E^j - j x^i E^j."""
        out: Dict[Term, Fraction] = {}
        for (i, j), c in self.terms.items():
            if i != 0:
                key = (i - 1, j)
                s = out.get(key, 0) + i * c
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
            if j != 0:
                key = (i, j)
                s = out.get(key, 0) - j * c
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        res = ExpPoly.__new__(ExpPoly)
        res.terms = out
        return res

    def eval(self, x0: float) -> float:
        """Numeric value at x = x0.

        Requires x0 > 0 whenever a negative x-power is present (the ring
        element has a pole at 0 otherwise).  Closed forms like the
        incomplete gammas cancel violently when x is small relative to the
        degree, so when the float sum loses more than ~4 digits to
        cancellation the value is recomputed with exact rational
        coefficients and a 40-digit e^{-x}.
        """
        if x0 == 0 and any(i < 0 for (i, _) in self.terms):
            raise ZeroDivisionError("negative x-power evaluated at x = 0")
        x0 = float(x0)
        total = 0.0
        biggest = 0.0
        for (i, j), c in self.terms.items():
            term = float(c) * x0 ** i * math.exp(-j * x0)
            total += term
            biggest = max(biggest, abs(term))
        if biggest > 0.0 and abs(total) < 1e-4 * biggest:
            return self._eval_precise(x0)
        return total

    def _eval_precise(self, x0: float, prec: int = 40) -> float:
        from decimal import Decimal, getcontext
        from fractions import Fraction as _F

        ctx = getcontext()
        old = ctx.prec
        ctx.prec = prec
        try:
            xf = _F(x0)
            xd = Decimal(xf.numerator) / Decimal(xf.denominator)
            # e^{-x} by series (arguments here are desk-scale)
            term = Decimal(1)
            E = Decimal(1)
            k = 0
            while abs(term) > Decimal(10) ** (-(prec - 2)):
                k += 1
                term *= -xd / k
                E += term
            total = Decimal(0)
            for (i, j), c in self.terms.items():
                total += Decimal(c.numerator) / Decimal(c.denominator) * xd ** i * E ** j
            return float(total)
        finally:
            ctx.prec = old

    def eval_exact_at_one(self) -> Fraction:
        """Value at x = 1 with E treated as a formal unit (testing hook)."""
        return sum(self.terms.values(), Fraction(0))

    # -- structure --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def min_xpow(self) -> int:
        if not self.terms:
            return 0
        return min(i for (i, _) in self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, j) in sorted(self.terms, key=lambda t: (t[1], t[0])):
            c = self.terms[(i, j)]
            factors = [str(c)]
            if i != 0:
                factors.append(f"x^{i}")
            if j != 0:
                factors.append(f"E^{j}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ExpPoly({self})"


def incomplete_gamma_exact(a: int) -> ExpPoly:
    """gamma(a, x) as an exact ring element, for integer a >= 1.

    Seeded at gamma(1, x) = 1 - E and built with the one-step recurrence
    gamma(a+1, x) = a*gamma(a, x) - x^a E.
    """
    if not isinstance(a, int) or a < 1:
        raise ValueError("incomplete_gamma_exact requires an integer a >= 1")
    g = ExpPoly({(0, 0): _FRAC_ONE, (0, 1): Fraction(-1)})  # 1 - E
    for k in range(1, a):
        g = g.scale(k) - ExpPoly.term(1, k, 1)
    return g


def exppoly_sum(items: Iterable[ExpPoly]) -> ExpPoly:
    total = ExpPoly.zero()
    for v in items:
        total = total + v
    return total
