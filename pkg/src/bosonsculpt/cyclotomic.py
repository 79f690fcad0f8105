"""Exact arithmetic in cyclotomic fields Q(zeta_n).

An element of Q(zeta_n) is stored as rational coefficients of
``1, zeta, ..., zeta^(phi(n)-1)``, i.e. a polynomial reduced modulo the n-th
cyclotomic polynomial. This basis is linearly independent, so an element is
zero exactly when all of its coefficients are. Elements of different orders
are combined in the field of the least common multiple order.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("order must be positive")
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _exact_div(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(out) - 1, -1, -1):
        q, rem = divmod(num[k + len(den) - 1], lead)
        if rem:
            raise ArithmeticError("non-exact polynomial division")
        out[k] = q
        for j, c in enumerate(den):
            num[k + j] -= q * c
    if any(num[: len(den) - 1]):
        raise ArithmeticError("non-exact polynomial division")
    return out


def _reduce(coeffs: list, n: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    c = [Fraction(x) for x in coeffs] + [Fraction(0)] * max(0, deg - len(coeffs))
    for k in range(len(c) - 1, deg - 1, -1):
        lead = c[k]
        if lead:
            # Phi_n is monic: x^deg = -(phi[0] + ... + phi[deg-1] x^(deg-1))
            for j in range(deg):
                c[k - deg + j] -= lead * phi[j]
        c[k] = Fraction(0)
    return tuple(c[:deg])


class Cyclotomic:
    """Immutable element of Q(zeta_n), ``zeta_n = exp(2 pi i / n)``."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs, order: int = 1):
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "coeffs", _reduce(list(coeffs), self.order))

    def __setattr__(self, name, value):
        raise AttributeError("Cyclotomic is immutable")

    @classmethod
    def root(cls, k: int, n: int) -> Cyclotomic:
        """``zeta_n ** k``."""
        k %= n
        return cls([0] * k + [1], n)

    @classmethod
    def rational(cls, x) -> Cyclotomic:
        return cls([Fraction(x)], 1)

    def lift(self, m: int) -> Cyclotomic:
        if m % self.order:
            raise ValueError(f"cannot embed order {self.order} into order {m}")
        step = m // self.order
        poly = [Fraction(0)] * (step * len(self.coeffs))
        for j, c in enumerate(self.coeffs):
            poly[j * step] = c
        return Cyclotomic(poly, m)

    @staticmethod
    def _coerce(other) -> Cyclotomic | None:
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, (int, Rational)):
            return Cyclotomic.rational(other)
        return None

    def _common(self, other: Cyclotomic) -> tuple[Cyclotomic, Cyclotomic]:
        if self.order == other.order:
            return self, other
        m = math.lcm(self.order, other.order)
        return self.lift(m), other.lift(m)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._common(other)
        return Cyclotomic([x + y for x, y in zip(a.coeffs, b.coeffs)], a.order)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic([-x for x in self.coeffs], self.order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._common(other)
        prod = [Fraction(0)] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    prod[i + j] += x * y
        return Cyclotomic(prod, a.order)

    __rmul__ = __mul__

    def conjugate(self) -> Cyclotomic:
        n = self.order
        poly = [Fraction(0)] * n
        for j, c in enumerate(self.coeffs):
            poly[(-j) % n] += c
        return Cyclotomic(poly, n)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        # order-independent only for rationals; enough for dict use in tests
        return hash(self.coeffs) if self.order > 1 else hash(self.coeffs[0])

    def __complex__(self):
        z = cmath.exp(2j * math.pi / self.order)
        return complex(sum(float(c) * z**j for j, c in enumerate(self.coeffs)))

    def __repr__(self):
        parts = [f"{c}*z^{j}" if j else f"{c}" for j, c in enumerate(self.coeffs) if c]
        return f"Cyclotomic[{self.order}]({' + '.join(parts) or '0'})"


ZERO = Cyclotomic.rational(0)
ONE = Cyclotomic.rational(1)
