"""Radial test profiles and their exact moment transform.

A profile is a polynomial bump ``psi(t) = sum_m c_m t^m (1 - t)^N`` on
``[0, 1]``, extended by zero for ``t >= 1``.  Its weighted moments

    integral_0^1 t^(s + k) psi(t) dt
        = sum_m c_m N! / prod_{j=1}^{N+1} (s + k + m + j)

are rational in the exponent ``s``, which is what lets every pairing in
this package evaluate to an exact rational function of the continuation
parameters: ``transform`` returns that rational function with the affine
factors kept unexpanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import PoleAtZero
from .mpoly import LinearForm, MPoly, RationalLike, _coerce
from .ratfn import RatFn


@dataclass(frozen=True)
class RadialProfile:
    """Polynomial bump ``sum_m coeffs[m] * t^m * (1 - t)^degree``.

    ``degree`` is the flatness order N at ``t = 1``; pairings require
    ``degree >= pole_order + 2`` for the section poles they meet, checked
    at pairing time.  ``coeffs[0]`` is the value at ``t = 0``.
    """

    degree: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("profile degree must be at least 2")
        if not self.coeffs or all(c == 0 for c in self.coeffs):
            raise ValueError("profile must have a nonzero coefficient")
        object.__setattr__(self, "coeffs", tuple(_coerce(c) for c in self.coeffs))

    @classmethod
    def bump(cls, degree: int = 4) -> "RadialProfile":
        """The plain bump ``(1 - t)^degree``."""
        return cls(degree, (Fraction(1),))

    @classmethod
    def monomial_bump(cls, degree: int, power: int) -> "RadialProfile":
        """``t^power * (1 - t)^degree``."""
        coeffs = [Fraction(0)] * power + [Fraction(1)]
        return cls(degree, tuple(coeffs))

    @property
    def value_at_zero(self) -> Fraction:
        return self.coeffs[0]

    def psi(self, t: RationalLike) -> Fraction:
        """Exact value, zero outside ``[0, 1)``."""
        t = _coerce(t)
        if t >= 1 or t < 0:
            return Fraction(0)
        total = Fraction(0)
        bump = (1 - t) ** self.degree
        power = Fraction(1)
        for c in self.coeffs:
            if c:
                total += c * power * bump
            power *= t
        return total

    def psi_float(self, t: float) -> float:
        if t >= 1.0 or t < 0.0:
            return 0.0
        total = 0.0
        bump = (1.0 - t) ** self.degree
        power = 1.0
        for c in self.coeffs:
            if c:
                total += float(c) * power * bump
            power *= t
        return total

    def transform(self, weight: LinearForm, shift: int) -> RatFn:
        """Exact moment ``integral t^(weight + shift) psi dt`` as a RatFn.

        The result lives over ``weight.nvars`` variables; its denominator
        factors are the affine forms ``weight + shift + m + j``.  Constant
        weights collapse to a rational constant.
        """
        nvars = weight.nvars
        factorial = Fraction(math.factorial(self.degree))
        total = RatFn.zero(nvars)
        for m, c in enumerate(self.coeffs):
            if not c:
                continue
            try:
                piece = RatFn(
                    nvars,
                    MPoly.const(nvars, c * factorial),
                    [(weight.shift(shift + m + j), 1) for j in range(1, self.degree + 2)],
                )
            except ZeroDivisionError:
                raise PoleAtZero(
                    f"divergent radial moment: exponent {shift + m} has no "
                    "parameter weight to regularize it"
                ) from None
            total = total + piece
        return total

    def transform_univariate(self, shift: int = 0) -> RatFn:
        """Moment transform as a function of a single exponent variable."""
        return self.transform(LinearForm([1], 0), shift)

    def moment(self, power: int) -> Fraction:
        """Exact ``integral_0^1 t^power psi(t) dt`` for integer power >= 0."""
        if power < 0:
            raise ValueError("moment power must be nonnegative")
        value = self.transform(LinearForm([], 0), power)
        return value.constant_value()

    def to_jsonable(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": [f"{c.numerator}/{c.denominator}" for c in self.coeffs],
        }
