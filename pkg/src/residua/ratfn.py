"""Rational functions with factored linear-form denominators.

A ``RatFn`` is ``num / (prod_i L_i^{m_i} * extra)`` where the ``L_i`` are
affine linear forms kept as an explicit multiset and ``extra`` is an
expanded polynomial used only by univariate one-parameter substitutions.
Keeping denominators factored is what makes the two limit routines exact:

* ``iterated_limit`` sends the variables to zero one at a time.  At each
  variable the only cancellation performed is stripping the maximal power
  of that variable dividing both the numerator and the pure ``c * x_j``
  denominator factors; a surviving pure factor is a genuine pole and
  raises ``NotHolomorphic``.
* ``curve_substitute`` and ``curve_value_at_zero`` restrict to the curve
  ``x_j = t ** mu_j`` and read the value at ``t = 0`` off the lowest
  coefficients, raising ``PoleAtZero`` when the numerator order is too
  small.

``positivity_witness`` certifies the curve denominator is nonvanishing on
``[0, oo)`` by exhibiting nonnegative coefficients and a positive constant
term after the common ``t`` power is cancelled.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    NotDivisible,
    NotHolomorphic,
    PoleAtZero,
    VariableMismatch,
    WitnessFails,
)
from .mpoly import LinearForm, MPoly, RationalLike, _coerce


def _univariate_coeffs(poly: MPoly) -> dict[int, Fraction]:
    if poly.nvars != 1:
        raise VariableMismatch("expected a univariate polynomial")
    return {e[0]: c for e, c in poly.terms.items()}


class RatFn:
    """Rational function in canonical factored form.

    Canonical means: denominator factors are primitive with a positive
    leading coefficient, sorted, with multiplicities merged; no factor
    exactly divides the numerator; a zero numerator forces an empty
    denominator.  The constructor establishes all of this, so every
    arithmetic result is canonical and structural equality is meaningful.
    """

    __slots__ = ("nvars", "num", "den", "extra_den")

    def __init__(
        self,
        nvars: int,
        num: MPoly,
        den: Sequence[tuple[LinearForm, int]] = (),
        extra_den: MPoly | None = None,
    ):
        if num.nvars != nvars:
            raise VariableMismatch("numerator variable count mismatch")
        scale = Fraction(1)
        merged: dict[LinearForm, int] = {}
        for form, mult in den:
            if mult < 0:
                raise ValueError("negative multiplicity")
            if mult == 0:
                continue
            if form.nvars != nvars:
                raise VariableMismatch("denominator form variable count mismatch")
            if form.is_zero:
                raise ZeroDivisionError("zero linear form in denominator")
            prim, factor_scale = form.primitive()
            scale *= factor_scale**mult
            if prim.is_constant:
                scale *= Fraction(prim.const) ** mult
                continue
            merged[prim] = merged.get(prim, 0) + mult
        if scale != 1:
            num = num * (1 / scale)
        if extra_den is not None:
            if extra_den.nvars != nvars:
                raise VariableMismatch("extra denominator variable count mismatch")
            if extra_den.is_zero:
                raise ZeroDivisionError("zero extra denominator")
            if extra_den.is_constant:
                num = num * (1 / extra_den.constant_value())
                extra_den = None
        if num.is_zero:
            merged = {}
            extra_den = None
        else:
            # cancel factors that divide the numerator exactly
            for form in sorted(merged):
                while merged[form] > 0:
                    try:
                        num = num.exact_divide(form.as_mpoly())
                    except NotDivisible:
                        break
                    merged[form] -= 1
                if merged[form] == 0:
                    del merged[form]
            if extra_den is not None:
                # strip the common monomial content (used by t-substitutions)
                num_content = num.monomial_content()
                extra_content = extra_den.monomial_content()
                common = tuple(min(a, b) for a, b in zip(num_content, extra_content))
                for var, power in enumerate(common):
                    if power:
                        num = num.divide_power(var, power)
                        extra_den = extra_den.divide_power(var, power)
                if extra_den.is_constant:
                    num = num * (1 / extra_den.constant_value())
                    extra_den = None
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "num", num)
        object.__setattr__(
            self, "den", tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key()))
        )
        object.__setattr__(self, "extra_den", extra_den)

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("RatFn is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "RatFn":
        return cls(nvars, MPoly.zero(nvars))

    @classmethod
    def one(cls, nvars: int) -> "RatFn":
        return cls(nvars, MPoly.one(nvars))

    @classmethod
    def const(cls, nvars: int, value: RationalLike) -> "RatFn":
        return cls(nvars, MPoly.const(nvars, value))

    @classmethod
    def from_mpoly(cls, poly: MPoly) -> "RatFn":
        return cls(poly.nvars, poly)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return self.num.is_constant and not self.den and self.extra_den is None

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return self.num.constant_value()

    def cancel(self) -> "RatFn":
        """Re-run canonicalization; idempotent by construction."""
        return RatFn(self.nvars, self.num, self.den, self.extra_den)

    # -- arithmetic --------------------------------------------------------

    def _check_same(self, other: "RatFn") -> None:
        if self.nvars != other.nvars:
            raise VariableMismatch(f"{self.nvars} variables vs {other.nvars}")

    def __mul__(self, other: "RatFn | MPoly | RationalLike") -> "RatFn":
        if isinstance(other, (int, Fraction)):
            return RatFn(self.nvars, self.num * other, self.den, self.extra_den)
        if isinstance(other, MPoly):
            return RatFn(self.nvars, self.num * other, self.den, self.extra_den)
        self._check_same(other)
        extra: MPoly | None
        if self.extra_den is None:
            extra = other.extra_den
        elif other.extra_den is None:
            extra = self.extra_den
        else:
            extra = self.extra_den * other.extra_den
        return RatFn(
            self.nvars,
            self.num * other.num,
            tuple(self.den) + tuple(other.den),
            extra,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "RatFn":
        return self * Fraction(-1)

    def divide_form(self, form: LinearForm, mult: int = 1) -> "RatFn":
        return RatFn(
            self.nvars, self.num, tuple(self.den) + ((form, mult),), self.extra_den
        )

    def __truediv__(self, other: "LinearForm | RationalLike") -> "RatFn":
        if isinstance(other, LinearForm):
            return self.divide_form(other)
        value = _coerce(other)
        if not value:
            raise ZeroDivisionError("division by zero scalar")
        return self * (1 / value)

    def __add__(self, other: "RatFn | RationalLike") -> "RatFn":
        if isinstance(other, (int, Fraction)):
            other = RatFn.const(self.nvars, other)
        self._check_same(other)
        mults: dict[LinearForm, int] = {}
        for form, mult in self.den:
            mults[form] = max(mults.get(form, 0), mult)
        for form, mult in other.den:
            mults[form] = max(mults.get(form, 0), mult)

        def lift(part: "RatFn") -> MPoly:
            have = dict(part.den)
            poly = part.num
            for form, mult in mults.items():
                missing = mult - have.get(form, 0)
                if missing:
                    poly = poly * form.as_mpoly() ** missing
            return poly

        left = lift(self)
        right = lift(other)
        if self.extra_den is not None:
            right = right * self.extra_den
        if other.extra_den is not None:
            left = left * other.extra_den
        extra: MPoly | None
        if self.extra_den is None:
            extra = other.extra_den
        elif other.extra_den is None:
            extra = self.extra_den
        else:
            extra = self.extra_den * other.extra_den
        return RatFn(self.nvars, left + right, tuple(mults.items()), extra)

    __radd__ = __add__

    def __sub__(self, other: "RatFn | RationalLike") -> "RatFn":
        if isinstance(other, (int, Fraction)):
            other = RatFn.const(self.nvars, other)
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatFn):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.num == other.num
            and self.den == other.den
            and self.extra_den == other.extra_den
        )

    def __hash__(self) -> int:
        return hash((self.nvars, self.num, self.den, self.extra_den))

    def equivalent(self, other: "RatFn") -> bool:
        """Equality by cross multiplication, robust to representation."""
        self._check_same(other)
        left = self.num
        for form, mult in other.den:
            left = left * form.as_mpoly() ** mult
        if other.extra_den is not None:
            left = left * other.extra_den
        right = other.num
        for form, mult in self.den:
            right = right * form.as_mpoly() ** mult
        if self.extra_den is not None:
            right = right * self.extra_den
        return left == right

    # -- evaluation --------------------------------------------------------

    def denominator_poly(self) -> MPoly:
        poly = MPoly.one(self.nvars)
        for form, mult in self.den:
            poly = poly * form.as_mpoly() ** mult
        if self.extra_den is not None:
            poly = poly * self.extra_den
        return poly

    def evaluate(self, point: Sequence[RationalLike]) -> Fraction:
        value = self.num.evaluate(point)
        for form, mult in self.den:
            base = form.evaluate(point)
            if not base:
                raise ZeroDivisionError(f"denominator factor {form!r} vanishes at {point}")
            value /= base**mult
        if self.extra_den is not None:
            base = self.extra_den.evaluate(point)
            if not base:
                raise ZeroDivisionError(f"extra denominator vanishes at {point}")
            value /= base
        return value

    def evaluate_float(self, point: Sequence[float]) -> float:
        value = self.num.evaluate_float(point)
        for form, mult in self.den:
            value /= form.evaluate_float(point) ** mult
        if self.extra_den is not None:
            value /= self.extra_den.evaluate_float(point)
        return value

    # -- limits ------------------------------------------------------------

    def iterated_limit(self, order: Sequence[int] | None = None) -> Fraction:
        """Limit sending variables to zero one at a time in ``order``.

        ``order`` defaults to ``0, 1, ..., nvars - 1``.  At each variable
        the maximal common power shared by the numerator and the pure
        single-variable denominator factors is cancelled first; a pure
        factor that survives is a pole and raises ``NotHolomorphic``.
        """
        if self.extra_den is not None:
            raise VariableMismatch(
                "iterated_limit is defined for factored forms only "
                "(one-parameter substitutions use curve_value_at_zero)"
            )
        if order is None:
            order = range(self.nvars)
        order = [int(v) for v in order]
        if sorted(order) != list(range(self.nvars)):
            raise VariableMismatch(f"order {order} is not a permutation of the variables")
        num = self.num
        scale = Fraction(1)
        dens: dict[LinearForm, int] = dict(self.den)
        for var in order:
            if num.is_zero:
                return Fraction(0)
            pure = LinearForm(
                [1 if i == var else 0 for i in range(self.nvars)], 0
            )
            pole_mult = dens.pop(pure, 0)
            if pole_mult:
                available = num.min_degree(var)
                cancel = min(available, pole_mult)
                num = num.divide_power(var, cancel)
                pole_mult -= cancel
                if pole_mult:
                    raise NotHolomorphic(
                        f"pure denominator factor in variable {var} survives the limit"
                    )
            num = num.substitute_zero(var)
            updated: dict[LinearForm, int] = {}
            for form, mult in dens.items():
                reduced = form.substitute_zero(var)
                prim, factor_scale = reduced.primitive()
                if prim.is_constant:
                    scale *= (factor_scale * prim.const) ** mult
                else:
                    scale *= factor_scale**mult
                    updated[prim] = updated.get(prim, 0) + mult
            dens = updated
        if dens:
            raise NotHolomorphic("denominator factors survive all substitutions")
        return num.constant_value() / scale

    def curve_substitute(self, mu: Sequence[int]) -> "RatFn":
        """Restrict to the curve ``x_j = t ** mu_j``; result is univariate in t."""
        if len(mu) != self.nvars:
            raise VariableMismatch(f"{len(mu)} weights for {self.nvars} variables")
        if any(m <= 0 for m in mu):
            raise ValueError("weights must be positive")
        num = self.num.subs_powers(mu)
        den = MPoly.one(1)
        for form, mult in self.den:
            den = den * form.subs_powers(mu) ** mult
        if self.extra_den is not None:
            den = den * self.extra_den.subs_powers(mu)
        return RatFn(1, num, (), den)

    def curve_value_at_zero(self, mu: Sequence[int]) -> Fraction:
        """Value of the curve restriction at ``t = 0``; PoleAtZero if none."""
        curve = self.curve_substitute(mu)
        if curve.is_zero:
            return Fraction(0)
        num = _univariate_coeffs(curve.num)
        den = (
            _univariate_coeffs(curve.extra_den)
            if curve.extra_den is not None
            else {0: Fraction(1)}
        )
        t_num = min(num)
        t_den = min(den)
        if t_num < t_den:
            raise PoleAtZero(
                f"curve numerator order {t_num} below denominator order {t_den}"
            )
        return num.get(t_den, Fraction(0)) / den[t_den]

    def positivity_witness(self, mu: Sequence[int]) -> "PositivityWitness":
        """Certificate that the curve denominator stays positive on [0, oo).

        Requires every denominator factor to have nonnegative coefficients
        (checked, not assumed).  After cancelling the common power of t,
        the certificate records the expanded denominator's coefficients,
        all nonnegative, with a positive constant term; that makes the
        curve value continuous on a full neighborhood of ``t = 0`` inside
        ``[0, oo)``.  Failure raises ``WitnessFails``.
        """
        if len(mu) != self.nvars:
            raise VariableMismatch(f"{len(mu)} weights for {self.nvars} variables")
        if any(m <= 0 for m in mu):
            raise ValueError("weights must be positive")
        if self.num.is_zero:
            raise WitnessFails("zero numerator polynomial has no witness")
        if self.extra_den is not None:
            raise WitnessFails("witness applies to factored multivariate forms")
        factors = []
        den = MPoly.one(1)
        for form, mult in self.den:
            if not form.nonnegative:
                raise WitnessFails(
                    f"denominator factor {form.to_string()} has a negative coefficient"
                )
            poly = form.subs_powers(mu)
            factors.append(
                FactorCertificate(
                    form=form,
                    multiplicity=mult,
                    curve_coeffs=tuple(sorted(_univariate_coeffs(poly).items())),
                )
            )
            den = den * poly**mult
        num = self.num.subs_powers(mu)
        num_coeffs = _univariate_coeffs(num)
        den_coeffs = _univariate_coeffs(den)
        t_num = min(num_coeffs)
        t_den = min(den_coeffs)
        cancelled = min(t_num, t_den)
        reduced = {e - cancelled: c for e, c in den_coeffs.items()}
        constant = reduced.get(0, Fraction(0))
        if constant == 0:
            raise WitnessFails(
                "constant term 0 after cancellation: pole at the origin "
                f"(numerator order {t_num}, denominator order {t_den})"
            )
        if any(c < 0 for c in reduced.values()):  # impossible given the checks above
            raise WitnessFails("reduced denominator has a negative coefficient")
        # constant_term > 0 implies t_den <= t_num, so the value exists
        return PositivityWitness(
            weights=tuple(int(m) for m in mu),
            factors=tuple(factors),
            reduced_denominator=tuple(sorted(reduced.items())),
            constant_term=constant,
            cancelled_power=cancelled,
            numerator_order=t_num,
            value_at_zero=num_coeffs.get(t_den, Fraction(0)) / den_coeffs[t_den],
        )

    # -- formatting --------------------------------------------------------

    def to_string(self, names: Sequence[str] | None = None) -> str:
        num = self.num.to_string(names)
        pieces = []
        for form, mult in self.den:
            body = form.to_string(names)
            body = f"({body})" if ("+" in body or "-" in body[1:]) else body
            pieces.append(body if mult == 1 else f"{body}^{mult}")
        if self.extra_den is not None:
            pieces.append(f"({self.extra_den.to_string(names)})")
        if not pieces:
            return num
        den = "*".join(pieces)
        if "+" in num or "-" in num[1:] or "*" in num:
            num = f"({num})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RatFn({self.to_string()})"


@dataclass(frozen=True)
class FactorCertificate:
    """Per-factor data backing a positivity witness."""

    form: LinearForm
    multiplicity: int
    curve_coeffs: tuple[tuple[int, Fraction], ...]

    @property
    def nonnegative(self) -> bool:
        return all(c >= 0 for _, c in self.curve_coeffs)


@dataclass(frozen=True)
class PositivityWitness:
    """Successful positivity certificate for a curve denominator.

    ``reduced_denominator`` holds ``(power, coefficient)`` pairs of the
    expanded denominator after cancelling ``t ** cancelled_power``; all
    coefficients are nonnegative and ``constant_term`` is positive, which
    pins the denominator away from zero on the whole ray.
    """

    weights: tuple[int, ...]
    factors: tuple[FactorCertificate, ...]
    reduced_denominator: tuple[tuple[int, Fraction], ...]
    constant_term: Fraction
    cancelled_power: int
    numerator_order: int
    value_at_zero: Fraction

    @property
    def holds(self) -> bool:
        return True

    def denominator_string(self) -> str:
        poly = MPoly(1, {(e,): c for e, c in self.reduced_denominator})
        return poly.to_string(["t"])

    def summary(self) -> str:
        return (
            f"denominator {self.denominator_string()}, "
            f"constant term {self.constant_term} > 0"
        )

    def to_jsonable(self) -> dict:
        return {
            "weights": list(self.weights),
            "reduced_denominator": [
                {"power": e, "coeff": f"{c.numerator}/{c.denominator}"}
                for e, c in self.reduced_denominator
            ],
            "constant_term": f"{self.constant_term.numerator}/{self.constant_term.denominator}",
            "cancelled_power": self.cancelled_power,
            "numerator_order": self.numerator_order,
            "summary": self.summary(),
        }
