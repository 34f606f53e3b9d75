"""Tensor currents, split test forms, and their exact pairings.

A tensor current term on ``C^n`` is a product over coordinates of model
factors

    x_k^(-c_hol) * conj(x_k)^(-c_anti) * |x_k|^(2 s_k(lambda)) * (dx_k?) * (dconj(x_k)?)

together with a scalar rational function of the continuation parameters,
an explicit orientation sign, powers of ``pi`` and ``i``, and positive
unit constants carried as ``u^(2 L(lambda))`` tags.  Pairing such a term
with a split test form reduces, coordinate by coordinate, to weighted
radial moments that are exact rational functions of the parameters (see
``profiles``), so the full pairing is a finite exact expression.

Conventions that pin all signs down:

* Within a coordinate the holomorphic differential comes first:
  ``dx_k ^ dconj(x_k)``; with ``x = sqrt(t) e^(i theta)`` this equals
  ``-i dt ^ dtheta``, so each coordinate contributes ``-2 pi i`` times a
  radial moment (and the angular integral enforces the charge selector
  ``a - c_hol = d - c_anti``).
* A term's differentials are stored as per-coordinate flags in canonical
  order (coordinates ascending, ``dx`` before ``dconj(x)``); ``sign``
  records the parity of the originally written wedge order relative to
  this canonical order.
* At pairing time current differentials stand to the left of the test
  form's; the parity of the merge into the canonical interleaved order is
  computed explicitly.  Collapsing a product current into per-coordinate
  model factors is exactly what makes wedge anticommutativity visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    DegreeMismatch,
    InsufficientSmoothness,
    VariableMismatch,
)
from .mpoly import LinearForm, MPoly, RationalLike, _coerce
from .profiles import RadialProfile
from .ratfn import RatFn

DIFF_KINDS = ("1", "dx", "dxbar", "wedge", "vol")

# differentials supplied by each test-slot kind, in written order
_SLOT_DIFFS: dict[str, tuple[str, ...]] = {
    "1": (),
    "dx": ("hol",),
    "dxbar": ("anti",),
    "wedge": ("hol", "anti"),
    "vol": ("hol", "anti"),
}


@dataclass(frozen=True)
class TestSlot:
    """One coordinate of a split test form: ``x^a conj(x)^d psi(|x|^2) diff``."""

    a: int
    d: int
    profile: RadialProfile
    diff: str = "1"

    def __post_init__(self):
        if self.a < 0 or self.d < 0:
            raise ValueError("monomial powers must be nonnegative")
        if self.diff not in DIFF_KINDS:
            raise ValueError(f"unknown differential kind {self.diff!r}")


@dataclass(frozen=True)
class TestForm:
    """Split test form: one slot per coordinate."""

    slots: tuple[TestSlot, ...]

    def __post_init__(self):
        if not self.slots:
            raise ValueError("test form needs at least one coordinate")

    @property
    def ncoords(self) -> int:
        return len(self.slots)

    @classmethod
    def uniform(
        cls,
        powers: Sequence[int],
        diffs: Sequence[str],
        profile: RadialProfile,
        anti_powers: Sequence[int] | None = None,
    ) -> "TestForm":
        if anti_powers is None:
            anti_powers = [0] * len(powers)
        slots = tuple(
            TestSlot(a=a, d=d, profile=profile, diff=diff)
            for a, d, diff in zip(powers, anti_powers, diffs)
        )
        return cls(slots)


@dataclass(frozen=True)
class CurrentFactor:
    """Model factor in one coordinate.

    ``weight`` is the exponent form ``s`` of ``|x|^(2 s(lambda))``;
    ``c_hol``/``c_anti`` are the pole orders in ``x`` and ``conj(x)``;
    ``smooth_pole`` is the part of ``c_hol``/``c_anti`` coming from a
    section pole ``1/f^k`` (differentiation poles excluded), which is
    what the profile smoothness check guards; ``prefactor`` multiplies
    the radial moment (used for the parameter factors produced by
    differentiating the weight).
    """

    weight: LinearForm
    c_hol: int = 0
    c_anti: int = 0
    smooth_pole: int = 0
    has_dx: bool = False
    has_dxbar: bool = False
    prefactor: MPoly | None = None

    def __post_init__(self):
        if self.c_hol < 0 or self.c_anti < 0 or self.smooth_pole < 0:
            raise ValueError("pole orders must be nonnegative")


def unit_factor(nlambda: int) -> CurrentFactor:
    """The trivial factor ``1`` in one coordinate."""
    return CurrentFactor(weight=LinearForm([0] * nlambda, 0))


@dataclass(frozen=True)
class TensorCurrent:
    """One product term: per-coordinate factors with bookkeeping tags."""

    factors: tuple[CurrentFactor, ...]
    scalar: RatFn
    sign: int = 1
    pi_power: int = 0
    i_power: int = 0
    units: tuple[tuple[Fraction, LinearForm], ...] = ()
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        nl = self.scalar.nvars
        for factor in self.factors:
            if factor.weight.nvars != nl:
                raise VariableMismatch("factor weight over wrong parameter count")
            if factor.prefactor is not None and factor.prefactor.nvars != nl:
                raise VariableMismatch("factor prefactor over wrong parameter count")
        for unit, form in self.units:
            if unit <= 0:
                raise ValueError("unit constants must be positive")
            if form.nvars != nl:
                raise VariableMismatch("unit exponent over wrong parameter count")

    @property
    def ncoords(self) -> int:
        return len(self.factors)

    @property
    def nlambda(self) -> int:
        return self.scalar.nvars

    def bidegree(self) -> tuple[int, int]:
        hol = sum(1 for f in self.factors if f.has_dx)
        anti = sum(1 for f in self.factors if f.has_dxbar)
        return hol, anti

    def scale(self, value: RationalLike | RatFn) -> "TensorCurrent":
        if isinstance(value, RatFn):
            scalar = self.scalar * value
        else:
            scalar = self.scalar * _coerce(value)
        return TensorCurrent(
            self.factors, scalar, self.sign, self.pi_power, self.i_power, self.units, self.tags
        )

    def diff_sequence(self) -> list[tuple[int, str]]:
        """Canonical differential list: coordinates ascending, dx first."""
        out = []
        for k, factor in enumerate(self.factors):
            if factor.has_dx:
                out.append((k, "hol"))
            if factor.has_dxbar:
                out.append((k, "anti"))
        return out


@dataclass(frozen=True)
class CurrentSum:
    """Finite sum of tensor current terms over a common shape."""

    terms: tuple[TensorCurrent, ...]
    ncoords: int
    nlambda: int

    def __post_init__(self):
        for term in self.terms:
            if term.ncoords != self.ncoords or term.nlambda != self.nlambda:
                raise VariableMismatch("term shape does not match the sum")

    @classmethod
    def from_terms(cls, terms: Iterable[TensorCurrent], ncoords: int, nlambda: int) -> "CurrentSum":
        return cls(tuple(terms), ncoords, nlambda)

    def __add__(self, other: "CurrentSum") -> "CurrentSum":
        if (self.ncoords, self.nlambda) != (other.ncoords, other.nlambda):
            raise VariableMismatch("current sums over different shapes")
        return CurrentSum(self.terms + other.terms, self.ncoords, self.nlambda)

    def __neg__(self) -> "CurrentSum":
        return CurrentSum(
            tuple(t.scale(Fraction(-1)) for t in self.terms), self.ncoords, self.nlambda
        )

    def filter(self, predicate: Callable[[TensorCurrent], bool]) -> "CurrentSum":
        return CurrentSum(
            tuple(t for t in self.terms if predicate(t)), self.ncoords, self.nlambda
        )

    def filter_bidegree(self, hol: int, anti: int) -> "CurrentSum":
        return self.filter(lambda t: t.bidegree() == (hol, anti))

    def canonical_map(self) -> dict:
        """Group terms by structure; fold sign and i-parity into scalars.

        The key is (factors, units, pi_power, i in {0, 1}); values are
        canonical RatFn sums.  Two sums are the same current exactly when
        their maps agree, which is the equality used by the structural
        identity tests.
        """
        grouped: dict[tuple, RatFn] = {}
        for term in self.terms:
            i_sign, i_bit = fold_i_power(term.i_power)
            key = (term.factors, term.units, term.pi_power, i_bit)
            scalar = term.scalar * Fraction(term.sign * i_sign)
            if key in grouped:
                grouped[key] = grouped[key] + scalar
            else:
                grouped[key] = scalar
        return {key: value for key, value in grouped.items() if not value.is_zero}

    def structurally_equal(self, other: "CurrentSum") -> bool:
        if (self.ncoords, self.nlambda) != (other.ncoords, other.nlambda):
            return False
        left = self.canonical_map()
        right = other.canonical_map()
        if set(left) != set(right):
            return False
        return all(left[key].equivalent(right[key]) for key in left)


def fold_i_power(power: int) -> tuple[int, int]:
    """Reduce ``i ** power`` to ``(sign, bit)`` with ``i**power = sign * i**bit``."""
    residue = power % 4
    if residue == 0:
        return 1, 0
    if residue == 1:
        return 1, 1
    if residue == 2:
        return -1, 0
    return -1, 1


@dataclass(frozen=True)
class ExactValue:
    """Exact pairing value: a sum of ``q * pi^a * i^b`` parts.

    Parts are merged by the ``(a, b)`` tag and sorted, so structural
    equality is value equality.
    """

    parts: tuple[tuple[Fraction, int, int], ...]

    @classmethod
    def from_parts(cls, parts: Iterable[tuple[Fraction, int, int]]) -> "ExactValue":
        merged: dict[tuple[int, int], Fraction] = {}
        for value, pi_power, i_power in parts:
            sign, bit = fold_i_power(i_power)
            key = (pi_power, bit)
            merged[key] = merged.get(key, Fraction(0)) + value * sign
        cleaned = tuple(
            (value, pi_power, bit)
            for (pi_power, bit), value in sorted(merged.items())
            if value
        )
        return cls(cleaned)

    @classmethod
    def zero(cls) -> "ExactValue":
        return cls(())

    @classmethod
    def rational(cls, value: RationalLike, pi_power: int = 0, i_power: int = 0) -> "ExactValue":
        return cls.from_parts([(_coerce(value), pi_power, i_power)])

    @property
    def is_zero(self) -> bool:
        return not self.parts

    def __add__(self, other: "ExactValue") -> "ExactValue":
        return ExactValue.from_parts(tuple(self.parts) + tuple(other.parts))

    def __neg__(self) -> "ExactValue":
        return ExactValue(tuple((-v, a, b) for v, a, b in self.parts))

    def scale(self, value: RationalLike) -> "ExactValue":
        c = _coerce(value)
        if not c:
            return ExactValue.zero()
        return ExactValue(tuple((v * c, a, b) for v, a, b in self.parts))

    def to_complex(self) -> complex:
        total = 0j
        for value, pi_power, i_bit in self.parts:
            part = float(value) * math.pi**pi_power
            total += part * 1j if i_bit else part
        return total

    def to_jsonable(self):
        def encode(value: Fraction, pi_power: int, i_bit: int) -> dict:
            return {
                "q": f"{value.numerator}/{value.denominator}",
                "pi": pi_power,
                "i": i_bit,
            }

        if not self.parts:
            return encode(Fraction(0), 0, 0)
        if len(self.parts) == 1:
            return encode(*self.parts[0])
        return [encode(*part) for part in self.parts]


# -- pairing ----------------------------------------------------------------


def _slot_diffs(slot: TestSlot) -> tuple[str, ...]:
    return _SLOT_DIFFS[slot.diff]


def _coordinate_moment(factor: CurrentFactor, slot: TestSlot) -> RatFn:
    """Radial content of one coordinate after the angular selector fired."""
    if slot.profile.degree < factor.smooth_pole + 2:
        raise InsufficientSmoothness(
            f"profile degree {slot.profile.degree} cannot absorb a section "
            f"pole of order {factor.smooth_pole} (need >= {factor.smooth_pole + 2})"
        )
    shift = slot.a - factor.c_hol
    value = slot.profile.transform(factor.weight, shift)
    if factor.prefactor is not None:
        value = value * factor.prefactor
    return value


def _pair_coordinate(
    factor: CurrentFactor, slot: TestSlot, nlambda: int
) -> tuple[RatFn, int, int] | None:
    """Value of one coordinate, or None when differentials cannot complete.

    Returns ``(ratfn, pi_power, i_power)`` for the coordinate; the charge
    selector returns an exact zero value (still a successful match).
    """
    diffs = _slot_diffs(slot)
    hol = int(factor.has_dx) + diffs.count("hol")
    anti = int(factor.has_dxbar) + diffs.count("anti")
    if hol != 1 or anti != 1:
        return None
    if slot.a - factor.c_hol != slot.d - factor.c_anti:
        return RatFn.zero(nlambda), 0, 0
    value = _coordinate_moment(factor, slot)
    # dx ^ dxbar = -2 pi i * dt ^ dtheta/(2 pi) structure: one factor per coordinate
    value = value * Fraction(-2)
    pi_power, i_power = 1, 1
    if slot.diff == "vol":
        value = value * Fraction(1, 2)
        i_power += 1
    return value, pi_power, i_power


def factor_pairing(factor: CurrentFactor, slot: TestSlot, nlambda: int) -> tuple[RatFn, int, int]:
    """Pair one coordinate factor against one test slot.

    Assumes the canonical within-coordinate orientation ``dx ^ dxbar``.
    Raises ``DegreeMismatch`` when the combined differentials cannot form
    a full area element, ``InsufficientSmoothness`` when the profile is
    too rough for the section pole.
    """
    result = _pair_coordinate(factor, slot, nlambda)
    if result is None:
        raise DegreeMismatch(
            "combined differentials do not complete a full area element"
        )
    return result


def _inversion_parity(ranks: Sequence[int]) -> int:
    sign = 1
    for i in range(len(ranks)):
        for j in range(i + 1, len(ranks)):
            if ranks[i] > ranks[j]:
                sign = -sign
    return sign


def _diff_rank(coord: int, kind: str) -> int:
    return 2 * coord + (0 if kind == "hol" else 1)


def canonical_diff_sign(written: Sequence[tuple[int, str]]) -> int | None:
    """Parity sorting a written wedge sequence into canonical order.

    Returns None when a differential repeats (the wedge vanishes).
    """
    ranks = [_diff_rank(k, kind) for k, kind in written]
    if len(set(ranks)) != len(ranks):
        return None
    return _inversion_parity(ranks)


def merge_sign(
    current_diffs: Sequence[tuple[int, str]], test_diffs: Sequence[tuple[int, str]]
) -> int:
    """Parity of reordering current then test differentials canonically.

    The pairing is the honest wedge integral of current and test parts
    written in that order, so the sign is the full inversion parity of
    the concatenated sequence against the canonical interleaved order
    (coordinates ascending, ``dx`` before ``dconj(x)``).  This keeps the
    exact values equal to the numerically integrated regularized forms,
    orientation included.  All symbols must be distinct, which holds once
    each coordinate completes to exactly one of each differential.
    """
    ranks = [_diff_rank(k, kind) for k, kind in current_diffs]
    ranks += [_diff_rank(k, kind) for k, kind in test_diffs]
    return _inversion_parity(ranks)


@dataclass(frozen=True)
class PairedTerm:
    """One term of a pairing: scalar times per-coordinate rational values.

    Keeping coordinates unexpanded lets the limit routines work factor by
    factor (each coordinate's limit exists on its own; finite limits
    distribute over products), which avoids expanding large multivariate
    sums in randomized runs.
    """

    scalar: RatFn
    coords: tuple[RatFn, ...]
    pi_power: int
    i_power: int
    units: tuple[tuple[Fraction, LinearForm], ...]

    def as_ratfn(self) -> RatFn:
        value = self.scalar
        for coord in self.coords:
            value = value * coord
        return value

    def value_iterated(self, order: Sequence[int] | None) -> tuple[Fraction, int, int]:
        value = self.scalar.iterated_limit(order)
        for coord in self.coords:
            if not value:
                # remaining factors still must have finite limits
                coord.iterated_limit(order)
                continue
            value *= coord.iterated_limit(order)
        return value, self.pi_power, self.i_power

    def value_curve(self, mu: Sequence[int]) -> tuple[Fraction, int, int]:
        value = self.scalar.curve_value_at_zero(mu)
        for coord in self.coords:
            if not value:
                coord.curve_value_at_zero(mu)
                continue
            value *= coord.curve_value_at_zero(mu)
        return value, self.pi_power, self.i_power

    def evaluate_complex(self, point: Sequence[RationalLike]) -> complex:
        exact = self.scalar.evaluate(point)
        for coord in self.coords:
            exact *= coord.evaluate(point)
        value = float(exact) * math.pi**self.pi_power
        for unit, form in self.units:
            value *= float(unit) ** (2 * float(form.evaluate(point)))
        sign, bit = fold_i_power(self.i_power)
        value *= sign
        return value * 1j if bit else complex(value)


@dataclass(frozen=True)
class PairedValue:
    """Exact pairing of a current sum against a split test form."""

    nlambda: int
    terms: tuple[PairedTerm, ...]
    matched: int
    skipped: int

    def value_iterated(self, order: Sequence[int] | None = None) -> ExactValue:
        return ExactValue.from_parts(term.value_iterated(order) for term in self.terms)

    def value_curve(self, mu: Sequence[int]) -> ExactValue:
        return ExactValue.from_parts(term.value_curve(mu) for term in self.terms)

    def evaluate_complex(self, point: Sequence[RationalLike]) -> complex:
        return sum((term.evaluate_complex(point) for term in self.terms), 0j)

    def components(self) -> dict[tuple[int, int], RatFn]:
        """Fully expanded rational components keyed by ``(pi, i)`` powers.

        Only available when no parameter-dependent unit tags are present;
        intended for desk-scale identity checks.
        """
        out: dict[tuple[int, int], RatFn] = {}
        for term in self.terms:
            if term.units:
                raise ValueError("components() does not support unit tags")
            sign, bit = fold_i_power(term.i_power)
            key = (term.pi_power, bit)
            value = term.as_ratfn() * Fraction(sign)
            out[key] = out[key] + value if key in out else value
        return {key: value for key, value in out.items() if not value.is_zero}


def pairing(currents: CurrentSum, test: TestForm, strict: bool = False) -> PairedValue:
    """Pair a current sum with a split test form, exactly.

    Terms whose differentials cannot complete a full volume element are
    skipped (counted in ``skipped``); with ``strict`` set, having no
    matching term at all raises ``DegreeMismatch``.
    """
    if currents.ncoords != test.ncoords:
        raise VariableMismatch(
            f"current on {currents.ncoords} coordinates vs test on {test.ncoords}"
        )
    nlambda = currents.nlambda
    terms: list[PairedTerm] = []
    matched = 0
    skipped = 0
    test_diffs = [
        (k, kind) for k, slot in enumerate(test.slots) for kind in _slot_diffs(slot)
    ]
    for term in currents.terms:
        coords: list[RatFn] = []
        pi_power = term.pi_power
        i_power = term.i_power
        ok = True
        for factor, slot in zip(term.factors, test.slots):
            result = _pair_coordinate(factor, slot, nlambda)
            if result is None:
                ok = False
                break
            value, extra_pi, extra_i = result
            coords.append(value)
            pi_power += extra_pi
            i_power += extra_i
        if not ok:
            skipped += 1
            continue
        matched += 1
        sign = term.sign * merge_sign(term.diff_sequence(), test_diffs)
        terms.append(
            PairedTerm(
                scalar=term.scalar * Fraction(sign),
                coords=tuple(coords),
                pi_power=pi_power,
                i_power=i_power,
                units=term.units,
            )
        )
    if strict and matched == 0:
        raise DegreeMismatch("no expansion term matches the test form's differentials")
    return PairedValue(nlambda=nlambda, terms=tuple(terms), matched=matched, skipped=skipped)


def value_at_zero(
    paired: PairedValue,
    mode: str = "iterated",
    order: Sequence[int] | None = None,
    mu: Sequence[int] | None = None,
) -> ExactValue:
    """Limit of a paired value at the parameter origin.

    ``mode`` selects the recursive one-variable-at-a-time limit
    (``"iterated"``, optional ``order``) or the one-parameter curve
    ``lambda_j = t^mu_j`` (``"curve"``, requires ``mu``).
    """
    if mode == "iterated":
        return paired.value_iterated(order)
    if mode == "curve":
        if mu is None:
            raise ValueError("curve mode needs weights")
        return paired.value_curve(mu)
    raise ValueError(f"unknown mode {mode!r}")
