"""Ordered products of rank-1 monomial building blocks.

A product spec lists factors, each one of three kinds over a monomial
``u * x^alpha``:

* ``U``: the principal-value block ``|f|^(2 lambda) / f^k``;
* ``R``: the full residue block ``1 - |f|^(2 lambda) / f^(k-1)
  + dbar |f|^(2 lambda) / f^k`` (equal to ``1 - nabla_f U`` at the
  parameter level, which :func:`nabla_identity_holds` verifies);
* ``M``: the positive closed block ``1 - |f|^(2 lambda)
  + dbar |f|^(2 lambda) ^ d log|f|^2 / (2 pi i)``.

Factor 1 is the innermost factor and receives the largest curve weight;
the wedge is written with the last factor first.  Expansion distributes
the wedge into tensor terms with exact shuffle signs, and evaluation
compares the iterated limit with the one-parameter curve limit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .currents import (
    CurrentFactor,
    CurrentSum,
    ExactValue,
    TensorCurrent,
    TestForm,
    canonical_diff_sign,
    pairing,
    unit_factor,
)
from .errors import NotCompleteIntersection, UnsupportedRank
from .exponents import Weights
from .mpoly import LinearForm, MPoly, RationalLike, _coerce
from .profiles import RadialProfile
from .ratfn import RatFn

FACTOR_KINDS = ("U", "R", "M")


@dataclass(frozen=True)
class FactorSpec:
    """One rank-1 factor over the monomial ``unit * x^exponents``."""

    kind: str
    exponents: tuple[int, ...]
    unit: Fraction = Fraction(1)
    pole: int = 1

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise UnsupportedRank(f"unknown factor kind {self.kind!r}")
        exps = tuple(int(e) for e in self.exponents)
        if not exps or any(e < 0 for e in exps):
            raise UnsupportedRank("factor needs a nonnegative exponent vector")
        if all(e == 0 for e in exps):
            raise UnsupportedRank("constant sections are not rank-1 data")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "unit", _coerce(self.unit))
        if self.unit <= 0:
            raise UnsupportedRank("unit constant must be a positive rational")
        if self.pole < 1:
            raise UnsupportedRank("pole order must be at least 1")
        if self.kind == "M" and self.pole != 1:
            raise UnsupportedRank("positive closed factors carry no pole order")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(c for c, e in enumerate(self.exponents) if e)

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "exponents": list(self.exponents),
            "unit": f"{self.unit.numerator}/{self.unit.denominator}",
            "pole": self.pole,
        }


def default_weights(nfactors: int) -> Weights:
    """Odd strictly decreasing weights ``2q-1, 2q-3, ..., 1``."""
    return Weights(tuple(2 * (nfactors - j) - 1 for j in range(nfactors)))


@dataclass(frozen=True)
class ProductSpec:
    """Ordered factors (index 0 innermost) with curve weights."""

    factors: tuple[FactorSpec, ...]
    weights: Weights | None = None

    def __post_init__(self):
        if not self.factors:
            raise UnsupportedRank("product needs at least one factor")
        ncoords = len(self.factors[0].exponents)
        for factor in self.factors:
            if len(factor.exponents) != ncoords:
                raise UnsupportedRank("factors live on different coordinate counts")
        if self.weights is not None and len(self.weights.mu) != len(self.factors):
            raise UnsupportedRank("need one curve weight per factor")

    @property
    def ncoords(self) -> int:
        return len(self.factors[0].exponents)

    @property
    def nfactors(self) -> int:
        return len(self.factors)

    def curve_weights(self) -> Weights:
        return self.weights if self.weights is not None else default_weights(self.nfactors)

    def to_jsonable(self) -> dict:
        return {
            "factors": [f.to_jsonable() for f in self.factors],
            "weights": list(self.curve_weights().mu),
        }


@dataclass(frozen=True)
class _Slot:
    """One choice in a factor's expansion.

    ``weighted`` marks slots carrying the ``|f|^(2 lambda)`` density;
    ``section_pole`` is the ``1/f^k`` power (smoothness-relevant);
    ``diffs`` are written differentials; ``prefactors`` maps a coordinate
    to the parameter polynomial attached to its radial moment;
    ``hol_poles``/``anti_poles`` add differentiation poles per coordinate.
    """

    name: str
    scalar: Fraction
    weighted: bool
    section_pole: int = 0
    diffs: tuple[tuple[int, str], ...] = ()
    hol_poles: tuple[int, ...] = ()
    anti_poles: tuple[int, ...] = ()
    prefactors: tuple[tuple[int, tuple[int, ...]], ...] = ()
    pi_power: int = 0
    i_power: int = 0


def _factor_slots(factor: FactorSpec, index: int, nfactors: int) -> list[_Slot]:
    """Expansion slots of one factor; ``index`` is 0-based factor position."""
    alpha = factor.exponents
    k = factor.pole
    unit = factor.unit

    def pref(coord: int, scale: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
        # scale * lambda_index as an exponent-coded monomial coefficient
        return ((coord, (index, scale)),)

    if factor.kind == "U":
        return [
            _Slot(
                name="pole",
                scalar=unit ** (-k),
                weighted=True,
                section_pole=k,
            )
        ]
    if factor.kind == "R":
        slots = [
            _Slot(name="one", scalar=Fraction(1), weighted=False),
            _Slot(
                name="restriction",
                scalar=-(unit ** (1 - k)),
                weighted=True,
                section_pole=k - 1,
            ),
        ]
        for coord in factor.support:
            slots.append(
                _Slot(
                    name=f"residue:{coord}",
                    scalar=unit ** (-k),
                    weighted=True,
                    section_pole=k,
                    diffs=((coord, "anti"),),
                    anti_poles=(coord,),
                    prefactors=pref(coord, alpha[coord]),
                )
            )
        return slots
    # M: 1 - |f|^(2 lambda) + dbar|f|^(2 lambda) ^ d log|f|^2 / (2 pi i)
    slots = [
        _Slot(name="one", scalar=Fraction(1), weighted=False),
        _Slot(name="restriction", scalar=Fraction(-1), weighted=True),
    ]
    for anti_coord in factor.support:
        for hol_coord in factor.support:
            slots.append(
                _Slot(
                    name=f"lelong:{anti_coord},{hol_coord}",
                    # 1/(2 pi i) = (-1/2) * pi^(-1) * i
                    scalar=Fraction(-1, 2) * alpha[anti_coord],
                    weighted=True,
                    diffs=((anti_coord, "anti"), (hol_coord, "hol")),
                    hol_poles=(hol_coord,),
                    anti_poles=(anti_coord,),
                    prefactors=pref(hol_coord, alpha[hol_coord]),
                    pi_power=-1,
                    i_power=1,
                )
            )
    return slots


def expand_product(spec: ProductSpec) -> CurrentSum:
    """Distribute the wedge over every factor's slots, signs included.

    Terms whose written differentials repeat (the wedge vanishes) are
    dropped.  The written order puts the last factor first, matching the
    recursive continuation that sends the innermost parameter to zero
    first.
    """
    n = spec.ncoords
    q = spec.nfactors
    all_slots = [_factor_slots(f, j, q) for j, f in enumerate(spec.factors)]
    terms: list[TensorCurrent] = []
    for choice in itertools.product(*all_slots):
        written: list[tuple[int, str]] = []
        for j in reversed(range(q)):
            written.extend(choice[j].diffs)
        sign = canonical_diff_sign(written)
        if sign is None:
            continue
        weight_rows = [[0] * q for _ in range(n)]
        hol = [0] * n
        anti = [0] * n
        smooth = [0] * n
        prefactor: list[MPoly | None] = [None] * n
        scalar = Fraction(1)
        pi_power = 0
        i_power = 0
        units: list[tuple[Fraction, LinearForm]] = []
        for j, slot in enumerate(choice):
            factor = spec.factors[j]
            scalar *= slot.scalar
            pi_power += slot.pi_power
            i_power += slot.i_power
            if slot.weighted:
                for c, e in enumerate(factor.exponents):
                    weight_rows[c][j] += e
                if factor.unit != 1:
                    basis = [1 if i == j else 0 for i in range(q)]
                    units.append((factor.unit, LinearForm(basis, 0)))
                for c, e in enumerate(factor.exponents):
                    hol[c] += slot.section_pole * e
                    smooth[c] += slot.section_pole * e
            for c in slot.hol_poles:
                hol[c] += 1
            for c in slot.anti_poles:
                anti[c] += 1
            for c, (var, scale) in slot.prefactors:
                piece = MPoly.variable(q, var) * scale
                prefactor[c] = piece if prefactor[c] is None else prefactor[c] * piece
        has_anti = [False] * n
        has_hol = [False] * n
        for c, kind in written:
            if kind == "anti":
                has_anti[c] = True
            else:
                has_hol[c] = True
        factors = tuple(
            CurrentFactor(
                weight=LinearForm(weight_rows[c], 0),
                c_hol=hol[c],
                c_anti=anti[c],
                smooth_pole=smooth[c],
                has_dx=has_hol[c],
                has_dxbar=has_anti[c],
                prefactor=prefactor[c],
            )
            for c in range(n)
        )
        terms.append(
            TensorCurrent(
                factors=factors,
                scalar=RatFn.const(q, scalar),
                sign=sign,
                pi_power=pi_power,
                i_power=i_power,
                units=tuple(units),
                tags=tuple(f"{spec.factors[j].kind}:{choice[j].name}" for j in range(q)),
            )
        )
    return CurrentSum(tuple(terms), ncoords=n, nlambda=q)


@dataclass(frozen=True)
class ProductReport:
    """Evaluation outcome: both limits, their equality, and certificates."""

    spec: ProductSpec
    iterated: ExactValue
    curve: ExactValue
    equal: bool
    matched: int
    skipped: int
    witnesses: tuple[dict, ...]
    notes: tuple[str, ...] = ()

    @property
    def value(self) -> ExactValue:
        return self.iterated

    def to_jsonable(self) -> dict:
        return {
            "spec": self.spec.to_jsonable(),
            "iterated": self.iterated.to_jsonable(),
            "curve": self.curve.to_jsonable(),
            "equal": self.equal,
            "matched": self.matched,
            "skipped": self.skipped,
            "witnesses": list(self.witnesses),
            "notes": list(self.notes),
        }


def _report(
    spec: ProductSpec,
    currents: CurrentSum,
    test: TestForm,
    exploratory: bool,
    notes: tuple[str, ...] = (),
) -> ProductReport:
    weights = spec.curve_weights()
    if not exploratory:
        weights.require_strictly_decreasing()
    paired = pairing(currents, test)
    iterated = paired.value_iterated()
    curve = paired.value_curve(weights.mu)
    witnesses = []
    for term in paired.terms:
        value = term.as_ratfn()
        if value.is_zero:
            continue
        witness = value.positivity_witness(weights.mu)
        witnesses.append(
            {
                "pi": term.pi_power,
                "i": term.i_power,
                "summary": witness.summary(),
            }
        )
    return ProductReport(
        spec=spec,
        iterated=iterated,
        curve=curve,
        equal=iterated == curve,
        matched=paired.matched,
        skipped=paired.skipped,
        witnesses=tuple(witnesses),
        notes=notes,
    )


def evaluate_product(
    spec: ProductSpec, test: TestForm, exploratory: bool = False
) -> ProductReport:
    """Expand, pair, and compare the two limits for a mixed product."""
    return _report(spec, expand_product(spec), test, exploratory)


def ch_product(
    monomials: Sequence[Sequence[int]],
    test: TestForm,
    weights: Weights | None = None,
    units: Sequence[RationalLike] | None = None,
    exploratory: bool = False,
) -> ProductReport:
    """Top-degree part of the all-residue product of the given monomials.

    Convenience wrapper for the classical product of antiholomorphic
    derivative factors: builds an all-``R`` spec, keeps only the terms of
    top antiholomorphic degree, and evaluates both limits.
    """
    if units is None:
        units = [Fraction(1)] * len(monomials)
    factors = tuple(
        FactorSpec(kind="R", exponents=tuple(m), unit=_coerce(u))
        for m, u in zip(monomials, units)
    )
    spec = ProductSpec(factors=factors, weights=weights)
    top = expand_product(spec).filter_bidegree(0, spec.nfactors)
    return _report(spec, top, test, exploratory)


def m_product(spec: ProductSpec, test: TestForm, exploratory: bool = False) -> ProductReport:
    """Evaluate a product of positive closed factors, with the rank note."""
    for factor in spec.factors:
        if factor.kind != "M":
            raise UnsupportedRank("m_product expects positive closed factors only")
    note = (
        "higher-power terms dropped: the square of d dbar log|f|^2 vanishes "
        "as a smooth form for monomial data",
    )
    return _report(spec, expand_product(spec), test, exploratory, notes=note)


def _spanning_profiles(max_pole: int) -> tuple[RadialProfile, ...]:
    degree = max_pole + 2
    return (RadialProfile.bump(degree), RadialProfile(degree, (Fraction(1), Fraction(1))))


def annihilation_test(spec: ProductSpec, extra: Sequence[int]) -> bool:
    """Does multiplying by ``x^extra`` kill the top residue part?

    Requires an all-residue complete-intersection spec: pairwise disjoint
    variable supports.  The extra monomial is absorbed into the test
    monomial powers; the family spans powers up to each coordinate's pole
    order, which is enough to detect any surviving term.
    """
    n = spec.ncoords
    extra = tuple(int(e) for e in extra)
    if len(extra) != n or any(e < 0 for e in extra):
        raise UnsupportedRank("extra monomial needs nonnegative exponents")
    seen: set[int] = set()
    for factor in spec.factors:
        if factor.kind != "R":
            raise NotCompleteIntersection("duality test expects residue factors")
        overlap = seen.intersection(factor.support)
        if overlap:
            raise NotCompleteIntersection(
                f"factor supports overlap on coordinate {sorted(overlap)[0] + 1}"
            )
        seen.update(factor.support)
    top = expand_product(spec).filter_bidegree(0, spec.nfactors)
    poles = [0] * n
    for term in top.terms:
        for c, factor in enumerate(term.factors):
            poles[c] = max(poles[c], factor.c_hol)
    profiles = _spanning_profiles(max(poles))
    diffs = ["dx" if c in seen else "vol" for c in range(n)]
    for profile in profiles:
        for powers in itertools.product(*(range(p + 1) for p in poles)):
            shifted = [powers[c] + extra[c] for c in range(n)]
            test = TestForm.uniform(shifted, diffs, profile)
            if not pairing(top, test).value_iterated().is_zero:
                return False
    return True


def nabla_identity_holds(factor: FactorSpec) -> bool:
    """Check ``R(f) = 1 - nabla_f U(f)`` term by term at the parameter level.

    ``nabla_f`` is interior multiplication by the section minus the
    antiholomorphic derivative; both sides are expanded structurally and
    compared as canonical current sums.
    """
    r_side = expand_product(ProductSpec((FactorSpec("R", factor.exponents, factor.unit, factor.pole),)))
    u_spec = ProductSpec((FactorSpec("U", factor.exponents, factor.unit, factor.pole),))
    u_term = expand_product(u_spec).terms[0]
    n = len(factor.exponents)

    # interior multiplication by f: divide the section pole by one power
    section_applied = TensorCurrent(
        factors=tuple(
            CurrentFactor(
                weight=f.weight,
                c_hol=f.c_hol - factor.exponents[c],
                c_anti=f.c_anti,
                smooth_pole=f.smooth_pole - factor.exponents[c],
                has_dx=f.has_dx,
                has_dxbar=f.has_dxbar,
                prefactor=f.prefactor,
            )
            for c, f in enumerate(u_term.factors)
        ),
        scalar=u_term.scalar * (-factor.unit),
        sign=u_term.sign,
        pi_power=u_term.pi_power,
        i_power=u_term.i_power,
        units=u_term.units,
        tags=("nabla:section",),
    )

    dbar_terms = []
    for coord in factor.support:
        dbar_terms.append(
            TensorCurrent(
                factors=tuple(
                    CurrentFactor(
                        weight=f.weight,
                        c_hol=f.c_hol,
                        c_anti=f.c_anti + (1 if c == coord else 0),
                        smooth_pole=f.smooth_pole,
                        has_dx=f.has_dx,
                        has_dxbar=f.has_dxbar or c == coord,
                        prefactor=(
                            MPoly.variable(1, 0) * factor.exponents[coord]
                            if c == coord
                            else f.prefactor
                        ),
                    )
                    for c, f in enumerate(u_term.factors)
                ),
                scalar=u_term.scalar,
                sign=u_term.sign,
                pi_power=u_term.pi_power,
                i_power=u_term.i_power,
                units=u_term.units,
                tags=("nabla:dbar",),
            )
        )

    one = TensorCurrent(
        factors=tuple(unit_factor(1) for _ in range(n)),
        scalar=RatFn.one(1),
        tags=("nabla:one",),
    )
    nabla_side = CurrentSum(
        (one, section_applied) + tuple(dbar_terms), ncoords=n, nlambda=1
    )
    return r_side.structurally_equal(nabla_side)
