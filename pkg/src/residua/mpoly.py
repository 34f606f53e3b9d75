"""Sparse multivariate polynomials and affine linear forms over rationals.

Everything downstream (limit evaluation, one-parameter substitution,
positivity certificates) runs on exact arithmetic, so polynomials are kept
as sparse dictionaries mapping exponent tuples to ``fractions.Fraction``
coefficients.  No floating point enters this module.

Two types live here:

* ``MPoly`` -- a polynomial in ``nvars`` variables.
* ``LinearForm`` -- an affine form ``c_1*x_1 + ... + c_r*x_r + c_0`` with
  integer coefficients.  Linear forms are the only denominators the rest of
  the package ever produces, which is why rational functions downstream can
  keep their denominators factored instead of expanded.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import NotDivisible, VariableMismatch

Exponent = tuple[int, ...]

RationalLike = Fraction | int


def _coerce(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


class MPoly:
    """Sparse polynomial with exact rational coefficients.

    Instances are treated as immutable: all operations return new objects
    and never mutate ``terms`` in place, so values can be shared freely
    across threads and cached results.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, RationalLike] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[Exponent, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            key = tuple(int(e) for e in exps)
            if len(key) != nvars:
                raise VariableMismatch(f"exponent {key} does not have {nvars} entries")
            if any(e < 0 for e in key):
                raise ValueError(f"negative exponent in {key}")
            c = _coerce(coeff)
            if c:
                clean[key] = clean.get(key, Fraction(0)) + c
                if not clean[key]:
                    del clean[key]
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("MPoly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "MPoly":
        return cls(nvars, {})

    @classmethod
    def const(cls, nvars: int, value: RationalLike) -> "MPoly":
        c = _coerce(value)
        if not c:
            return cls.zero(nvars)
        return cls(nvars, {tuple([0] * nvars): c})

    @classmethod
    def one(cls, nvars: int) -> "MPoly":
        return cls.const(nvars, 1)

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MPoly":
        if not 0 <= index < nvars:
            raise VariableMismatch(f"variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: RationalLike = 1) -> "MPoly":
        return cls(len(exps), {tuple(exps): coeff})

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        if not self.terms:
            return True
        return set(self.terms) == {tuple([0] * self.nvars)}

    def constant_value(self) -> Fraction:
        """Value of a constant polynomial; raises on anything else."""
        if self.is_zero:
            return Fraction(0)
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()))

    # -- ring operations ---------------------------------------------------

    def _check_same(self, other: "MPoly") -> None:
        if self.nvars != other.nvars:
            raise VariableMismatch(f"{self.nvars} variables vs {other.nvars}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "MPoly | RationalLike") -> "MPoly":
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(self.nvars, other)
        self._check_same(other)
        result = dict(self.terms)
        for exps, coeff in other.terms.items():
            result[exps] = result.get(exps, Fraction(0)) + coeff
        return MPoly(self.nvars, result)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MPoly | RationalLike") -> "MPoly":
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other: RationalLike) -> "MPoly":
        return MPoly.const(self.nvars, other) - self

    def __mul__(self, other: "MPoly | RationalLike") -> "MPoly":
        if isinstance(other, (int, Fraction)):
            c = _coerce(other)
            if not c:
                return MPoly.zero(self.nvars)
            return MPoly(self.nvars, {e: k * c for e, k in self.terms.items()})
        self._check_same(other)
        result: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                result[key] = result.get(key, Fraction(0)) + c1 * c2
        return MPoly(self.nvars, result)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "MPoly":
        if power < 0:
            raise ValueError("negative power")
        result = MPoly.one(self.nvars)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base if power > 1 else base
            power >>= 1
        return result

    # -- evaluation and substitution ---------------------------------------

    def evaluate(self, point: Sequence[RationalLike]) -> Fraction:
        """Exact value at a rational point."""
        if len(point) != self.nvars:
            raise VariableMismatch(f"point has {len(point)} entries, need {self.nvars}")
        vals = [_coerce(p) for p in point]
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for v, e in zip(vals, exps):
                if e:
                    term *= v**e
            total += term
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        if len(point) != self.nvars:
            raise VariableMismatch(f"point has {len(point)} entries, need {self.nvars}")
        total = 0.0
        for exps, coeff in self.terms.items():
            term = float(coeff)
            for v, e in zip(point, exps):
                if e:
                    term *= float(v) ** e
            total += term
        return total

    def substitute_zero(self, var: int) -> "MPoly":
        """Set variable ``var`` to zero (variable count is preserved)."""
        return MPoly(self.nvars, {e: c for e, c in self.terms.items() if e[var] == 0})

    def min_degree(self, var: int) -> int:
        """Smallest exponent of ``var`` across all terms; error on zero."""
        if self.is_zero:
            raise ValueError("min_degree of the zero polynomial")
        return min(e[var] for e in self.terms)

    def max_degree(self, var: int) -> int:
        if self.is_zero:
            raise ValueError("max_degree of the zero polynomial")
        return max(e[var] for e in self.terms)

    def divide_power(self, var: int, power: int) -> "MPoly":
        """Exact division by ``x_var ** power``."""
        if power == 0:
            return self
        result = {}
        for exps, coeff in self.terms.items():
            if exps[var] < power:
                raise NotDivisible(f"term {exps} not divisible by variable {var}^{power}")
            key = list(exps)
            key[var] -= power
            result[tuple(key)] = coeff
        return MPoly(self.nvars, result)

    def monomial_content(self) -> Exponent:
        """Componentwise minimum exponent vector (content monomial)."""
        if self.is_zero:
            return tuple([0] * self.nvars)
        mins = None
        for exps in self.terms:
            mins = exps if mins is None else tuple(min(a, b) for a, b in zip(mins, exps))
        return mins  # type: ignore[return-value]

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def exact_divide(self, divisor: "MPoly") -> "MPoly":
        """Exact multivariate division, raising NotDivisible on a remainder.

        Uses single-divisor division with respect to the lexicographic
        order.  For one divisor the algorithm is exact: the quotient is
        unique and any step whose leading term is not divisible by the
        divisor's leading term certifies a nonzero remainder.
        """
        self._check_same(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero:
            return MPoly.zero(self.nvars)
        lead_e = max(divisor.terms)
        lead_c = divisor.terms[lead_e]
        remainder = dict(self.terms)
        quotient: dict[Exponent, Fraction] = {}
        while remainder:
            f_e = max(remainder)
            f_c = remainder[f_e]
            q_e = tuple(a - b for a, b in zip(f_e, lead_e))
            if any(e < 0 for e in q_e):
                raise NotDivisible(f"remainder with leading term {f_e}")
            q_c = f_c / lead_c
            quotient[q_e] = quotient.get(q_e, Fraction(0)) + q_c
            for d_e, d_c in divisor.terms.items():
                key = tuple(a + b for a, b in zip(q_e, d_e))
                new = remainder.get(key, Fraction(0)) - q_c * d_c
                if new:
                    remainder[key] = new
                else:
                    remainder.pop(key, None)
        return MPoly(self.nvars, quotient)

    def subs_powers(self, weights: Sequence[int]) -> "MPoly":
        """Substitute ``x_j -> t ** weights[j]``, producing a univariate polynomial."""
        if len(weights) != self.nvars:
            raise VariableMismatch(f"{len(weights)} weights for {self.nvars} variables")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        result: dict[Exponent, Fraction] = {}
        for exps, coeff in self.terms.items():
            key = (sum(e * w for e, w in zip(exps, weights)),)
            result[key] = result.get(key, Fraction(0)) + coeff
        return MPoly(1, result)

    # -- formatting --------------------------------------------------------

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if self.is_zero:
            return "0"
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        pieces = []
        for exps in sorted(self.terms, reverse=True):
            coeff = self.terms[exps]
            factors = [
                names[i] if e == 1 else f"{names[i]}^{e}"
                for i, e in enumerate(exps)
                if e
            ]
            if not factors:
                body = str(coeff)
            elif coeff == 1:
                body = "*".join(factors)
            elif coeff == -1:
                body = "-" + "*".join(factors)
            else:
                body = "*".join([str(coeff)] + factors)
            pieces.append(body)
        out = pieces[0]
        for piece in pieces[1:]:
            out += piece if piece.startswith("-") else "+" + piece
        return out

    def __repr__(self) -> str:
        return f"MPoly({self.nvars}, {self.to_string()})"


class LinearForm:
    """Affine form ``c_1*x_1 + ... + c_r*x_r + c_0`` with integer data.

    Forms are hashable and totally ordered by their coefficient data so
    multisets of denominator factors have a canonical layout.  The zero
    form is representable as a value but rejected as a denominator by
    the rational-function layer.
    """

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Iterable[int], const: int = 0):
        coeffs = tuple(int(c) for c in coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "const", int(const))

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("LinearForm is immutable")

    @property
    def nvars(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return self.const == 0 and not any(self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs)

    @property
    def nonnegative(self) -> bool:
        return self.const >= 0 and all(c >= 0 for c in self.coeffs)

    def pure_variable(self) -> int | None:
        """Index j when the form equals ``c * x_j`` (c != 0), else None."""
        if self.const != 0:
            return None
        support = [i for i, c in enumerate(self.coeffs) if c]
        if len(support) == 1:
            return support[0]
        return None

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coeffs) if c)

    def primitive(self) -> tuple["LinearForm", Fraction]:
        """Canonical associate: content removed, first nonzero entry positive.

        Returns ``(form, scale)`` with ``self == scale * form``.
        """
        entries = [c for c in self.coeffs if c] + ([self.const] if self.const else [])
        if not entries:
            return self, Fraction(1)
        g = 0
        for c in entries:
            g = math.gcd(g, abs(c))
        if entries[0] < 0:
            g = -g
        return (
            LinearForm([c // g for c in self.coeffs], self.const // g),
            Fraction(g),
        )

    def shift(self, offset: int) -> "LinearForm":
        return LinearForm(self.coeffs, self.const + offset)

    def substitute_zero(self, var: int) -> "LinearForm":
        coeffs = list(self.coeffs)
        coeffs[var] = 0
        return LinearForm(coeffs, self.const)

    def as_mpoly(self) -> MPoly:
        terms: dict[Exponent, Fraction] = {}
        for i, c in enumerate(self.coeffs):
            if c:
                key = [0] * self.nvars
                key[i] = 1
                terms[tuple(key)] = Fraction(c)
        if self.const:
            terms[tuple([0] * self.nvars)] = Fraction(self.const)
        return MPoly(self.nvars, terms)

    def evaluate(self, point: Sequence[RationalLike]) -> Fraction:
        if len(point) != self.nvars:
            raise VariableMismatch(f"point has {len(point)} entries, need {self.nvars}")
        total = Fraction(self.const)
        for c, p in zip(self.coeffs, point):
            if c:
                total += c * _coerce(p)
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        total = float(self.const)
        for c, p in zip(self.coeffs, point):
            if c:
                total += c * float(p)
        return total

    def subs_powers(self, weights: Sequence[int]) -> MPoly:
        """Substitute ``x_j -> t ** weights[j]`` into the form."""
        if len(weights) != self.nvars:
            raise VariableMismatch(f"{len(weights)} weights for {self.nvars} variables")
        terms: dict[Exponent, Fraction] = {}
        for c, w in zip(self.coeffs, weights):
            if c:
                terms[(w,)] = terms.get((w,), Fraction(0)) + c
        if self.const:
            terms[(0,)] = terms.get((0,), Fraction(0)) + self.const
        return MPoly(1, terms)

    def sort_key(self) -> tuple:
        return (self.coeffs, self.const)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self.coeffs == other.coeffs and self.const == other.const

    def __lt__(self, other: "LinearForm") -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self) -> int:
        return hash((self.coeffs, self.const))

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        pieces = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if c == 1:
                pieces.append(names[i])
            elif c == -1:
                pieces.append(f"-{names[i]}")
            else:
                pieces.append(f"{c}*{names[i]}")
        if self.const or not pieces:
            pieces.append(str(self.const))
        out = pieces[0]
        for piece in pieces[1:]:
            out += piece if piece.startswith("-") else "+" + piece
        return out

    def __repr__(self) -> str:
        return f"LinearForm({self.to_string()})"


def iter_exponents(bounds: Sequence[int]) -> Iterator[Exponent]:
    """All exponent tuples with ``0 <= e_i < bounds[i]`` in lexicographic order."""
    if not bounds:
        yield ()
        return
    first, rest = bounds[0], bounds[1:]
    for head in range(first):
        for tail in iter_exponents(rest):
            yield (head,) + tail
