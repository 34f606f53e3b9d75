"""Exponent matrices, coefficient ratios, and the two-limit agreement check.

An exponent matrix records monomial data: row j holds the exponents of
the j-th monomial, so column k is the total weight that coordinate k
picks up.  The derived objects are:

* weight forms ``b_k(lambda) = sum_j lambda_j alpha[j][k]`` (columns);
* the coefficient ratio ``lambda_1 ... lambda_p / (b_1 ... b_p)``,
  optionally precomposed with a permutation of the parameters;
* the decomposition of a wedge of p antiholomorphic derivatives over
  increasing multi-indices I, with integer minors as coefficients;
* a ratio holomorphy witness: after substituting successive parameter
  ratios, each denominator factor ends in a positive constant, certifying
  holomorphy of the coefficient ratio near the closed positive orthant;
* the agreement check comparing the iterated limit with the value along
  the curve ``lambda_j = t^mu_j`` for strictly decreasing weights, term
  by term, with positivity witnesses attached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .currents import CurrentSum, CurrentFactor, TensorCurrent, canonical_diff_sign
from .errors import (
    IndexOutOfRange,
    NotHolomorphic,
    PoleAtZero,
    SingularMinor,
    WitnessFails,
)
from .mpoly import LinearForm, MPoly
from .ratfn import PositivityWitness, RatFn


@dataclass(frozen=True)
class ExponentMatrix:
    """Nonnegative integer matrix; row j is the exponent of the j-th monomial."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("matrix needs at least one row")
        width = len(self.rows[0])
        if width == 0:
            raise ValueError("matrix needs at least one column")
        clean = []
        for row in self.rows:
            if len(row) != width:
                raise ValueError("ragged rows")
            if any(e < 0 for e in row):
                raise ValueError("entries must be nonnegative")
            clean.append(tuple(int(e) for e in row))
        object.__setattr__(self, "rows", tuple(clean))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    def column(self, k: int) -> tuple[int, ...]:
        if not 0 <= k < self.ncols:
            raise IndexOutOfRange(f"column {k} out of range")
        return tuple(row[k] for row in self.rows)

    def to_jsonable(self) -> list[list[int]]:
        return [list(row) for row in self.rows]


@dataclass(frozen=True)
class Weights:
    """Positive integer weights for the one-parameter curve."""

    mu: tuple[int, ...]

    def __post_init__(self):
        if not self.mu or any(m <= 0 for m in self.mu):
            raise ValueError("weights must be positive integers")
        object.__setattr__(self, "mu", tuple(int(m) for m in self.mu))

    @property
    def strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.mu, self.mu[1:]))

    def require_strictly_decreasing(self) -> None:
        if not self.strictly_decreasing:
            raise ValueError(f"weights {self.mu} are not strictly decreasing")


def weight_forms(alpha: ExponentMatrix) -> tuple[LinearForm, ...]:
    """Columns of the matrix as linear forms in the parameters."""
    return tuple(LinearForm(alpha.column(k), 0) for k in range(alpha.ncols))


def minor_det(alpha: ExponentMatrix, rows: Sequence[int], cols: Sequence[int]) -> int:
    """Integer determinant of the submatrix on ``rows`` x ``cols`` (0-based)."""
    if len(rows) != len(cols):
        raise IndexOutOfRange("minor needs equally many rows and columns")
    for r in rows:
        if not 0 <= r < alpha.nrows:
            raise IndexOutOfRange(f"row {r} out of range")
    for c in cols:
        if not 0 <= c < alpha.ncols:
            raise IndexOutOfRange(f"column {c} out of range")
    entries = [[alpha.rows[r][c] for c in cols] for r in rows]
    return _int_det(entries)


def _int_det(entries: list[list[int]]) -> int:
    size = len(entries)
    if size == 0:
        return 1
    if size == 1:
        return entries[0][0]
    total = 0
    sign = 1
    for i in range(size):
        if entries[i][0]:
            sub = [row[1:] for j, row in enumerate(entries) if j != i]
            total += sign * entries[i][0] * _int_det(sub)
        sign = -sign
    return total


def _normalize_sigma(sigma: Sequence[int] | None, r: int) -> tuple[int, ...]:
    """Permutation as a tuple of 1-based images; identity when None."""
    if sigma is None:
        return tuple(range(1, r + 1))
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, r + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{r}")
    return sigma


def _inverse_sigma(sigma: tuple[int, ...]) -> tuple[int, ...]:
    inverse = [0] * len(sigma)
    for position, image in enumerate(sigma, start=1):
        inverse[image - 1] = position
    return tuple(inverse)


def _permuted_form(alpha: ExponentMatrix, col: int, sigma_inv: tuple[int, ...]) -> LinearForm:
    """Weight form of a column with the parameters permuted."""
    coeffs = [alpha.rows[sigma_inv[m] - 1][col] for m in range(len(sigma_inv))]
    return LinearForm(coeffs, 0)


def coefficient_ratio(
    alpha: ExponentMatrix, p: int, sigma: Sequence[int] | None = None
) -> RatFn:
    """``lambda_sigma(1) .. lambda_sigma(p) / (b_1 .. b_p)(lambda o sigma)``.

    Raises ``SingularMinor`` when the leading p x p minor vanishes (the
    ratio is then not attached to a nondegenerate index choice).
    """
    r, n = alpha.nrows, alpha.ncols
    if not 0 <= p <= min(r, n):
        raise IndexOutOfRange(f"p={p} exceeds min(rows, cols)={min(r, n)}")
    if p and minor_det(alpha, range(p), range(p)) == 0:
        raise SingularMinor("leading minor vanishes")
    return _index_ratio(alpha, tuple(range(p)), p, sigma)


def _index_ratio(
    alpha: ExponentMatrix, cols: tuple[int, ...], p: int, sigma: Sequence[int] | None
) -> RatFn:
    r = alpha.nrows
    sigma = _normalize_sigma(sigma, r)
    sigma_inv = _inverse_sigma(sigma)
    num = MPoly.one(r)
    for j in range(p):
        num = num * MPoly.variable(r, sigma[j] - 1)
    dens = [(_permuted_form(alpha, col, sigma_inv), 1) for col in cols]
    return RatFn(r, num, dens)


@dataclass(frozen=True)
class MultiIndexTerm:
    """One summand of the wedge decomposition over an increasing index set."""

    index_set: tuple[int, ...]
    minor: int
    coeff_fn: RatFn
    tensor: TensorCurrent


def reversal_sign(p: int) -> int:
    """Parity of reversing a length-p wedge: (-1)^(p(p-1)/2)."""
    return -1 if (p * (p - 1) // 2) % 2 else 1


def multi_index_terms(
    alpha: ExponentMatrix, k_mults: Sequence[int], p: int
) -> list[MultiIndexTerm]:
    """Decomposition of the first p antiholomorphic derivative factors.

    Terms run over increasing index sets I of size p with nonzero minor
    ``A_I`` (rows 1..p against columns I).  Each term carries:

    * ``coeff_fn``: the ratio ``lambda_1..lambda_p / prod_{i in I} b_i``;
    * ``tensor``: the model current with scalar ``1 / prod_{i in I} b_i``,
      an antiholomorphic derivative factor (with its weight-form
      prefactor) on each coordinate in I, the full weight on every
      coordinate, and section poles ``sum_{j<=p} k_j alpha[j][k]``.

    The tensor's sign is the reversal parity relating the written wedge
    (innermost factor last) to the canonical increasing order, so pairing
    the direct expansion equals ``lambda_1..lambda_p`` times the
    minor-weighted sum of the term pairings, exactly.
    """
    r, n = alpha.nrows, alpha.ncols
    if not 0 <= p <= min(r, n):
        raise IndexOutOfRange(f"p={p} exceeds min(rows, cols)={min(r, n)}")
    k_mults = tuple(int(k) for k in k_mults)
    if len(k_mults) != r:
        raise IndexOutOfRange(f"need {r} pole multiplicities, got {len(k_mults)}")
    if any(k < 1 for k in k_mults):
        raise ValueError("pole multiplicities must be >= 1")
    forms = weight_forms(alpha)
    poles = [sum(k_mults[j] * alpha.rows[j][k] for j in range(p)) for k in range(n)]
    terms: list[MultiIndexTerm] = []
    for index_set in itertools.combinations(range(n), p):
        minor = minor_det(alpha, range(p), index_set)
        if minor == 0:
            continue
        coeff = _index_ratio(alpha, index_set, p, None)
        factors = []
        for k in range(n):
            in_set = k in index_set
            factors.append(
                CurrentFactor(
                    weight=forms[k],
                    c_hol=poles[k],
                    c_anti=1 if in_set else 0,
                    smooth_pole=poles[k],
                    has_dxbar=in_set,
                    prefactor=forms[k].as_mpoly() if in_set else None,
                )
            )
        scalar = RatFn(r, MPoly.one(r), [(forms[i], 1) for i in index_set])
        tensor = TensorCurrent(
            factors=tuple(factors),
            scalar=scalar,
            sign=reversal_sign(p),
            tags=("decomposition",),
        )
        terms.append(
            MultiIndexTerm(
                index_set=tuple(i + 1 for i in index_set),
                minor=minor,
                coeff_fn=coeff,
                tensor=tensor,
            )
        )
    return terms


def direct_expansion(
    alpha: ExponentMatrix, k_mults: Sequence[int], p: int
) -> CurrentSum:
    """Assignment-level expansion of the same wedge, for identity checks.

    Factor j <= p contributes one antiholomorphic differential on a
    support coordinate (weighted by ``lambda_j alpha[j][k]``); all
    factors contribute their weights.  The wedge is written outermost
    first (factor p down to factor 1); vanishing repeats are dropped.
    """
    r, n = alpha.nrows, alpha.ncols
    if not 0 <= p <= min(r, n):
        raise IndexOutOfRange(f"p={p} exceeds min(rows, cols)={min(r, n)}")
    k_mults = tuple(int(k) for k in k_mults)
    if len(k_mults) != r:
        raise IndexOutOfRange(f"need {r} pole multiplicities, got {len(k_mults)}")
    forms = weight_forms(alpha)
    poles = [sum(k_mults[j] * alpha.rows[j][k] for j in range(p)) for k in range(n)]
    supports = [tuple(k for k in range(n) if alpha.rows[j][k]) for j in range(p)]
    terms = []
    for choice in itertools.product(*supports):
        # wedge written factor p first, factor 1 last
        written = [("anti", choice[j]) for j in reversed(range(p))]
        sign = canonical_diff_sign([(k, kind) for kind, k in written])
        if sign is None:
            continue
        anti = {k: choice.count(k) for k in set(choice)}
        prefactors: dict[int, MPoly] = {}
        for j, k in enumerate(choice):
            prefactors[k] = MPoly.variable(r, j) * alpha.rows[j][k]
        factors = []
        for k in range(n):
            factors.append(
                CurrentFactor(
                    weight=forms[k],
                    c_hol=poles[k],
                    c_anti=anti.get(k, 0),
                    smooth_pole=poles[k],
                    has_dxbar=k in anti,
                    prefactor=prefactors.get(k),
                )
            )
        terms.append(
            TensorCurrent(
                factors=tuple(factors),
                scalar=RatFn.one(r),
                sign=sign,
                tags=("direct",),
            )
        )
    return CurrentSum(tuple(terms), ncoords=n, nlambda=r)


@dataclass(frozen=True)
class FactorTrace:
    """Ratio-substitution trace for one denominator factor."""

    factor: int
    coeffs: tuple[Fraction, ...]
    stop_index: int
    factor_outs: int


@dataclass(frozen=True)
class RatioWitness:
    """Successful ratio holomorphy certificate.

    ``normalization`` is the row transversal (1-based row for each of the
    first p columns) whose entries were scaled to one; each trace shows a
    factor's parameter coefficients and where its substitution procedure
    stops: writing ``lambda_m = tau_m ... tau_(r-1)``, the denominator of
    factor k splits off ``factor_outs`` trailing ratio variables before a
    nonzero constant coefficient appears, so the factor is holomorphic
    and nonvanishing near the origin of the ratio coordinates.
    """

    normalization: tuple[int, ...]
    scales: tuple[Fraction, ...]
    traces: tuple[FactorTrace, ...]

    @property
    def holds(self) -> bool:
        return True

    def to_jsonable(self) -> dict:
        return {
            "normalization_rows": list(self.normalization),
            "row_scales": [f"{s.numerator}/{s.denominator}" for s in self.scales],
            "traces": [
                {
                    "factor": t.factor,
                    "coeffs": [f"{c.numerator}/{c.denominator}" for c in t.coeffs],
                    "stop_index": t.stop_index,
                    "factor_outs": t.factor_outs,
                }
                for t in self.traces
            ],
        }


def ratio_holomorphy_witness(
    alpha: ExponentMatrix, p: int, sigma: Sequence[int] | None = None
) -> RatioWitness:
    """Certify each coefficient-ratio factor after ratio substitution.

    Normalizes the leading p x p block by the lexicographically first row
    transversal with nonzero entries (rows scaled so the transversal
    entries become 1), then traces each of the p denominator factors: its
    largest parameter index with a nonzero coefficient is where the
    substitution procedure stops.  Fails when no transversal exists.
    """
    r, n = alpha.nrows, alpha.ncols
    if not 0 <= p <= min(r, n):
        raise IndexOutOfRange(f"p={p} exceeds min(rows, cols)={min(r, n)}")
    sigma = _normalize_sigma(sigma, r)
    sigma_inv = _inverse_sigma(sigma)
    transversal = None
    for candidate in itertools.permutations(range(p)):
        if all(alpha.rows[candidate[k]][k] for k in range(p)):
            transversal = candidate
            break
    if transversal is None:
        raise WitnessFails(
            "every row transversal of the leading block hits a zero entry"
        )
    scales = tuple(
        Fraction(1, alpha.rows[transversal[k]][k]) for k in range(p)
    )
    # normalized matrix: row transversal[k] scaled so entry (transversal[k], k) is 1
    row_scale = {transversal[k]: scales[k] for k in range(p)}
    normalized = [
        [Fraction(e) * row_scale.get(j, Fraction(1)) for e in row]
        for j, row in enumerate(alpha.rows)
    ]
    traces = []
    for k in range(p):
        # sigma-permuted coefficients of the k-th denominator factor
        coeffs = tuple(normalized[sigma_inv[m] - 1][k] for m in range(r))
        stop = max(m for m in range(r) if coeffs[m])
        traces.append(
            FactorTrace(
                factor=k + 1,
                coeffs=coeffs,
                stop_index=stop + 1,
                factor_outs=r - (stop + 1),
            )
        )
    return RatioWitness(
        normalization=tuple(t + 1 for t in transversal),
        scales=scales,
        traces=tuple(traces),
    )


@dataclass(frozen=True)
class TermAgreement:
    """Per-term outcome of the two-limit agreement check."""

    index_set: tuple[int, ...]
    minor: int
    ok: bool
    equal: bool
    curve_value: Fraction | None
    iterated_value: Fraction | None
    witness: PositivityWitness | None
    error: str | None

    def to_jsonable(self) -> dict:
        return {
            "index_set": list(self.index_set),
            "minor": self.minor,
            "ok": self.ok,
            "equal": self.equal,
            "curve_value": None
            if self.curve_value is None
            else f"{self.curve_value.numerator}/{self.curve_value.denominator}",
            "iterated_value": None
            if self.iterated_value is None
            else f"{self.iterated_value.numerator}/{self.iterated_value.denominator}",
            "witness": None if self.witness is None else self.witness.to_jsonable(),
            "error": self.error,
        }


@dataclass(frozen=True)
class AgreementReport:
    """Outcome of comparing curve values with iterated limits, per term."""

    sigma: tuple[int, ...]
    mu: tuple[int, ...]
    terms: tuple[TermAgreement, ...]
    ok: bool
    equal: bool
    curve_value: Fraction
    iterated_value: Fraction

    def to_jsonable(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "mu": list(self.mu),
            "ok": self.ok,
            "equal": self.equal,
            "curve_value": f"{self.curve_value.numerator}/{self.curve_value.denominator}",
            "iterated_value": (
                f"{self.iterated_value.numerator}/{self.iterated_value.denominator}"
            ),
            "terms": [t.to_jsonable() for t in self.terms],
        }


def limit_agreement_check(
    alpha: ExponentMatrix,
    k_mults: Sequence[int],
    p: int,
    sigma: Sequence[int] | None,
    weights: Weights,
    exploratory: bool = False,
) -> AgreementReport:
    """Compare curve values against iterated limits for every term.

    For each decomposition term the permuted coefficient ratio is
    evaluated along the curve ``lambda_j = t^mu_j`` and by iterated
    limits in the natural order; a positivity witness is attached.  The
    weights must be strictly decreasing unless ``exploratory`` is set.
    Failures (poles, missing witnesses) become failed term reports, never
    silent drops.
    """
    r = alpha.nrows
    if len(weights.mu) != r:
        raise ValueError(f"need {r} weights, got {len(weights.mu)}")
    if not exploratory:
        weights.require_strictly_decreasing()
    sigma = _normalize_sigma(sigma, r)
    terms = multi_index_terms(alpha, k_mults, p)
    outcomes: list[TermAgreement] = []
    for term in terms:
        ratio = _index_ratio(alpha, tuple(i - 1 for i in term.index_set), p, sigma)
        error = None
        curve = iterated = None
        witness = None
        try:
            curve = ratio.curve_value_at_zero(weights.mu)
            iterated = ratio.iterated_limit(range(r))
            witness = ratio.positivity_witness(weights.mu)
        except (NotHolomorphic, PoleAtZero, WitnessFails) as exc:
            error = f"{type(exc).__name__}: {exc}"
        ok = error is None
        outcomes.append(
            TermAgreement(
                index_set=term.index_set,
                minor=term.minor,
                ok=ok,
                equal=bool(ok and curve == iterated),
                curve_value=curve,
                iterated_value=iterated,
                witness=witness,
                error=error,
            )
        )
    ok = all(t.ok for t in outcomes)
    equal = all(t.equal for t in outcomes) if outcomes else True
    # top-level values read off the first nonvanishing summand
    curve_value = outcomes[0].curve_value if outcomes and ok else Fraction(0)
    iterated_value = outcomes[0].iterated_value if outcomes and ok else Fraction(0)
    return AgreementReport(
        sigma=sigma,
        mu=weights.mu,
        terms=tuple(outcomes),
        ok=ok,
        equal=bool(ok and equal),
        curve_value=curve_value if curve_value is not None else Fraction(0),
        iterated_value=iterated_value if iterated_value is not None else Fraction(0),
    )
