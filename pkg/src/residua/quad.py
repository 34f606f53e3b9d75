"""Floating-point cross-validation of the classical regularizations.

The exact engine computes parameter limits symbolically.  This module
evaluates the classical counterparts numerically: smooth-cutoff forms
along epsilon paths, residue integrals over tori, and real-parameter
sampling of the weighted forms, each compared against the exact oracle.

The cutoff regularization replaces every weight ``|f|^(2 lambda)`` by
``chi(|f|^2 / eps)``; the derivative factors concentrate on the shells
``eps <= |f|^2 <= 2 eps``, which the quadrature parametrizes explicitly
in logarithmic coordinates so thin shells cost nothing.  Radial panels
are geometric with kink-aligned breakpoints, refined adaptively by
comparing a Gauss rule against its node-doubled version.  All node sets
are deterministic, so runs are reproducible.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .currents import TestForm, canonical_diff_sign, merge_sign, pairing
from .errors import DegenerateTorus, QuadratureNotConverged, UnsupportedRank
from .products import ProductSpec, expand_product
from .profiles import RadialProfile

_SLOT_HOL = {"1": 0, "dx": 1, "dxbar": 0, "wedge": 1, "vol": 1}
_SLOT_ANTI = {"1": 0, "dx": 0, "dxbar": 1, "wedge": 1, "vol": 1}


# -- cutoffs ----------------------------------------------------------------


@dataclass(frozen=True)
class Cutoff:
    """Approximation of the characteristic function of ``[1, oo)``.

    ``smoothstep`` of order m is the C^m polynomial step on [1, 2];
    ``characteristic`` is the sharp step, whose derivative acts as the
    unit point mass at the shell ``v = 1``.
    """

    kind: str = "smoothstep"
    order: int = 2

    def __post_init__(self):
        if self.kind not in ("smoothstep", "characteristic"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")
        if self.order < 1:
            raise ValueError("smoothstep order must be at least 1")

    @property
    def is_smooth(self) -> bool:
        return self.kind == "smoothstep"

    def _step_coeffs(self) -> np.ndarray:
        # s_m(x) = x^(m+1) * sum_k C(m+k,k) C(2m+1,m-k) (-x)^k on [0,1]
        m = self.order
        coeffs = np.zeros(2 * m + 2)
        for k in range(m + 1):
            coeffs[m + 1 + k] = (-1) ** k * comb(m + k, k) * comb(2 * m + 1, m - k)
        return coeffs

    def chi(self, v: np.ndarray | float) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.kind == "characteristic":
            return (v >= 1.0).astype(float)
        x = np.clip(v - 1.0, 0.0, 1.0)
        return np.polynomial.polynomial.polyval(x, self._step_coeffs())

    def chi_prime(self, v: np.ndarray | float) -> np.ndarray:
        """Derivative of the smooth step; zero outside (1, 2)."""
        if self.kind == "characteristic":
            raise ValueError("the sharp step has no pointwise derivative")
        v = np.asarray(v, dtype=float)
        x = v - 1.0
        deriv = np.polynomial.polynomial.polyder(self._step_coeffs())
        inside = (x > 0.0) & (x < 1.0)
        return np.where(inside, np.polynomial.polynomial.polyval(np.clip(x, 0, 1), deriv), 0.0)


DEFAULT_CUTOFF = Cutoff("smoothstep", 2)


# -- epsilon paths ----------------------------------------------------------


@dataclass(frozen=True)
class EpsilonPath:
    """Power path ``eps_j(delta) = delta ** nu_j`` on a grid of deltas."""

    nu: tuple[int, ...]
    delta_grid: tuple[float, ...]

    def __post_init__(self):
        nu = tuple(int(v) for v in self.nu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        if not nu or any(v <= 0 for v in nu):
            raise ValueError("path weights must be positive integers")
        if any(a <= b for a, b in zip(nu, nu[1:])):
            raise ValueError(f"path weights {nu} are not strictly decreasing")
        if not self.delta_grid or any(d <= 0 for d in self.delta_grid):
            raise ValueError("delta grid entries must be positive")

    @property
    def min_ratio(self) -> float:
        ratios = [a / b for a, b in zip(self.nu, self.nu[1:])]
        return min(ratios) if ratios else math.inf

    def epsilons(self, delta: float) -> tuple[float, ...]:
        return tuple(delta**v for v in self.nu)

    def to_jsonable(self) -> dict:
        return {"nu": list(self.nu), "deltaGrid": list(self.delta_grid)}


def max_pole_order(spec: ProductSpec) -> int:
    """Largest per-coordinate section pole the spec can produce."""
    worst = 0
    for c in range(spec.ncoords):
        total = sum(f.pole * f.exponents[c] for f in spec.factors)
        worst = max(worst, total)
    return worst


def admissibility_bound(spec: ProductSpec) -> int:
    """Required lower bound on consecutive path-weight ratios.

    Power paths are admissible only up to a fixed polynomial order; two
    more than the worst pole order covers every order that monomial data
    of this shape can produce.
    """
    return 2 + max_pole_order(spec)


# -- regularized expansion --------------------------------------------------


@dataclass(frozen=True)
class _RegCut:
    """A cutoff factor ``chi(|f_j|^2 / eps_j)`` with sign of use.

    ``shell`` marks derivative factors, which pin ``|f|^2/eps`` to the
    shell [1, 2] with weight ``chi'``; ``pivot`` is the coordinate whose
    radius the shell constraint solves for.
    """

    kind: str  # "chi" | "shell"
    factor: int
    alpha: tuple[int, ...]
    unit: Fraction
    pivot: int | None = None


@dataclass(frozen=True)
class _RegTerm:
    """One expansion term of the cutoff-regularized product."""

    c_hol: tuple[int, ...]
    c_anti: tuple[int, ...]
    has_dx: tuple[bool, ...]
    has_dxbar: tuple[bool, ...]
    cuts: tuple[_RegCut, ...]
    sign: int
    scalar: Fraction
    pi_power: int
    i_power: int
    tags: tuple[str, ...]

    @property
    def shells(self) -> tuple[_RegCut, ...]:
        return tuple(c for c in self.cuts if c.kind == "shell")

    def diff_sequence(self) -> list[tuple[int, str]]:
        out = []
        for c in range(len(self.c_hol)):
            if self.has_dx[c]:
                out.append((c, "hol"))
            if self.has_dxbar[c]:
                out.append((c, "anti"))
        return out


@dataclass(frozen=True)
class _RegSlot:
    name: str
    scalar: Fraction
    cut: str  # "" | "chi" | "shell"
    section_pole: int = 0
    pivot: int | None = None
    diffs: tuple[tuple[int, str], ...] = ()
    hol_poles: tuple[int, ...] = ()
    anti_poles: tuple[int, ...] = ()
    pi_power: int = 0
    i_power: int = 0


def _reg_slots(factor) -> list[_RegSlot]:
    alpha = factor.exponents
    k = factor.pole
    unit = factor.unit
    if factor.kind == "U":
        return [_RegSlot("pole", unit ** (-k), "chi", section_pole=k)]
    if factor.kind == "R":
        slots = [
            _RegSlot("one", Fraction(1), ""),
            _RegSlot("restriction", -(unit ** (1 - k)), "chi", section_pole=k - 1),
        ]
        for c in factor.support:
            slots.append(
                _RegSlot(
                    f"residue:{c}",
                    unit ** (-k) * alpha[c],
                    "shell",
                    section_pole=k,
                    pivot=c,
                    diffs=((c, "anti"),),
                    anti_poles=(c,),
                )
            )
        return slots
    slots = [
        _RegSlot("one", Fraction(1), ""),
        _RegSlot("restriction", Fraction(-1), "chi"),
    ]
    for ac in factor.support:
        for hc in factor.support:
            slots.append(
                _RegSlot(
                    f"lelong:{ac},{hc}",
                    Fraction(-1, 2) * alpha[ac] * alpha[hc],
                    "shell",
                    pivot=ac,
                    diffs=((ac, "anti"), (hc, "hol")),
                    hol_poles=(hc,),
                    anti_poles=(ac,),
                    pi_power=-1,
                    i_power=1,
                )
            )
    return slots


def _regularized_terms(spec: ProductSpec) -> tuple[_RegTerm, ...]:
    """Cutoff-flavored twin of the exact expansion, same signs and tags."""
    n = spec.ncoords
    q = spec.nfactors
    all_slots = [_reg_slots(f) for f in spec.factors]
    terms = []
    for choice in itertools.product(*all_slots):
        written: list[tuple[int, str]] = []
        for j in reversed(range(q)):
            written.extend(choice[j].diffs)
        sign = canonical_diff_sign(written)
        if sign is None:
            continue
        hol = [0] * n
        anti = [0] * n
        has_dx = [False] * n
        has_dxbar = [False] * n
        cuts = []
        scalar = Fraction(1)
        pi_power = 0
        i_power = 0
        for j, slot in enumerate(choice):
            factor = spec.factors[j]
            scalar *= slot.scalar
            pi_power += slot.pi_power
            i_power += slot.i_power
            if slot.cut:
                cuts.append(
                    _RegCut(slot.cut, j, factor.exponents, factor.unit, slot.pivot)
                )
            for c, e in enumerate(factor.exponents):
                hol[c] += slot.section_pole * e
            for c in slot.hol_poles:
                hol[c] += 1
            for c in slot.anti_poles:
                anti[c] += 1
        for c, kind in written:
            if kind == "anti":
                has_dxbar[c] = True
            else:
                has_dx[c] = True
        terms.append(
            _RegTerm(
                c_hol=tuple(hol),
                c_anti=tuple(anti),
                has_dx=tuple(has_dx),
                has_dxbar=tuple(has_dxbar),
                cuts=tuple(cuts),
                sign=sign,
                scalar=scalar,
                pi_power=pi_power,
                i_power=i_power,
                tags=tuple(f"{spec.factors[j].kind}:{choice[j].name}" for j in range(q)),
            )
        )
    return tuple(terms)


# -- matching a split test form ---------------------------------------------


@dataclass(frozen=True)
class _Match:
    upowers: tuple[float, ...]
    modes: tuple[int, ...]
    multiplier: complex


def _match_test(term: _RegTerm, test: TestForm) -> _Match | None:
    n = len(term.c_hol)
    if test.ncoords != n:
        raise UnsupportedRank("test form coordinate count mismatch")
    upowers = []
    modes = []
    multiplier = complex(term.sign)
    test_diffs = []
    for c, slot in enumerate(test.slots):
        if _SLOT_HOL[slot.diff]:
            test_diffs.append((c, "hol"))
        if _SLOT_ANTI[slot.diff]:
            test_diffs.append((c, "anti"))
        hol_total = int(term.has_dx[c]) + _SLOT_HOL[slot.diff]
        anti_total = int(term.has_dxbar[c]) + _SLOT_ANTI[slot.diff]
        if hol_total != 1 or anti_total != 1:
            return None
        upowers.append((slot.a + slot.d - term.c_hol[c] - term.c_anti[c]) / 2.0)
        modes.append((slot.a - slot.d) - (term.c_hol[c] - term.c_anti[c]))
        # canonical per-coordinate orientation contributes -2i; the
        # volume normalization i/2 folds to an extra i/2 per vol slot
        multiplier *= -2.0j * 0.5
        if slot.diff == "vol":
            multiplier *= 0.5j
    multiplier *= merge_sign(term.diff_sequence(), test_diffs)
    multiplier *= float(term.scalar) * math.pi**term.pi_power * 1j**term.i_power
    return _Match(tuple(upowers), tuple(modes), multiplier)


def _angular(mode: int) -> float:
    """Full-circle integral of exp(i m theta) by the trapezoid rule."""
    npts = 4 * abs(mode) + 8
    theta = np.arange(npts) * (2 * math.pi / npts)
    return float(np.cos(mode * theta).sum() * (2 * math.pi / npts))


@lru_cache(maxsize=64)
def _profile_coeffs(profile: RadialProfile) -> tuple[float, ...]:
    poly = np.polynomial.polynomial
    base = np.array([float(c) for c in profile.coeffs])
    bump = poly.polypow(np.array([1.0, -1.0]), profile.degree)
    return tuple(poly.polymul(base, bump))


def _profile_values(profile: RadialProfile, u: np.ndarray) -> np.ndarray:
    coeffs = np.array(_profile_coeffs(profile))
    vals = np.polynomial.polynomial.polyval(u, coeffs)
    return np.where(u < 1.0, vals, 0.0)


# -- adaptive tensor quadrature ---------------------------------------------


@lru_cache(maxsize=32)
def _gl(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _tensor_rule(bounds: Sequence[tuple[float, float]], order: int, fn) -> float:
    axes = []
    weights = []
    for lo, hi in bounds:
        x, w = _gl(order)
        axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    if not axes:
        return float(fn())
    grids = np.meshgrid(*axes, indexing="ij")
    vals = fn(*grids)
    total = np.asarray(vals, dtype=float)
    for w in reversed(weights):
        total = total @ w if total.ndim == 1 else np.tensordot(total, w, axes=([-1], [0]))
    return float(total)


class _Budget:
    def __init__(self, limit: int):
        self.used = 0
        self.limit = limit

    def spend(self, amount: int) -> None:
        self.used += amount
        if self.used > self.limit:
            raise QuadratureNotConverged(
                f"evaluation budget exhausted ({self.used} > {self.limit} nodes)"
            )


def _refine_cell(bounds, fn, tol, budget, order=8, depth=0) -> float:
    budget.spend((order * 3) ** max(len(bounds), 1))
    coarse = _tensor_rule(bounds, order, fn)
    fine = _tensor_rule(bounds, 2 * order, fn)
    err = abs(fine - coarse)
    if err <= tol or not bounds:
        return fine
    if depth >= 14:
        raise QuadratureNotConverged(
            f"cell refinement stalled at error {err:.3e} (tolerance {tol:.3e})"
        )
    # split the dimension that is widest on a logarithmic scale
    def log_width(b):
        lo, hi = b
        if lo <= 0:
            return math.inf
        return math.log(hi / lo)

    dim = max(range(len(bounds)), key=lambda i: log_width(bounds[i]))
    lo, hi = bounds[dim]
    mid = math.sqrt(lo * hi) if lo > 0 and hi / lo > 4 else 0.5 * (lo + hi)
    left = list(bounds)
    right = list(bounds)
    left[dim] = (lo, mid)
    right[dim] = (mid, hi)
    return _refine_cell(left, fn, tol / 2, budget, order, depth + 1) + _refine_cell(
        right, fn, tol / 2, budget, order, depth + 1
    )


def _coordinate_panels(
    lo_scale: float, breakpoints: Sequence[float]
) -> list[tuple[float, float]]:
    """Geometric panels on (0, 1] with extra kink-aligned edges."""
    edges = {0.0, 1.0}
    for b in breakpoints:
        if 0.0 < b < 1.0:
            edges.add(b)
    level = 1.0
    floor = max(min(lo_scale / 4.0, 0.25), 1e-18)
    while level > floor:
        level /= 2.0
        edges.add(level)
    ordered = sorted(edges)
    return list(zip(ordered, ordered[1:]))


# -- the epsilon-regularized pairing ----------------------------------------


def _term_value(
    term: _RegTerm,
    match: _Match,
    test: TestForm,
    eps: Sequence[float],
    cutoff: Cutoff,
    rel_tol: float,
    budget: _Budget,
) -> complex:
    n = len(term.c_hol)
    shells = term.shells
    plain_cuts = [c for c in term.cuts if c.kind == "chi"]
    pivots = [s.pivot for s in shells]
    if len(set(pivots)) != len(pivots):
        raise QuadratureNotConverged("shell constraints share a pivot coordinate")
    free = [c for c in range(n) if c not in pivots]

    # shell system: A_p * w_pivot = log(eps_eff * v) - A_f * w_free
    if shells:
        a_pivot = np.array([[s.alpha[p] for p in pivots] for s in shells], dtype=float)
        det = np.linalg.det(a_pivot)
        if abs(det) < 1e-12:
            raise QuadratureNotConverged("singular shell system for this term")
        a_pivot_inv = np.linalg.inv(a_pivot)
        a_free = np.array([[s.alpha[c] for c in free] for s in shells], dtype=float)
        log_eps_eff = np.array(
            [math.log(eps[s.factor] / float(s.unit) ** 2) for s in shells]
        )
        jac = 1.0 / abs(det)
    else:
        jac = 1.0

    smooth_shells = cutoff.is_smooth
    dims: list[tuple[str, int]] = [("free", c) for c in free]
    if smooth_shells:
        dims += [("shell", i) for i in range(len(shells))]

    # per-coordinate panel breakpoints from single-variable cutoffs
    panels_per_dim: list[list[tuple[float, float]]] = []
    for kind, idx in dims:
        if kind == "shell":
            panels_per_dim.append([(1.0, 2.0)])
            continue
        c = idx
        breakpoints: list[float] = []
        lo_scale = 2.0 ** -12
        for cut in term.cuts:
            if cut.alpha[c] == 0:
                continue
            eps_eff = eps[cut.factor] / float(cut.unit) ** 2
            lo_scale = min(lo_scale, eps_eff ** (1.0 / sum(cut.alpha)))
            if all(a == 0 for cc, a in enumerate(cut.alpha) if cc != c):
                for edge in (1.0, 2.0):
                    breakpoints.append((edge * eps_eff) ** (1.0 / cut.alpha[c]))
        panels_per_dim.append(_coordinate_panels(lo_scale, breakpoints))

    profiles = [test.slots[c].profile for c in range(n)]

    def integrand(*grids):
        coords: dict[int, np.ndarray] = {}
        shape = grids[0].shape if grids else ()
        for (kind, idx), g in zip(dims, grids):
            if kind == "free":
                coords[idx] = g
        v_shell = [None] * len(shells)
        for (kind, idx), g in zip(dims, grids):
            if kind == "shell":
                v_shell[idx] = g
        if shells:
            if not smooth_shells:
                v_shell = [np.ones(shape) if shape else np.array(1.0) for _ in shells]
            rhs = []
            for i, s in enumerate(shells):
                row = log_eps_eff[i] + np.log(v_shell[i])
                for fi, c in enumerate(free):
                    if a_free[i, fi]:
                        row = row - a_free[i, fi] * np.log(coords[c])
                rhs.append(row)
            for bi, p in enumerate(pivots):
                w = sum(a_pivot_inv[bi, i] * rhs[i] for i in range(len(shells)))
                coords[p] = np.exp(w)
        value = np.ones(shape) if shape else np.array(1.0)
        for c in range(n):
            u = coords[c]
            value = value * _profile_values(profiles[c], u)
            power = match.upowers[c] + (1.0 if c in pivots else 0.0)
            if power:
                value = value * u**power
        for cut in plain_cuts:
            v = np.ones(shape) if shape else np.array(1.0)
            for c, a in enumerate(cut.alpha):
                if a:
                    v = v * coords[c] ** a
            v = v / (eps[cut.factor] / float(cut.unit) ** 2)
            value = value * cutoff.chi(v)
        for i, s in enumerate(shells):
            if smooth_shells:
                value = value * cutoff.chi_prime(v_shell[i])
        return value * jac

    # rough scale estimate, then refine against an absolute target
    rough = 0.0
    for bounds in itertools.product(*panels_per_dim):
        rough += _tensor_rule(list(bounds), 8, integrand)
    scale = max(abs(rough), 1e-9)
    cells = list(itertools.product(*panels_per_dim))
    tol_cell = rel_tol * scale / max(len(cells), 1)
    total = 0.0
    for bounds in cells:
        total += _refine_cell(list(bounds), integrand, tol_cell, budget)
    # angular integrals are exact for pure Fourier modes, so terms whose
    # selector is off contribute only numerical dust; drop them honestly
    angular = 1.0
    for mode in match.modes:
        a = _angular(mode)
        if abs(a) < 1e-9:
            return 0.0
        angular *= a / (2 * math.pi)
    return match.multiplier * angular * (2 * math.pi) ** n * total


def passare_integral(
    spec: ProductSpec,
    test: TestForm,
    eps: Sequence[float],
    cutoff: Cutoff | None = None,
    rel_tol: float = 1e-6,
) -> complex:
    """Pair the cutoff-regularized product with a split test form.

    Desk-scale only: at most two coordinates and two factors.  The value
    refines until the estimated relative error is below ``rel_tol``.
    """
    if spec.ncoords > 2 or spec.nfactors > 2:
        raise UnsupportedRank("cutoff quadrature is desk scale: n <= 2, q <= 2")
    eps = [float(e) for e in eps]
    if len(eps) != spec.nfactors or any(e <= 0 for e in eps):
        raise ValueError("need one positive epsilon per factor")
    cutoff = cutoff or DEFAULT_CUTOFF
    budget = _Budget(6_000_000)
    total = 0j
    for term in _regularized_terms(spec):
        match = _match_test(term, test)
        if match is None:
            continue
        if any(mode != 0 for mode in match.modes):
            continue
        total += _term_value(term, match, test, eps, cutoff, rel_tol, budget)
    return total


# -- torus integrals --------------------------------------------------------


def torus_radii(
    monomials: Sequence[Sequence[int]],
    eps: Sequence[float],
    units: Sequence[Fraction] | None = None,
) -> tuple[float, float]:
    """Radii of the torus ``|f_1|^2 = eps_1, |f_2|^2 = eps_2``."""
    if len(monomials) != 2 or any(len(m) != 2 for m in monomials):
        raise UnsupportedRank("torus integrals take two monomials on two coordinates")
    units = units or [Fraction(1), Fraction(1)]
    alpha = np.array([[float(a) for a in m] for m in monomials])
    det = alpha[0, 0] * alpha[1, 1] - alpha[0, 1] * alpha[1, 0]
    if abs(det) < 1e-12:
        raise DegenerateTorus(f"exponent matrix {monomials} is singular")
    rhs = np.array(
        [0.5 * math.log(float(e) / float(u) ** 2) for e, u in zip(eps, units)]
    )
    logr = np.linalg.solve(alpha, rhs)
    return tuple(float(math.exp(w)) for w in logr)


def torus_integral(
    monomials: Sequence[Sequence[int]],
    test: TestForm,
    eps: Sequence[float],
    units: Sequence[Fraction] | None = None,
) -> complex:
    """Residue integral of ``phi / (f_1 f_2)`` over the torus ``T(eps)``.

    The test form must carry the holomorphic differential in both
    coordinates.  Quadrature is the two-angle trapezoid rule, which is
    exact for the trigonometric polynomials occurring here.
    """
    if test.ncoords != 2 or any(s.diff != "dx" for s in test.slots):
        raise UnsupportedRank("torus integrand must be a full holomorphic form")
    units = units or [Fraction(1), Fraction(1)]
    r1, r2 = torus_radii(monomials, eps, units)
    degree = sum(s.a + s.d for s in test.slots) + sum(sum(m) for m in monomials)
    npts = min(16 * (degree + 2), 512)
    theta = np.arange(npts) * (2 * math.pi / npts)
    t1, t2 = np.meshgrid(theta, theta, indexing="ij")
    z = r1 * np.exp(1j * t1)
    w = r2 * np.exp(1j * t2)
    phi = np.ones_like(z)
    for coord, var in ((0, z), (1, w)):
        slot = test.slots[coord]
        phi = phi * var**slot.a * np.conj(var) ** slot.d
        phi = phi * _profile_values(slot.profile, np.abs(var) ** 2)
    denom = np.ones_like(z)
    for m, u in zip(monomials, units):
        denom = denom * float(u) * z ** m[0] * w ** m[1]
    integrand = phi / denom * (1j * z) * (1j * w)
    step = 2 * math.pi / npts
    return complex(integrand.sum() * step * step)


# -- real-parameter sampling ------------------------------------------------


@dataclass(frozen=True)
class LambdaComparison:
    """Numeric quadrature against exact rational evaluation at one point."""

    lam: tuple[float, ...]
    numeric: complex
    exact: complex
    rel_error: float

    def to_jsonable(self) -> dict:
        return {
            "lambda": list(self.lam),
            "numeric": [self.numeric.real, self.numeric.imag],
            "exact": [self.exact.real, self.exact.imag],
            "relError": self.rel_error,
        }


def _weighted_1d(profile: RadialProfile, power: float, rel_tol: float, budget) -> float:
    def fn(u):
        return _profile_values(profile, u) * u**power

    panels = _coordinate_panels(2.0**-40, [])
    total = 0.0
    rough = sum(_tensor_rule([b], 8, fn) for b in panels)
    tol_cell = rel_tol * max(abs(rough), 1e-9) / len(panels)
    for b in panels:
        total += _refine_cell([b], fn, tol_cell, budget)
    return total


def lambda_sample(
    spec: ProductSpec,
    test: TestForm,
    lam: Sequence[float],
    rel_tol: float = 1e-10,
) -> tuple[complex, LambdaComparison]:
    """Numerically pair the weighted form at a real parameter point.

    At fixed positive parameters the weights decouple, so each term is a
    product of one-dimensional radial integrals; the result is compared
    against exact rational evaluation of the same pairing.
    """
    lam = tuple(float(v) for v in lam)
    if len(lam) != spec.nfactors:
        raise ValueError("need one parameter per factor")
    if any(v < 1 for v in lam):
        raise ValueError("parameters below one may leave the continuous range")
    budget = _Budget(6_000_000)
    total = 0j
    for term in _regularized_terms(spec):
        match = _match_test(term, test)
        if match is None:
            continue
        if any(mode != 0 for mode in match.modes):
            continue
        value = complex(match.multiplier) * (2 * math.pi) ** len(term.c_hol)
        # weights from every cutoff-carrying factor; shell slots add the
        # parameter prefactor from differentiating the weight
        s_powers = [0.0] * len(term.c_hol)
        for cut in term.cuts:
            for c, a in enumerate(cut.alpha):
                s_powers[c] += lam[cut.factor] * a
            value *= float(cut.unit) ** (2 * lam[cut.factor])
            if cut.kind == "shell":
                value *= lam[cut.factor]
        for c in range(len(term.c_hol)):
            value *= _weighted_1d(
                test.slots[c].profile, match.upowers[c] + s_powers[c], rel_tol, budget
            )
        total += value
    exact_pairing = pairing(expand_product(spec), test)
    exact = exact_pairing.evaluate_complex([Fraction(v) for v in lam])
    denom = max(abs(exact), 1e-300)
    record = LambdaComparison(
        lam=lam,
        numeric=total,
        exact=exact,
        rel_error=abs(total - exact) / denom,
    )
    return total, record


# -- convergence studies ----------------------------------------------------


@dataclass(frozen=True)
class StudyRow:
    delta: float
    value: complex
    abs_err: float


@dataclass(frozen=True)
class StudyReport:
    """Values along an epsilon path against the exact oracle."""

    rows: tuple[StudyRow, ...]
    oracle: complex
    ratio_bound: int
    path: EpsilonPath
    cutoff: Cutoff
    converged: bool
    tolerance: float

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["delta", "value_re", "value_im", "abs_err"])
        for row in self.rows:
            writer.writerow(
                [
                    f"{row.delta:.12g}",
                    f"{row.value.real:.12g}",
                    f"{row.value.imag:.12g}",
                    f"{row.abs_err:.12g}",
                ]
            )
        return out.getvalue()

    def to_jsonable(self) -> dict:
        return {
            "rows": [
                {
                    "delta": r.delta,
                    "value": [r.value.real, r.value.imag],
                    "absErr": r.abs_err,
                }
                for r in self.rows
            ],
            "oracle": [self.oracle.real, self.oracle.imag],
            "ratioBound": self.ratio_bound,
            "path": self.path.to_jsonable(),
            "cutoff": {"kind": self.cutoff.kind, "order": self.cutoff.order},
            "converged": self.converged,
            "tolerance": self.tolerance,
        }


def convergence_study(
    spec: ProductSpec,
    test: TestForm,
    path: EpsilonPath,
    cutoff: Cutoff | None = None,
    rel_tol: float = 1e-6,
    tolerance: float = 5e-3,
) -> StudyReport:
    """Evaluate the cutoff form along the path and compare to the oracle."""
    cutoff = cutoff or DEFAULT_CUTOFF
    bound = admissibility_bound(spec)
    if path.min_ratio < bound:
        raise ValueError(
            f"path ratios {path.nu} fall below the admissibility bound {bound}"
        )
    if len(path.nu) != spec.nfactors:
        raise ValueError("need one path weight per factor")
    oracle = pairing(expand_product(spec), test).value_iterated().to_complex()
    rows = []
    for delta in path.delta_grid:
        value = passare_integral(spec, test, path.epsilons(delta), cutoff, rel_tol)
        rows.append(StudyRow(delta=delta, value=value, abs_err=abs(value - oracle)))
    converged = rows[-1].abs_err <= tolerance * (1 + abs(oracle))
    return StudyReport(
        rows=tuple(rows),
        oracle=oracle,
        ratio_bound=bound,
        path=path,
        cutoff=cutoff,
        converged=converged,
        tolerance=tolerance,
    )
