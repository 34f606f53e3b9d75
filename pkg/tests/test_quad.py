"""Tests for the numerical cross-validation layer."""

import csv
import io
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from residua.currents import TestForm, TestSlot
from residua.errors import DegenerateTorus, QuadratureNotConverged, UnsupportedRank
from residua.products import FactorSpec, ProductSpec, evaluate_product, expand_product
from residua.profiles import RadialProfile
from residua.quad import (
    Cutoff,
    EpsilonPath,
    admissibility_bound,
    convergence_study,
    lambda_sample,
    max_pole_order,
    passare_integral,
    torus_integral,
    torus_radii,
    _regularized_terms,
)

BUMP4 = RadialProfile.bump(4)
# flat-top profile: psi'(0) = 0, so finite-eps shell values sit close to
# the limit and tight comparisons are meaningful at moderate eps
FLAT = RadialProfile(4, (Fraction(1), Fraction(4)))

SPEC_Z = ProductSpec((FactorSpec("R", (1,)),))
SPEC_ZW = ProductSpec((FactorSpec("R", (1, 0)), FactorSpec("R", (0, 1))))
SPEC_CROSS = ProductSpec((FactorSpec("R", (1, 0)), FactorSpec("R", (1, 1))))
TEST_Z = TestForm((TestSlot(0, 0, BUMP4, "dx"),))
TEST_ZW = TestForm.uniform([0, 0], ["dx", "dx"], FLAT)
TEST_CROSS = TestForm.uniform([1, 0], ["dx", "dx"], BUMP4)


# -- cutoffs ----------------------------------------------------------------


def test_smoothstep_endpoint_values():
    chi = Cutoff("smoothstep", 2)
    assert chi.chi(0.5) == 0.0
    assert chi.chi(1.0) == 0.0
    assert chi.chi(2.0) == 1.0
    assert chi.chi(3.0) == 1.0
    assert chi.chi(1.5) == pytest.approx(0.5)


def test_smoothstep_is_c2_at_the_edges():
    chi = Cutoff("smoothstep", 2)
    for v in (1.0 + 1e-9, 2.0 - 1e-9):
        assert abs(chi.chi_prime(v)) < 1e-6


def test_smoothstep_derivative_has_unit_mass():
    chi = Cutoff("smoothstep", 3)
    v = np.linspace(1.0, 2.0, 20001)
    mass = np.trapezoid(chi.chi_prime(v), v)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_characteristic_cutoff_steps():
    chi = Cutoff("characteristic")
    assert chi.chi(0.999) == 0.0
    assert chi.chi(1.0) == 1.0
    with pytest.raises(ValueError):
        chi.chi_prime(1.5)


def test_cutoff_validation():
    with pytest.raises(ValueError):
        Cutoff("boxcar")
    with pytest.raises(ValueError):
        Cutoff("smoothstep", 0)


# -- epsilon paths ----------------------------------------------------------


def test_path_validation():
    with pytest.raises(ValueError):
        EpsilonPath((1, 3), (0.1,))
    with pytest.raises(ValueError):
        EpsilonPath((3, 3), (0.1,))
    with pytest.raises(ValueError):
        EpsilonPath((3, 1), ())
    with pytest.raises(ValueError):
        EpsilonPath((3, 1), (0.1, -0.2))


def test_path_epsilons_and_ratio():
    path = EpsilonPath((6, 2), (0.1,))
    assert path.epsilons(0.1) == pytest.approx((1e-6, 1e-2))
    assert path.min_ratio == pytest.approx(3.0)
    assert EpsilonPath((4,), (0.5,)).min_ratio == math.inf
    assert path.to_jsonable() == {"nu": [6, 2], "deltaGrid": [0.1]}


def test_admissibility_bound_tracks_poles():
    assert max_pole_order(SPEC_ZW) == 1
    assert admissibility_bound(SPEC_ZW) == 3
    assert max_pole_order(SPEC_CROSS) == 2
    assert admissibility_bound(SPEC_CROSS) == 4
    deep = ProductSpec((FactorSpec("U", (2, 0), pole=2), FactorSpec("R", (0, 1))))
    assert max_pole_order(deep) == 4


# -- regularized expansion mirrors the exact one ----------------------------


def test_regularized_terms_mirror_exact_expansion():
    for spec in (
        SPEC_Z,
        SPEC_ZW,
        SPEC_CROSS,
        ProductSpec((FactorSpec("M", (2, 1)),)),
        ProductSpec((FactorSpec("U", (1, 0), pole=2), FactorSpec("R", (1, 1)))),
    ):
        exact = expand_product(spec)
        reg = _regularized_terms(spec)
        assert len(reg) == len(exact.terms)
        assert sorted(t.tags for t in reg) == sorted(t.tags for t in exact.terms)
        for r, e in zip(
            sorted(reg, key=lambda t: t.tags),
            sorted(exact.terms, key=lambda t: t.tags),
        ):
            assert r.sign == e.sign


# -- cutoff-form quadrature -------------------------------------------------


def test_passare_ladder_matches_residue():
    value = passare_integral(SPEC_Z, TEST_Z, [1e-4])
    target = 2j * math.pi
    assert abs(value - target) / abs(target) < 1e-3


def test_passare_cutoff_kinds_agree_on_ladder():
    smooth = passare_integral(SPEC_Z, TEST_Z, [1e-4])
    sharp = passare_integral(SPEC_Z, TEST_Z, [1e-4], Cutoff("characteristic"))
    target = 2j * math.pi
    assert abs(smooth - target) / abs(target) < 1e-3
    assert abs(sharp - target) / abs(target) < 1e-3
    assert abs(smooth - sharp) / abs(target) < 1e-3


def test_passare_disjoint_pair():
    value = passare_integral(SPEC_ZW, TEST_ZW, [1e-6, 1e-3])
    target = -4 * math.pi**2
    assert abs(value - target) / abs(target) < 1e-3


def test_passare_crossed_pair_tends_to_zero():
    value = passare_integral(SPEC_CROSS, TEST_CROSS, [1e-6, 1e-2])
    assert abs(value) < 1e-2


def test_passare_principal_value_slot():
    # chi(|z|^2/eps)/z against z * vol: a principal value, pi * moment(0)
    spec = ProductSpec((FactorSpec("U", (1,)),))
    test = TestForm((TestSlot(1, 0, RadialProfile.bump(2), "vol"),))
    value = passare_integral(spec, test, [1e-6])
    target = math.pi / 3
    assert abs(value - target) / abs(target) < 1e-3


def test_passare_mixed_product_matches_exact_oracle():
    spec = ProductSpec((FactorSpec("U", (1, 0)), FactorSpec("R", (0, 1))))
    test = TestForm((TestSlot(1, 0, BUMP4, "vol"), TestSlot(0, 0, BUMP4, "dx")))
    oracle = evaluate_product(spec, test).iterated.to_complex()
    value = passare_integral(spec, test, [1e-7, 1e-4])
    assert abs(oracle) > 0.1
    assert abs(value - oracle) / abs(oracle) < 1e-3


def test_passare_desk_scale_guard():
    big_n = ProductSpec((FactorSpec("R", (1, 0, 0)),))
    with pytest.raises(UnsupportedRank):
        passare_integral(big_n, TestForm.uniform([0, 0, 0], ["dx", "vol", "vol"], BUMP4), [1e-4])
    big_q = ProductSpec(
        (FactorSpec("R", (1, 0)), FactorSpec("R", (0, 1)), FactorSpec("U", (1, 1)))
    )
    with pytest.raises(UnsupportedRank):
        passare_integral(big_q, TEST_ZW, [1e-4, 1e-4, 1e-4])


def test_passare_epsilon_validation():
    with pytest.raises(ValueError):
        passare_integral(SPEC_ZW, TEST_ZW, [1e-4])
    with pytest.raises(ValueError):
        passare_integral(SPEC_ZW, TEST_ZW, [1e-4, -1e-4])


# -- torus integrals --------------------------------------------------------


def test_torus_disjoint_pair():
    value = torus_integral([(1, 0), (0, 1)], TEST_ZW, [1e-6, 1e-4])
    target = -4 * math.pi**2
    assert abs(value - target) / abs(target) < 1e-4


def test_torus_radii_log_solve():
    r1, r2 = torus_radii([(1, 0), (1, 1)], [1e-4, 1e-4])
    assert r1**2 == pytest.approx(1e-4)
    assert (r1 * r2) ** 2 == pytest.approx(1e-4)


def test_torus_degenerate_matrix():
    with pytest.raises(DegenerateTorus):
        torus_radii([(2, 0), (2, 0)], [1e-4, 1e-4])


def test_torus_requires_full_holomorphic_form():
    bad = TestForm.uniform([0, 0], ["dx", "vol"], BUMP4)
    with pytest.raises(UnsupportedRank):
        torus_integral([(1, 0), (0, 1)], bad, [1e-4, 1e-4])


def test_torus_crossed_pair_value_vanishes():
    # the crossed torus leaves the test support, so the integral is 0
    value = torus_integral([(1, 0), (1, 1)], TEST_ZW, [1e-8, 1e-2])
    assert abs(value) < 1e-12


# -- real-parameter sampling ------------------------------------------------


def test_lambda_sample_ladder():
    value, record = lambda_sample(SPEC_Z, TEST_Z, [2.0])
    assert record.rel_error < 1e-8
    # exact value: 2 pi i * lambda * shifted moment at lambda = 2
    assert value == pytest.approx(record.exact)
    assert abs(value - 2j * math.pi / 15) < 1e-10


def test_lambda_sample_unit_dependence_at_positive_parameter():
    plain, _ = lambda_sample(SPEC_Z, TEST_Z, [2.0])
    scaled, record = lambda_sample(
        ProductSpec((FactorSpec("R", (1,), unit=Fraction(3)),)), TEST_Z, [2.0]
    )
    assert record.rel_error < 1e-8
    assert (scaled / plain).real == pytest.approx(27.0)
    assert abs((scaled / plain).imag) < 1e-12


def test_lambda_sample_two_coordinates_factor():
    value, record = lambda_sample(SPEC_ZW, TEST_ZW, [3.0, 2.0])
    assert record.rel_error < 1e-8
    left, _ = lambda_sample(
        ProductSpec((FactorSpec("R", (1,)),)), TestForm((TestSlot(0, 0, FLAT, "dx"),)), [3.0]
    )
    right, _ = lambda_sample(
        ProductSpec((FactorSpec("R", (1,)),)), TestForm((TestSlot(0, 0, FLAT, "dx"),)), [2.0]
    )
    assert value == pytest.approx(left * right)


def test_lambda_sample_fractional_parameters():
    value, record = lambda_sample(SPEC_Z, TEST_Z, [1.7])
    assert record.rel_error < 1e-8


def test_lambda_sample_random_points_match_exact():
    rng = random.Random(20260823)
    for _ in range(20):
        lam = [rng.uniform(1.5, 4.0), rng.uniform(1.5, 4.0)]
        _, record = lambda_sample(SPEC_ZW, TEST_ZW, lam)
        assert record.rel_error < 1e-8


def test_lambda_sample_validation():
    with pytest.raises(ValueError):
        lambda_sample(SPEC_Z, TEST_Z, [2.0, 2.0])
    with pytest.raises(ValueError):
        lambda_sample(SPEC_Z, TEST_Z, [0.5])


def test_lambda_record_jsonable():
    _, record = lambda_sample(SPEC_Z, TEST_Z, [2.0])
    data = record.to_jsonable()
    assert data["lambda"] == [2.0]
    assert data["relError"] < 1e-8
    assert len(data["numeric"]) == 2


# -- convergence studies ----------------------------------------------------


def test_convergence_study_disjoint_pair():
    path = EpsilonPath((6, 2), (1e-1, 3e-2, 1e-2))
    report = convergence_study(SPEC_ZW, TEST_ZW, path)
    errs = [row.abs_err for row in report.rows]
    assert errs == sorted(errs, reverse=True)
    assert report.converged
    assert report.ratio_bound == 3
    assert report.oracle == pytest.approx(-4 * math.pi**2)


def test_convergence_study_crossed_pair_goes_to_zero():
    path = EpsilonPath((5, 1), (1e-1, 1e-2, 1e-3))
    report = convergence_study(SPEC_CROSS, TEST_CROSS, path)
    assert report.ratio_bound == 4
    assert abs(report.rows[-1].value) < 1e-6
    assert report.converged


def test_convergence_study_single_factor_cutoff_independence():
    path = EpsilonPath((2,), (1e-2, 1e-3, 1e-4))
    smooth = convergence_study(SPEC_Z, TEST_Z, path)
    sharp = convergence_study(SPEC_Z, TEST_Z, path, Cutoff("characteristic"))
    assert smooth.converged and sharp.converged
    final_gap = abs(smooth.rows[-1].value - sharp.rows[-1].value)
    assert final_gap / abs(smooth.oracle) < 1e-3


def test_convergence_study_enforces_ratio_bound():
    path = EpsilonPath((3, 2), (1e-1,))
    with pytest.raises(ValueError):
        convergence_study(SPEC_ZW, TEST_ZW, path)


def test_convergence_study_weight_count():
    path = EpsilonPath((4,), (1e-1,))
    with pytest.raises(ValueError):
        convergence_study(SPEC_ZW, TEST_ZW, path)


def test_study_csv_format():
    path = EpsilonPath((6, 2), (1e-1, 1e-2))
    report = convergence_study(SPEC_ZW, TEST_ZW, path)
    rows = list(csv.reader(io.StringIO(report.to_csv())))
    assert rows[0] == ["delta", "value_re", "value_im", "abs_err"]
    assert len(rows) == 3
    assert float(rows[1][0]) == pytest.approx(0.1)
    assert float(rows[2][3]) < float(rows[1][3])


def test_study_jsonable():
    path = EpsilonPath((6, 2), (1e-1,))
    report = convergence_study(SPEC_ZW, TEST_ZW, path)
    data = report.to_jsonable()
    assert data["ratioBound"] == 3
    assert data["cutoff"] == {"kind": "smoothstep", "order": 2}
    assert len(data["rows"]) == 1
    assert data["converged"] in (True, False)
