"""Pairing machinery: signs, selectors, moments, exact values."""

from fractions import Fraction

import pytest

from residua.currents import (
    CurrentFactor,
    CurrentSum,
    ExactValue,
    TensorCurrent,
    TestForm,
    TestSlot,
    canonical_diff_sign,
    fold_i_power,
    merge_sign,
    pairing,
    unit_factor,
    value_at_zero,
)
from residua.errors import (
    DegreeMismatch,
    InsufficientSmoothness,
    VariableMismatch,
)
from residua.mpoly import LinearForm, MPoly
from residua.profiles import RadialProfile
from residua.ratfn import RatFn

BUMP = RadialProfile.bump(4)


def dbar_factor(nlambda: int, var: int, weight, c_hol: int) -> CurrentFactor:
    """Antiholomorphic derivative factor with its parameter prefactor."""
    return CurrentFactor(
        weight=LinearForm(weight, 0),
        c_hol=c_hol,
        c_anti=1,
        smooth_pole=c_hol,
        has_dxbar=True,
        prefactor=MPoly.variable(nlambda, var),
    )


def single(factors, nlambda, sign=1, scalar=None, units=()):
    term = TensorCurrent(
        factors=tuple(factors),
        scalar=scalar if scalar is not None else RatFn.one(nlambda),
        sign=sign,
        units=units,
    )
    return CurrentSum((term,), ncoords=len(factors), nlambda=nlambda)


# -- structural types --------------------------------------------------------


def test_slot_validation():
    with pytest.raises(ValueError):
        TestSlot(-1, 0, BUMP)
    with pytest.raises(ValueError):
        TestSlot(0, 0, BUMP, diff="dz")


def test_form_needs_slots():
    with pytest.raises(ValueError):
        TestForm(())


def test_uniform_form():
    form = TestForm.uniform([1, 0], ["dx", "dx"], BUMP, anti_powers=[0, 2])
    assert form.ncoords == 2
    assert form.slots[0].a == 1
    assert form.slots[1].d == 2


def test_factor_rejects_negative_poles():
    with pytest.raises(ValueError):
        CurrentFactor(weight=LinearForm([1], 0), c_hol=-1)


def test_unit_factor_shape():
    factor = unit_factor(3)
    assert factor.weight == LinearForm([0, 0, 0], 0)
    assert not factor.has_dx and not factor.has_dxbar


def test_tensor_sign_validated():
    with pytest.raises(ValueError):
        TensorCurrent((unit_factor(1),), RatFn.one(1), sign=2)


def test_tensor_shape_validated():
    with pytest.raises(VariableMismatch):
        TensorCurrent((unit_factor(2),), RatFn.one(1))


def test_tensor_bidegree_and_diffs():
    f0 = dbar_factor(2, 0, [1, 0], 1)
    f1 = unit_factor(2)
    term = TensorCurrent((f0, f1), RatFn.one(2))
    assert term.bidegree() == (0, 1)
    assert term.diff_sequence() == [(0, "anti")]


def test_current_sum_shape_checked():
    term = TensorCurrent((unit_factor(1),), RatFn.one(1))
    with pytest.raises(VariableMismatch):
        CurrentSum((term,), ncoords=2, nlambda=1)


def test_canonical_map_merges_orderings():
    f0 = dbar_factor(2, 0, [1, 0], 1)
    f1 = dbar_factor(2, 1, [0, 1], 1)
    a = TensorCurrent((f0, f1), RatFn.one(2), sign=1)
    b = TensorCurrent((f0, f1), RatFn.one(2), sign=-1)
    total = CurrentSum((a, b), 2, 2)
    assert total.canonical_map() == {}
    assert total.structurally_equal(CurrentSum((), 2, 2))


def test_structurally_equal_detects_scale():
    f0 = dbar_factor(1, 0, [1], 1)
    one = CurrentSum((TensorCurrent((f0,), RatFn.one(1)),), 1, 1)
    two = CurrentSum((TensorCurrent((f0,), RatFn.const(1, 2)),), 1, 1)
    assert not one.structurally_equal(two)
    assert one.structurally_equal((-(-one)))


# -- scalar bookkeeping ------------------------------------------------------


def test_fold_i_power_cycle():
    assert [fold_i_power(k) for k in range(4)] == [(1, 0), (1, 1), (-1, 0), (-1, 1)]
    assert fold_i_power(4) == (1, 0)
    assert fold_i_power(-1) == (-1, 1)
    assert fold_i_power(-2) == (-1, 0)


def test_exact_value_merges_parts():
    value = ExactValue.from_parts(
        [(Fraction(1), 1, 1), (Fraction(2), 1, 5), (Fraction(1), 0, 0)]
    )
    assert value.parts == ((Fraction(1), 0, 0), (Fraction(3), 1, 1))


def test_exact_value_algebra():
    a = ExactValue.rational(2, pi_power=1, i_power=1)
    b = ExactValue.rational(2, pi_power=1, i_power=3)
    assert (a + b).is_zero
    assert (-a).parts == ((Fraction(-2), 1, 1),)
    assert a.scale(0).is_zero
    assert a.scale(Fraction(1, 2)).parts == ((Fraction(1), 1, 1),)


def test_exact_value_complex_and_json():
    import math

    value = ExactValue.rational(2, pi_power=1, i_power=1)
    assert value.to_complex() == pytest.approx(2j * math.pi)
    assert value.to_jsonable() == {"q": "2/1", "pi": 1, "i": 1}
    assert ExactValue.zero().to_jsonable() == {"q": "0/1", "pi": 0, "i": 0}
    both = value + ExactValue.rational(1)
    assert both.to_jsonable() == [
        {"q": "1/1", "pi": 0, "i": 0},
        {"q": "2/1", "pi": 1, "i": 1},
    ]


def test_canonical_diff_sign():
    assert canonical_diff_sign([(0, "anti"), (1, "anti")]) == 1
    assert canonical_diff_sign([(1, "anti"), (0, "anti")]) == -1
    assert canonical_diff_sign([(0, "hol"), (0, "anti")]) == 1
    assert canonical_diff_sign([(0, "anti"), (0, "hol")]) == -1
    assert canonical_diff_sign([(0, "anti"), (0, "anti")]) is None


def test_merge_sign_cases():
    assert merge_sign([(0, "anti")], [(0, "hol")]) == -1
    assert merge_sign([(0, "hol"), (0, "anti")], []) == 1
    assert merge_sign([], [(0, "hol"), (0, "anti")]) == 1
    assert merge_sign([(0, "anti"), (1, "anti")], [(0, "hol"), (1, "hol")]) == -1


# -- one-coordinate anchors --------------------------------------------------


def test_ladder_values():
    # <dbar |x|^(2s) / x^k, x^(k-1) psi dx> = 2 pi i for every k
    for k in (1, 2, 3):
        cur = single([dbar_factor(1, 0, [1], k)], 1)
        test = TestForm((TestSlot(k - 1, 0, RadialProfile.bump(k + 2), "dx"),))
        value = pairing(cur, test).value_iterated()
        assert value.parts == ((Fraction(2), 1, 1),)


def test_ladder_charge_selector_zero():
    # monomial power off by one: angular integral vanishes, pairing is 0
    cur = single([dbar_factor(1, 0, [1], 2)], 1)
    test = TestForm((TestSlot(0, 0, BUMP, "dx"),))
    paired = pairing(cur, test)
    assert paired.matched == 1
    assert paired.value_iterated().is_zero


def test_smoothness_guard():
    cur = single([dbar_factor(1, 0, [1], 3)], 1)
    test = TestForm((TestSlot(2, 0, BUMP, "dx"),))
    with pytest.raises(InsufficientSmoothness):
        pairing(cur, test)


def test_principal_value_against_volume():
    # <|x|^(2s), psi dA> -> pi * integral psi at s = 0
    prof = RadialProfile.bump(2)
    cur = single([CurrentFactor(weight=LinearForm([1], 0))], 1)
    test = TestForm((TestSlot(0, 0, prof, "vol"),))
    value = pairing(cur, test).value_iterated()
    assert value.parts == ((Fraction(1, 3), 1, 0),)


def test_ladder_finite_lambda_value():
    # exact rational sample at lambda = 2 with psi = (1-t)^4: 2 pi i / 15
    cur = single([dbar_factor(1, 0, [1], 1)], 1)
    test = TestForm((TestSlot(0, 0, BUMP, "dx"),))
    paired = pairing(cur, test)
    components = paired.components()
    assert set(components) == {(1, 1)}
    assert components[(1, 1)].evaluate([Fraction(2)]) == Fraction(2, 15)
    import math

    assert paired.evaluate_complex([2.0]) == pytest.approx(2j * math.pi / 15)


def test_unit_tags():
    # |3 x|^(2s) / (3 x): extra 3^(2s) unit with a 1/3 scalar
    cur_plain = single([dbar_factor(1, 0, [1], 1)], 1)
    cur_unit = single(
        [dbar_factor(1, 0, [1], 1)],
        1,
        scalar=RatFn.const(1, Fraction(1, 3)),
        units=((Fraction(3), LinearForm([1], 0)),),
    )
    test = TestForm((TestSlot(0, 0, BUMP, "dx"),))
    plain = pairing(cur_plain, test)
    united = pairing(cur_unit, test)
    # at lambda = 2 the unit contributes 3^4, net factor 27
    assert united.evaluate_complex([2.0]) == pytest.approx(
        27 * plain.evaluate_complex([2.0])
    )
    # the continued value keeps only the honest 1/3 of the coefficient
    assert united.value_iterated().parts == ((Fraction(2, 3), 1, 1),)
    with pytest.raises(ValueError):
        united.components()


# -- two-coordinate anchors --------------------------------------------------


def coordinate_pair_current(first_coord: int):
    """dbar weight factors on both coordinates, written order by argument."""
    f0 = dbar_factor(2, 0, [1, 0], 1)
    f1 = dbar_factor(2, 1, [0, 1], 1)
    written = [(first_coord, "anti"), (1 - first_coord, "anti")]
    return single([f0, f1], 2, sign=canonical_diff_sign(written))


def test_crossed_product_written_last_factor_first():
    # written dbar(1/w) ^ dbar(1/z) against psi psi dz^dw: (2 pi i)^2
    cur = coordinate_pair_current(first_coord=1)
    test = TestForm.uniform([0, 0], ["dx", "dx"], BUMP)
    value = pairing(cur, test).value_iterated()
    assert value.parts == ((Fraction(-4), 2, 0),)


def test_crossed_product_anticommutes():
    cur = coordinate_pair_current(first_coord=0)
    test = TestForm.uniform([0, 0], ["dx", "dx"], BUMP)
    value = pairing(cur, test).value_iterated()
    assert value.parts == ((Fraction(4), 2, 0),)


def test_charge_shifted_product_matches_its_oracle():
    # the surviving cross term of the non-intersection pair, against z psi psi
    gz = CurrentFactor(
        weight=LinearForm([1, 1], 0), c_hol=2, c_anti=1, smooth_pole=2,
        has_dxbar=True, prefactor=MPoly.variable(2, 1),
    )
    gw = CurrentFactor(
        weight=LinearForm([1, 0], 0), c_hol=1, c_anti=1, smooth_pole=1,
        has_dxbar=True, prefactor=MPoly.variable(2, 0),
    )
    term = single([gz, gw], 2, sign=canonical_diff_sign([(0, "anti"), (1, "anti")]))
    test = TestForm.uniform([1, 0], ["dx", "dx"], BUMP)
    paired = pairing(term, test)
    assert paired.value_iterated().parts == ((Fraction(4), 2, 0),)
    assert paired.value_curve([3, 1]).parts == ((Fraction(4), 2, 0),)

    # oracle: plain crossed product with a second-order holomorphic pole
    oz = dbar_factor(2, 0, [1, 0], 2)
    ow = dbar_factor(2, 1, [0, 1], 1)
    oracle = single([oz, ow], 2, sign=canonical_diff_sign([(0, "anti"), (1, "anti")]))
    assert pairing(oracle, test).value_iterated().parts == ((Fraction(4), 2, 0),)


# -- mismatch handling -------------------------------------------------------


def test_shape_mismatch_raises():
    cur = single([dbar_factor(1, 0, [1], 1)], 1)
    test = TestForm.uniform([0, 0], ["dx", "dx"], BUMP)
    with pytest.raises(VariableMismatch):
        pairing(cur, test)


def test_degree_mismatch_skips_by_default():
    cur = single([dbar_factor(1, 0, [1], 1)], 1)
    test = TestForm((TestSlot(0, 0, BUMP, "1"),))
    paired = pairing(cur, test)
    assert paired.matched == 0
    assert paired.skipped == 1
    assert paired.value_iterated().is_zero


def test_degree_mismatch_strict_raises():
    cur = single([dbar_factor(1, 0, [1], 1)], 1)
    test = TestForm((TestSlot(0, 0, BUMP, "1"),))
    with pytest.raises(DegreeMismatch):
        pairing(cur, test, strict=True)


def test_value_at_zero_dispatcher():
    cur = single([dbar_factor(1, 0, [1], 1)], 1)
    test = TestForm((TestSlot(0, 0, BUMP, "dx"),))
    paired = pairing(cur, test)
    assert value_at_zero(paired).parts == ((Fraction(2), 1, 1),)
    assert value_at_zero(paired, mode="curve", mu=[1]).parts == ((Fraction(2), 1, 1),)
    with pytest.raises(ValueError):
        value_at_zero(paired, mode="curve")
    with pytest.raises(ValueError):
        value_at_zero(paired, mode="nope")
