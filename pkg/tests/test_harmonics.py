import warnings
from fractions import Fraction

import numpy as np
import pytest
from sympy.ntheory import n_order

from furst import harmonics
from furst.digits import YSet
from furst.exceptions import ConsistencyError, DomainError
from furst.harmonics import (
    adic_level,
    bump_derivative_norm,
    bump_eval,
    bump_fourier,
    bump_parseval,
    exp_sum,
    iter_exp_sums,
    kappa,
    kappa1_profile,
    lemma5_scan,
    lemma6_check,
    lemma7_check,
    lemma8_oracle,
    lemma8_search,
    mult_order,
    power_spectrum,
    remainder,
    remainder_profile,
    sigma_sum,
    subgroup,
)
from furst.structure import Angle, BumpSpec
from furst.verify import flip_first_term


@pytest.fixture
def full_set():
    return YSet.synthetic(2, 3, range(8), Angle(0))


@pytest.fixture
def mod8(bases):
    return subgroup(bases, 3)


@pytest.mark.parametrize("b, a, l, expected", [
    (3, 2, 3, 2),
    (3, 2, 5, 8),
    (3, 2, 14, 4096),
    (2, 3, 2, 6),
    (5, 3, 3, 18),
])
def test_mult_order(level, b, a, l, expected):  # noqa: E741
    assert mult_order(b, a, l) == expected


def test_mult_order_not_unit(level):
    with pytest.raises(DomainError):
        mult_order(4, 2, 3)


@pytest.mark.parametrize("b, a", [(3, 2), (5, 3), (7, 5)])
def test_mult_order_agrees_with_n_order(level, b, a, bases):
    with warnings.catch_warnings():
        warnings.simplefilter("error", DeprecationWarning)
        for l in range(1, 9):  # noqa: E741
            assert mult_order(b, a, l) == n_order(b, a**l)
        assert subgroup(bases, 6).S == n_order(3, 2**6)


@pytest.mark.parametrize("a, b, expected", [
    (2, 3, 13),
    (2, 5, 19),
    (3, 2, 18),
])
def test_kappa(level, a, b, expected):
    assert kappa(a, b) == expected


def test_subgroup(level, bases):
    desc = subgroup(bases, 14)
    assert desc.S == 4096
    assert desc.kappa == 13
    assert desc.l1 == 1
    assert desc.kappa1 == pytest.approx(0.25)
    assert list(subgroup(bases, 3).iter_elements()) == [1, 3]


def test_kappa1_profile(level, bases):
    rows = kappa1_profile(bases, [3, 4, 5])
    assert [row.S for row in rows] == [2, 4, 8]
    assert all(row.ratio == pytest.approx(0.25) for row in rows)


@pytest.mark.parametrize("m, real, imag", [
    (0, 2, 0),
    (1, 0, 2**0.5),
    (2, 0, 0),
    (4, -2, 0),
])
def test_exp_sum(level, mod8, m, real, imag):
    value = exp_sum(mod8, m)
    assert value.real == pytest.approx(real, abs=1e-12)
    assert value.imag == pytest.approx(imag, abs=1e-12)
    assert value.term_count == 2


def test_iter_exp_sums_blocks(level, bases):
    desc = subgroup(bases, 10)
    ms = range(harmonics.BLOCK_SIZE + 3)
    values = dict(iter_exp_sums(desc, ms))
    assert len(values) == len(ms)
    assert values[0].real == pytest.approx(desc.S)
    assert values[257].abs == pytest.approx(exp_sum(desc, 257).abs, abs=1e-9)


@pytest.mark.parametrize("m, cap, expected", [
    (12, 5, 2),
    (7, 5, 0),
    (0, 3, 3),
    (1024, 4, 4),
])
def test_adic_level(level, m, cap, expected):
    assert adic_level(m, 2, cap) == expected


def test_lemma5_scan(level, bases):
    report = lemma5_scan(subgroup(bases, 14), threads=1)
    assert not report.vacuous
    assert report.passed
    assert report.scanned == 2**14 - 1
    assert report.observed_threshold == 11
    assert report.max_abs < 1e-6


def test_lemma5_vacuous(level, bases):
    report = lemma5_scan(subgroup(bases, 10))
    assert report.vacuous
    assert report.passed
    assert report.scanned == 0


def test_lemma5_detects_tampering(level, bases):
    report = lemma5_scan(subgroup(bases, 14), threads=1, term_transform=flip_first_term)
    assert not report.passed
    assert 1 in report.violations


def test_lemma5_detects_patched_terms(level, bases, mocker):
    original = harmonics._term_block
    mocker.patch(
        "furst.harmonics._term_block",
        side_effect=lambda phases: flip_first_term(original(phases)),
    )
    report = lemma5_scan(subgroup(bases, 14), threads=2)
    assert not report.passed


def test_sigma_sum(level, full_set):
    assert sigma_sum(full_set, 0).real == pytest.approx(8)
    assert sigma_sum(full_set, 1).abs == pytest.approx(0, abs=1e-12)
    shifted = YSet.synthetic(2, 3, [1], Angle(1, 16))
    value = sigma_sum(shifted, 1)
    assert value.real == pytest.approx(np.cos(2 * np.pi * 3 / 16))
    assert value.imag == pytest.approx(np.sin(2 * np.pi * 3 / 16))


def test_power_spectrum(level, full_set):
    spectrum = power_spectrum(full_set)
    assert spectrum[0] == pytest.approx(64)
    assert np.allclose(spectrum[1:], 0)


@pytest.mark.parametrize("m, lhs", [
    (0, 128),
    (1, 0),
])
def test_lemma6_check(level, full_set, mod8, m, lhs):
    check = lemma6_check(full_set, mod8, m)
    assert check.lhs == pytest.approx(lhs, abs=1e-9)
    assert check.weight == 2**13
    assert check.rhs == 2**13 * 2 * 8
    assert check.holds


def test_lemma6_mismatch(level, full_set, bases):
    with pytest.raises(ConsistencyError):
        lemma6_check(full_set, subgroup(bases, 4), 1)


@pytest.mark.parametrize("t, expected", [
    (0, 1.0),
    (Fraction(1, 8), 0.5),
    (Fraction(7, 8), 0.5),
    (Fraction(1, 2), 0.0),
    (Fraction(5, 4), 0.0),
])
def test_bump_eval(level, t, expected):
    assert bump_eval(BumpSpec(4), t) == pytest.approx(expected)


def test_bump_fourier(level):
    spec = BumpSpec(4)
    assert bump_fourier(spec, 0) == pytest.approx(0.25)
    assert bump_fourier(spec, 4) == pytest.approx(0, abs=1e-15)
    assert bump_fourier(spec, 1) == pytest.approx(4 * (np.sin(np.pi / 4) / np.pi) ** 2)
    assert bump_derivative_norm(spec) == 8


@pytest.mark.parametrize("H", [2, 4, 40])
def test_bump_parseval(level, H):
    check = bump_parseval(BumpSpec(H))
    assert check.total == 2 * H
    assert check.upper_ok
    assert check.lower_ok


def test_bump_spec_width(level):
    with pytest.raises(DomainError):
        BumpSpec(1)


def test_remainder_full_set(level, full_set, mod8):
    spec = BumpSpec(4)
    assert remainder(full_set, mod8, 0, spec, Fraction(3, 10)) == pytest.approx(0, abs=1e-12)
    profile = remainder_profile(full_set, mod8, spec, Fraction(3, 10))
    assert profile.shape == (2,)
    assert np.allclose(profile, 0)


def test_remainder_single_point(level, mod8):
    y = YSet.synthetic(2, 3, [1], Angle(0))
    spec = BumpSpec(4)
    assert remainder(y, mod8, 0, spec, Fraction(1, 8)) == pytest.approx(0.75)
    assert remainder(y, mod8, 1, spec, Fraction(1, 8)) == pytest.approx(-0.25)
    assert remainder_profile(y, mod8, spec, Fraction(1, 8)) == pytest.approx([0.75, -0.25])


@pytest.mark.parametrize("w, members", [
    (2, [1]),
    (0, []),
])
def test_remainder_domain(level, mod8, w, members):
    y = YSet.synthetic(2, 3, members, Angle(0))
    with pytest.raises(DomainError):
        remainder(y, mod8, w, BumpSpec(4), 0)


def test_lemma7_check(level, full_set, mod8):
    check = lemma7_check(full_set, mod8, BumpSpec(4), Fraction(3, 10))
    assert check.holds
    assert check.mean_square == pytest.approx(0, abs=1e-20)
    assert check.bound_scale == pytest.approx(1.0)
    assert check.Y == 8


def test_lemma7_single_point(level, mod8):
    y = YSet.synthetic(2, 3, [1], Angle(0))
    check = lemma7_check(y, mod8, BumpSpec(4), Fraction(1, 8))
    assert check.best_w == 1
    assert check.best_r == pytest.approx(-0.25)
    assert check.mean_square == pytest.approx((0.75**2 + 0.25**2) / 2)


@pytest.mark.parametrize("H, success", [
    (20, True),
    (21, False),
])
def test_lemma8_search(level, full_set, mod8, H, success):
    result = lemma8_search(full_set, mod8, Fraction(3, 10), H)
    assert (result.w, result.x, result.y) == (0, 2, 2)
    assert result.err == Fraction(1, 20)
    assert result.scanned == 16
    assert result.success is success


def test_lemma8_oracle_agrees(level, full_set, mod8):
    search = lemma8_search(full_set, mod8, Fraction(3, 10), 20)
    for seed in range(3):
        oracle = lemma8_oracle(full_set, mod8, Fraction(3, 10), 20, seed=seed)
        assert (oracle.w, oracle.x, oracle.err) == (search.w, search.x, search.err)


def test_lemma8_shape(level, full_set, mod8):
    with pytest.raises(ConsistencyError):
        lemma8_search(full_set, mod8, Fraction(3, 10), 20, s_digits=4)


@pytest.mark.parametrize("H", [1, 0, -3])
def test_lemma8_needs_wide_target(level, full_set, mod8, H):
    with pytest.raises(DomainError):
        lemma8_search(full_set, mod8, Fraction(3, 10), H)
    with pytest.raises(DomainError):
        lemma8_oracle(full_set, mod8, Fraction(3, 10), H)
