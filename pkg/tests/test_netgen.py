from fractions import Fraction

import pytest

from furst.exceptions import ConsistencyError, DegenerateInputError, DomainError, PreconditionError
from furst.netgen import (
    build_net,
    choose_n,
    difference_witness,
    digit_set,
    digit_set_from_points,
    ed_bound,
    lemma2_record,
    verify_lemma2,
)
from furst.structure import Angle, DigitSet


@pytest.fixture
def net_101(bases):
    return build_net(bases, Angle(1, 101), 10)


def test_build_net(level, net_101):
    assert net_101.inv_gap == 101
    assert net_101.gap == Fraction(1, 101)
    assert net_101.k == 20
    assert net_101.successor == 108
    assert net_101.d_gap == 15
    assert net_101.delta == Fraction(15, 101)
    assert net_101.M1 == 1010
    assert (net_101.q_hi, net_101.q_lo) == (2, 1)
    assert net_101.dispersion <= net_101.delta
    assert net_101.pigeonhole_ok
    assert net_101.window_ok


def test_build_net_requires_small_M(level, bases):
    with pytest.raises(PreconditionError):
        build_net(bases, Angle(1, 5), 10)


def test_build_net_with_collisions(level, bases):
    report = build_net(bases, Angle(1, 5), 10, allow_collisions=True)
    assert report.inv_gap == 5
    assert report.d_gap == 2
    assert report.delta == Fraction(2, 5)
    assert report.point_count == 4
    assert report.sigma_count == 7


def test_build_net_degenerate(level, bases):
    with pytest.raises(DegenerateInputError):
        build_net(bases, Angle(1, 101), 1)


def test_net_points_are_exact_steps(level, net_101):
    steps = {Angle(q, 101) for q in (1, 2, 3, 4, 6, 8, 9, 12)}
    assert steps <= set(net_101.net)
    assert Angle(100, 101) in net_101.net


@pytest.mark.parametrize("j", [0, 5, 19])
def test_difference_witness(level, net_101, j):
    witness = difference_witness(net_101, j)
    assert witness.ok
    assert witness.within_m1
    assert witness.hi_product == 2 * witness.q_j


def test_difference_witness_range(level, net_101):
    with pytest.raises(DomainError):
        difference_witness(net_101, 20)


@pytest.mark.parametrize("delta, a, expected", [
    (Fraction(1, 10), 2, 3),
    (Fraction(15, 101), 2, 2),
    (Fraction(1), 2, 0),
    (Fraction(1, 9), 3, 2),
])
def test_choose_n(level, delta, a, expected):
    assert choose_n(delta, a) == expected


@pytest.mark.parametrize("delta", [Fraction(0), Fraction(-1, 2), Fraction(3, 2)])
def test_choose_n_errors(level, delta):
    with pytest.raises(DomainError):
        choose_n(delta, 2)


def test_digit_set_from_points(level):
    ds = digit_set_from_points([Angle(1, 5), Angle(3, 5), Angle(4, 5)], 2, 2)
    assert ds.residues == (0, 2, 3)
    assert ds.modulus == 4


def test_digit_set(level, bases):
    ds = digit_set(bases, Angle(1, 101), 1010, 2)
    assert ds.source_bound == 1010
    assert ds.residues == (0, 1, 2, 3)


@pytest.mark.parametrize("x_n, n, passed", [
    (2, 2, True),
    (1, 2, True),
    (1, 4, False),
    (2, 4, True),
])
def test_lemma2_record(level, x_n, n, passed):
    assert lemma2_record(x_n, 2, n).passed == passed


def test_verify_lemma2(level, bases, net_101):
    ds = digit_set(bases, Angle(1, 101), net_101.M1, 2)
    assert verify_lemma2(net_101, ds).passed


@pytest.mark.parametrize("ds", [
    DigitSet(3, 2, (0, 1)),
    DigitSet(2, 3, (0, 1)),
    DigitSet(2, 2, (0, 1), 999),
])
def test_verify_lemma2_mismatch(level, net_101, ds):
    with pytest.raises(ConsistencyError):
        verify_lemma2(net_101, ds)


def test_ed_bound(level):
    assert ed_bound(10) is None
    assert 0 < ed_bound(10**10) < 1
