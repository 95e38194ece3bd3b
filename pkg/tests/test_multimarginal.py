"""Coupling/cover bounds: exact values, duality, and the dichotomy."""

import random
from fractions import Fraction
from itertools import product

import pytest

from transport_certify import (
    InstanceError,
    check_dichotomy,
    l_value,
    l_value_relaxed,
    make_mmi,
    p_value,
)
from transport_certify.multimarginal import mmi_from_dict, mmi_to_dict, rounded_cover

HALF = Fraction(1, 2)


def uniform_mmi(n_spaces, size, b_set):
    weights = [[Fraction(1, size)] * size] * n_spaces
    return make_mmi(weights, b_set)


class TestPValue:
    def test_single_corner(self):
        mmi = uniform_mmi(2, 2, [(0, 0)])
        assert p_value(mmi) == HALF

    def test_diagonal_fully_charged(self):
        mmi = uniform_mmi(2, 2, [(0, 0), (1, 1)])
        assert p_value(mmi) == 1

    def test_empty_set(self):
        mmi = uniform_mmi(2, 2, [])
        assert p_value(mmi) == 0

    def test_witness_is_a_coupling_on_b(self):
        mmi = uniform_mmi(2, 3, [(0, 1), (1, 0), (2, 2)])
        value, witness = p_value(mmi, with_witness=True)
        assert value == 1
        mass_on_b = sum(witness.get(tup, 0) for tup in mmi.b_set)
        assert mass_on_b == value
        for space in range(2):
            for point in range(3):
                got = sum(m for tup, m in witness.items() if tup[space] == point)
                assert got == Fraction(1, 3)

    def test_agrees_with_transport_solver_for_two_marginals(self):
        # Independent route: max pi(B) = 1 - min-cost with cost 1 off B.
        from transport_certify import solve_exact, make_instance, validate_instance

        rng = random.Random(4)
        for _ in range(10):
            size = rng.choice([2, 3])
            b_set = [
                (i, j)
                for i in range(size)
                for j in range(size)
                if rng.random() < 0.4
            ]
            mmi = uniform_mmi(2, size, b_set)
            cost = [
                [Fraction(0) if (i, j) in set(b_set) else Fraction(1) for j in range(size)]
                for i in range(size)
            ]
            inst = validate_instance(
                make_instance(
                    [Fraction(1, size)] * size, [Fraction(1, size)] * size, cost
                )
            )
            assert p_value(mmi) == 1 - solve_exact(inst).value

    def test_size_limit(self):
        weights = [[Fraction(1, 10)] * 10] * 5
        mmi = make_mmi(weights, [])
        with pytest.raises(InstanceError, match="cells"):
            p_value(mmi)


class TestLValue:
    def test_single_corner_cover(self):
        mmi = uniform_mmi(2, 2, [(0, 0)])
        value, cover = l_value(mmi, with_witness=True)
        assert value == HALF
        assert sum(len(side) for side in cover) == 1

    def test_diagonal_needs_unit_weight(self):
        mmi = uniform_mmi(2, 2, [(0, 0), (1, 1)])
        assert l_value(mmi) == 1

    def test_empty_set_empty_cover(self):
        mmi = uniform_mmi(2, 2, [])
        assert l_value(mmi) == 0

    def test_zero_weight_point_is_l_null(self):
        weights = [[Fraction(1), Fraction(0)], [HALF, HALF]]
        mmi = make_mmi(weights, [(1, 0), (1, 1)])
        assert l_value(mmi) == 0

    def test_size_limit(self):
        weights = [[Fraction(1, 11)] * 11] * 2
        mmi = make_mmi(weights, [])
        with pytest.raises(InstanceError, match="exhaustive"):
            l_value(mmi)


class TestDuality:
    def test_relaxed_cover_equals_p(self):
        rng = random.Random(8)
        for trial in range(15):
            n = 2 if trial % 2 == 0 else 3
            size = 2 if n == 3 else rng.choice([2, 3])
            tuples = list(product(*(range(size) for _ in range(n))))
            b_set = [tup for tup in tuples if rng.random() < 0.45]
            mmi = uniform_mmi(n, size, b_set)
            assert l_value_relaxed(mmi) == p_value(mmi)

    def test_rounded_cover_is_valid_and_sandwiched(self):
        rng = random.Random(9)
        for _ in range(10):
            tuples = list(product(range(2), range(2), range(2)))
            b_set = [tup for tup in tuples if rng.random() < 0.5]
            mmi = uniform_mmi(3, 2, b_set)
            _, chi = l_value_relaxed(mmi, with_witness=True)
            cover, weight = rounded_cover(mmi, chi)
            for tup in b_set:
                assert any(tup[k] in set(cover[k]) for k in range(3))
            assert weight >= l_value(mmi)


class TestDichotomy:
    def test_two_marginal_equality(self):
        mmi = uniform_mmi(2, 2, [(0, 0)])
        report = check_dichotomy(mmi)
        assert report.bound_ok and report.sandwich_ok
        assert report.n2_equality
        assert not report.l_shaped_null
        assert report.witness_coupling

    def test_strict_gap_for_three_marginals(self):
        # Exactly-one-positive corner set on three uniform binary spaces:
        # couplings cap at 3/4 while any cylinder cover weighs 1.
        mmi = uniform_mmi(3, 2, [(0, 0, 1), (0, 1, 0), (1, 0, 0)])
        report = check_dichotomy(mmi)
        assert report.p == Fraction(3, 4)
        assert report.l_exact == 1
        assert report.bound_ok
        assert report.sandwich_ok
        assert report.n2_equality is None

    def test_null_classification(self):
        weights = [[Fraction(1), Fraction(0)], [HALF, HALF]]
        mmi = make_mmi(weights, [(1, 0)])
        report = check_dichotomy(mmi)
        assert report.l_shaped_null
        assert report.p == 0
        assert report.witness_coupling is None

    def test_monotone_in_b(self):
        rng = random.Random(10)
        tuples = [(i, j) for i in range(3) for j in range(3)]
        for _ in range(10):
            small = [tup for tup in tuples if rng.random() < 0.3]
            extra = [tup for tup in tuples if tup not in small and rng.random() < 0.3]
            mmi_small = uniform_mmi(2, 3, small)
            mmi_big = uniform_mmi(2, 3, small + extra)
            assert p_value(mmi_small) <= p_value(mmi_big)
            assert l_value(mmi_small) <= l_value(mmi_big)


class TestInstanceHandling:
    def test_round_trip(self):
        mmi = uniform_mmi(3, 2, [(0, 0, 1), (1, 1, 0)])
        assert mmi_from_dict(mmi_to_dict(mmi)) == mmi

    def test_arity_mismatch_rejected(self):
        with pytest.raises(InstanceError, match="arity"):
            make_mmi([[HALF, HALF], [HALF, HALF]], [(0, 0, 0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(InstanceError, match="out of range"):
            make_mmi([[HALF, HALF], [HALF, HALF]], [(0, 5)])

    def test_bad_weights_rejected(self):
        with pytest.raises(InstanceError, match="sum"):
            make_mmi([[HALF, HALF], [HALF, Fraction(1, 3)]], [])
