"""Exact solver: agreement with enumeration, feasibility, monotone value."""

import random
from fractions import Fraction

import pytest

from transport_certify import (
    INFINITY,
    InstanceError,
    Instance,
    brute_force_optimal,
    is_optimal,
    solve_exact,
    total_cost,
    validate_instance,
    make_instance,
)
from transport_certify.generators import gen_ap, gen_random, ap_shift_plan
from conftest import permutation_plan, random_feasible_plan, uniform_instance


class TestSolveExact:
    def test_zero_diagonal(self, square_instance):
        result = solve_exact(square_instance)
        assert result.feasible
        assert result.value == 0
        assert result.plan.mass == permutation_plan(2, (0, 1)).mass

    def test_cyclic_two_track_prefers_cheap_track(self):
        inst = gen_ap(3, 1, 2)
        result = solve_exact(inst)
        assert result.value == 1
        assert result.plan.mass[0][0] == Fraction(1, 3)

    def test_infeasible_single_cell(self):
        inst = Instance(mu=(Fraction(1),), nu=(Fraction(1),),
                        cost=((INFINITY,),))
        result = solve_exact(inst)
        assert not result.feasible
        assert result.value is INFINITY
        assert result.plan is None

    def test_value_matches_plan_cost(self):
        for seed in range(20):
            inst = gen_random(4, seed)
            result = solve_exact(inst)
            assert total_cost(inst, result.plan) == result.value

    def test_result_plan_has_instance_marginals(self):
        from transport_certify import marginals

        inst = gen_random(5, 7)
        result = solve_exact(inst)
        rows, cols = marginals(result.plan)
        assert rows == inst.mu
        assert cols == inst.nu


class TestBruteForce:
    def test_all_ones_cube(self):
        inst = uniform_instance([[1, 1, 1]] * 3)
        assert brute_force_optimal(inst) == 1

    def test_zero_diagonal(self, square_instance):
        assert brute_force_optimal(square_instance) == 0

    def test_agrees_with_solver_on_random_uniform(self):
        for seed in range(40):
            inst = gen_random(4, 1000 + seed)
            assert brute_force_optimal(inst) == solve_exact(inst).value

    def test_general_marginals_vertex_enumeration(self):
        mu = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
        nu = [Fraction(1, 4)] * 4
        cost = [
            [Fraction((i * j) % 5 + (i + j) % 3, 2) for j in range(4)]
            for i in range(3)
        ]
        inst = validate_instance(make_instance(mu, nu, cost))
        assert brute_force_optimal(inst) == solve_exact(inst).value

    def test_too_large_rejected(self):
        inst = gen_random(9, 0)
        with pytest.raises(InstanceError, match="too large"):
            brute_force_optimal(inst)

    def test_infeasible_reports_infinity(self):
        inst = uniform_instance([["inf", "inf"], ["inf", "inf"]])
        assert brute_force_optimal(inst) is INFINITY


class TestIsOptimal:
    def test_diagonal_is_optimal(self, square_instance):
        ok, gap = is_optimal(square_instance, permutation_plan(2, (0, 1)))
        assert ok and gap == 0

    def test_antidiagonal_gap_one(self, square_instance):
        ok, gap = is_optimal(square_instance, permutation_plan(2, (1, 0)))
        assert not ok
        assert gap == 1

    def test_cheap_shift_track_selected(self):
        inst = gen_ap(3, 2, 1)
        ok, gap = is_optimal(inst, ap_shift_plan(3))
        assert ok and gap == 0

    def test_infinite_plan_rejected(self):
        inst = uniform_instance([[0, 1], [1, "inf"]])
        with pytest.raises(InstanceError, match="infinite"):
            is_optimal(inst, permutation_plan(2, (0, 1)))


class TestSolverInvariants:
    def test_optimum_below_100_random_feasible_plans(self, rng):
        inst = gen_random(5, 99)
        optimum = solve_exact(inst).value
        for _ in range(100):
            plan = random_feasible_plan(inst, rng)
            assert optimum <= total_cost(inst, plan)

    def test_raising_an_entry_never_lowers_value(self):
        base = gen_random(4, 5)
        value = solve_exact(base).value
        rng = random.Random(5)
        for _ in range(15):
            i = rng.randrange(4)
            j = rng.randrange(4)
            if base.cost[i][j] is INFINITY:
                continue
            bumped = [list(row) for row in base.cost]
            bumped[i][j] += Fraction(rng.randint(1, 8), 3)
            inst = Instance(mu=base.mu, nu=base.nu,
                            cost=tuple(tuple(r) for r in bumped))
            assert solve_exact(inst).value >= value

    def test_feasibility_tracks_max_flow_structure(self):
        # Mass 1/2 must reach column 1 but only row 0 can serve it, and
        # row 0 also exclusively serves column 0.
        inst = uniform_instance([[0, 1], ["inf", "inf"]])
        assert not solve_exact(inst).feasible
        inst2 = uniform_instance([[0, 1], [1, "inf"]])
        assert solve_exact(inst2).feasible

    def test_float_mode_agrees_with_rational(self):
        from transport_certify import float_policy, instance_from_dict, instance_to_dict

        policy = float_policy()
        for seed in range(10):
            inst = gen_random(4, 3000 + seed, inf_density=0.25)
            as_float = instance_from_dict(instance_to_dict(inst), policy)
            exact = solve_exact(inst)
            approx = solve_exact(as_float, policy)
            assert exact.feasible == approx.feasible
            if exact.feasible:
                assert abs(float(exact.value) - approx.value) < 1e-9
