import math

import numpy as np
import pandas as pd
import pytest

from BackEnd_01_ARC_Core import (
    ROOT,
    ARCDomainError,
    ARCInputError,
    enumerate_policies,
    normal_form_problem,
    solve_plain,
)
from BackEnd_02_ARC_Analysis import (
    CurveSample,
    RegretCurve,
    competitive_ratio,
    convexity_check,
    cr_policy_set_check,
    is_strictly_increasing,
    policy_ratio,
    ratio_root,
    rdc_diagnostic,
    regret_curve,
    slope_bounds_check,
)
from BackEnd_04_Oracle import brute_force_minimax

BETAS = (0.0, 0.25, 0.5, 2 / 3, 1.0, 1.5)


def curve_of(points):
    return RegretCurve(tuple(CurveSample(b, v, "p") for b, v in points), "synthetic")


class TestRegretCurve:
    def test_classic_values(self, classic):
        curve = regret_curve(classic, [0, 2 / 3, 1])
        assert curve.values == pytest.approx([-2, 0, 1], abs=1e-12)

    def test_policy_switch_visible(self, classic):
        curve = regret_curve(classic, [0.0, 1.0])
        assert curve.samples[0].policy_id != curve.samples[1].policy_id

    def test_repeated_beta_rejected(self, classic):
        with pytest.raises(ARCInputError):
            regret_curve(classic, [0.5, 0.5])

    def test_curve_validation(self):
        with pytest.raises(ARCInputError):
            curve_of([(0.0, 1.0), (1.0, math.inf)])
        with pytest.raises(ARCInputError):
            curve_of([(-1.0, 0.0), (1.0, 0.0)])

    def test_frame_round_trip(self, capacity):
        curve = regret_curve(capacity, BETAS)
        frame = curve.to_frame()
        assert list(frame.columns) == ["beta", "value", "policy_id"]
        assert RegretCurve.from_frame(frame, curve.problem_id) == curve

    def test_from_frame_needs_columns(self):
        with pytest.raises(ARCInputError):
            RegretCurve.from_frame(pd.DataFrame({"beta": [0.0]}))

    def test_strictly_increasing_with_positive_rewards(self, capacity, oneway_small):
        for problem in (capacity, oneway_small, normal_form_problem([[2, 1], [1, 2]])):
            assert is_strictly_increasing(regret_curve(problem, BETAS))

    def test_continuity_surrogate(self, capacity):
        grid = np.linspace(0, 2, 21)
        values = regret_curve(capacity, grid).values
        assert np.all(np.abs(np.diff(values)) <= np.diff(grid) * 2.5 + 1e-12)


class TestCompetitiveRatio:
    def test_classic(self, classic):
        result = competitive_ratio(classic)
        assert not result.degenerate
        assert result.beta0 == pytest.approx(2 / 3, abs=1e-8)
        assert 0 < result.beta0 <= 1
        assert abs(solve_plain(classic, result.beta0).value) <= 1e-8

    def test_identity_is_degenerate(self, identity):
        result = competitive_ratio(identity)
        assert result.degenerate
        assert result.d_zero == 0
        assert result.beta0 == 0.0

    def test_bracket_widens(self):
        result = ratio_root(lambda beta: beta - 1.5)
        assert result.beta0 == pytest.approx(1.5, abs=1e-8)
        assert result.upper_bracket == 2.0

    def test_tolerance_must_be_positive(self, classic):
        with pytest.raises(ARCInputError):
            competitive_ratio(classic, tol=0.0)

    def test_ratio_consistency(self, capacity):
        result = competitive_ratio(capacity)
        best = solve_plain(capacity, result.beta0).policy
        assert policy_ratio(capacity, best) == pytest.approx(result.beta0, abs=1e-6)
        assert all(policy_ratio(capacity, p) <= result.beta0 + 1e-6 for p in enumerate_policies(capacity))

    def test_policy_ratio_needs_positive_best(self):
        problem = normal_form_problem([[0, 1], [0, 2]])
        with pytest.raises(ARCDomainError):
            policy_ratio(problem, enumerate_policies(problem)[0])


class TestPolicySets:
    @pytest.mark.parametrize("rows", [[[3, 1], [2, 2]], [[3, 1]], [[2, 1], [1, 2]], [[3, 1], [2, 2], [2.5, 1.5]]])
    def test_sets_agree(self, rows):
        assert cr_policy_set_check(normal_form_problem(rows))

    def test_capacity(self, capacity):
        assert cr_policy_set_check(capacity)

    def test_degenerate_reports_false(self, identity):
        assert not cr_policy_set_check(identity)


class TestSlopeBounds:
    def test_classic(self, classic):
        witness = slope_bounds_check(classic, 0.0, 1.0)
        assert witness.quotient == pytest.approx(3)
        assert witness.r_star_21 == 3
        assert witness.r_star_12 == 2
        assert witness.holds

    def test_equal_betas_rejected(self, classic):
        with pytest.raises(ARCInputError):
            slope_bounds_check(classic, 0.5, 0.5)

    @pytest.mark.parametrize("pair", [(a, b) for i, a in enumerate(BETAS) for b in BETAS[i + 1:]])
    def test_sandwich(self, pair, capacity, oneway_small):
        for problem in (capacity, oneway_small):
            assert slope_bounds_check(problem, *pair).holds


class TestConvexity:
    def test_affine(self):
        assert convexity_check(curve_of([(0, 1), (1, 3), (2, 5), (3, 7)]))

    def test_concave(self):
        assert not convexity_check(curve_of([(0, 0), (1, 1), (2, 1.5)]))

    def test_needs_three_samples(self):
        with pytest.raises(ARCInputError):
            convexity_check(curve_of([(0, 0), (1, 1)]))

    def test_uneven_spacing(self):
        assert convexity_check(curve_of([(0, 0), (0.1, 0.01), (1, 1), (3, 9)]))


class TestRdcDiagnostic:
    def test_reflexive_pairs(self, classic):
        report = rdc_diagnostic(classic)
        same = report[report["policy_a"] == report["policy_b"]]
        assert same["satisfied"].all()
        assert (same["witness"] == same["policy_a"]).all()

    def test_identity_fails(self, identity):
        report = rdc_diagnostic(identity)
        mixed = report[report["policy_a"] != report["policy_b"]]
        assert len(mixed) == 1
        assert not mixed["satisfied"].iloc[0]

    def test_frontier_row_dominates_midpoint(self):
        problem = normal_form_problem([[3, 1], [2, 2], [2.5, 1.5]])
        ids = {p.action(ROOT): p.policy_id for p in enumerate_policies(problem)}
        report = rdc_diagnostic(problem).set_index(["policy_a", "policy_b"])
        row = report.loc[(ids[1], ids[2])]
        assert row["satisfied"]
        assert row["witness"] == ids[3]
        assert row["lam"] == 0.5

    def test_restricted_to_optimal_set(self, classic):
        _, optimal = brute_force_minimax(classic, 1.0)
        report = rdc_diagnostic(classic, policies=optimal)
        assert len(report) == 3
        assert set(report["policy_a"]) <= {p.policy_id for p in optimal}

    def test_lambda_grid_inside_unit_interval(self, classic):
        with pytest.raises(ARCInputError):
            rdc_diagnostic(classic, lambda_grid=[0.0, 0.5])
