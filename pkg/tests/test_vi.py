import numpy as np
import pytest

from ridge_solver import (BoxDomain, MinMaxObjective, Role, SatisfactionKind,
                          Tolerances, all_satisfied, classify_all,
                          classify_coordinate, builtin, builtin_problem,
                          finite_diff_jacobian, is_approx_solution,
                          min_max_to_vi, progress_residual, vi_gap)

from oracles import corner_gap

EXACT = Tolerances()


def test_box_domain_validation():
    with pytest.raises(ValueError):
        BoxDomain(np.array([0.0, 1.0]), np.array([1.0, 1.0]))


def test_box_round_trip(rng):
    dom = BoxDomain(np.array([-1.0, 0.5, -3.0]), np.array([2.0, 0.75, 7.0]))
    for _ in range(50):
        x = rng.uniform(0, 1, 3)
        assert np.max(np.abs(dom.to_unit(dom.from_unit(x)) - x)) <= 1e-12


def test_min_max_to_vi_bilinear():
    p = builtin_problem("bilinear")
    for x in [(0.0, 0.0), (1.0, 0.0), (0.3, 0.8)]:
        v = p.evaluate_v(np.array(x))
        assert v == pytest.approx([0.5 - x[1], x[0] - 0.5])


def test_min_max_to_vi_constant_objective():
    obj = MinMaxObjective(lambda u: 1.0, lambda u: np.zeros(2), None,
                          (Role.MIN, Role.MAX))
    p = min_max_to_vi(obj, BoxDomain(np.zeros(2), np.ones(2)))
    assert np.all(p.evaluate_v(np.array([0.3, 0.9])) == 0.0)


def test_min_max_to_vi_f2_center():
    p = builtin_problem("f2")
    assert np.max(np.abs(p.evaluate_v(np.array([0.5, 0.5])))) < 1e-15


def test_min_max_to_vi_dimension_mismatch():
    obj = MinMaxObjective(lambda u: 0.0, lambda u: np.zeros(3), None,
                          (Role.MIN, Role.MAX, Role.MAX))
    with pytest.raises(ValueError):
        min_max_to_vi(obj, BoxDomain(np.zeros(2), np.ones(2)))


def test_sign_rule_exact(rng):
    # on minimizing coordinates V_j + w_j * df/du_j == 0 exactly
    obj, dom = builtin("f1")
    p = min_max_to_vi(obj, dom)
    w = dom.width
    for _ in range(20):
        x = rng.uniform(0, 1, 2)
        v = p.evaluate_v(x)
        g = obj.gradient(dom.from_unit(x))
        assert v[0] + w[0] * g[0] == 0.0
        assert v[1] - w[1] * g[1] == 0.0


def test_classify_coordinate_examples():
    p = builtin_problem("bilinear")
    s = classify_coordinate(p, np.array([0.0, 0.0]), 1)
    assert s.kind is SatisfactionKind.UNSATISFIED and s.value == 0.5
    s = classify_coordinate(p, np.array([1.0, 0.0]), 1)
    assert s.kind is SatisfactionKind.BOUNDARY_SATISFIED
    s = classify_coordinate(p, np.array([0.5, 0.5]), 1)
    assert s.kind is SatisfactionKind.ZERO_SATISFIED and not s.on_boundary


def test_classify_zero_on_boundary_flag():
    # a face coordinate whose field vanishes reports zero-satisfied + flag
    p = builtin_problem("bilinear")
    s = classify_coordinate(p, np.array([0.0, 0.5]), 1)
    assert s.kind is SatisfactionKind.ZERO_SATISFIED and s.on_boundary


def test_vi_gap_examples():
    p = builtin_problem("bilinear")
    assert vi_gap(p, np.array([0.5, 0.5])) == 0.0
    assert vi_gap(p, np.array([0.0, 0.0])) == pytest.approx(0.5)
    assert vi_gap(p, np.array([1.0, 0.0])) == pytest.approx(0.5)


def test_vi_gap_matches_corner_oracle(rng, problems):
    for p in problems.values():
        for _ in range(100):
            x = rng.uniform(0, 1, p.n)
            assert vi_gap(p, x) == pytest.approx(corner_gap(p, x), abs=1e-12)
            assert vi_gap(p, x) >= 0.0


def test_progress_residual_matches_reversed_corner_oracle(rng, problems):
    # residual(x) = max_y V(x)^T (x - y) = corner oracle of the negated field
    for p in problems.values():
        for _ in range(50):
            x = rng.uniform(0, 1, p.n)
            v = p.evaluate_v(x)
            best = max(float(v @ (x - np.array(c)))
                       for c in [(0, 0), (0, 1), (1, 0), (1, 1)])
            assert progress_residual(p, x) == pytest.approx(best, abs=1e-12)


def test_is_approx_solution():
    p = builtin_problem("bilinear")
    assert is_approx_solution(p, np.array([0.5, 0.5]), 1e-6)
    assert not is_approx_solution(p, np.array([0.0, 0.0]), 0.1)
    x = np.array([0.2, 0.9])
    big = p.n * float(np.max(np.abs(p.evaluate_v(x)))) + 1e-12
    assert is_approx_solution(p, x, big)
    assert is_approx_solution(p, x, float("inf"))


def test_finite_diff_jacobian_bilinear():
    p = builtin_problem("bilinear")
    j = finite_diff_jacobian(p, np.array([0.5, 0.5]), h=1e-6)
    assert np.max(np.abs(j - np.array([[0.0, -1.0], [1.0, 0.0]]))) <= 1e-6


def test_finite_diff_jacobian_zero_field():
    obj = MinMaxObjective(lambda u: 0.0, lambda u: np.zeros(2), None,
                          (Role.MIN, Role.MAX))
    p = min_max_to_vi(obj, BoxDomain(np.zeros(2), np.ones(2)))
    assert np.all(finite_diff_jacobian(p, np.array([0.4, 0.7])) == 0.0)


def test_finite_diff_jacobian_rejects_bad_h():
    p = builtin_problem("bilinear")
    with pytest.raises(ValueError):
        finite_diff_jacobian(p, np.array([0.5, 0.5]), h=0.0)


def test_finite_diff_near_boundary_one_sided():
    p = builtin_problem("f1")
    j = finite_diff_jacobian(p, np.array([0.0, 1.0]), h=1e-6)
    a = p.evaluate_jacobian(np.array([0.0, 1.0]))
    assert np.max(np.abs(j - a)) / max(1.0, np.max(np.abs(a))) < 1e-4


def test_finite_diff_matches_analytic(rng, problems):
    for p in problems.values():
        for _ in range(100):
            x = rng.uniform(0.02, 0.98, p.n)
            fd = finite_diff_jacobian(p, x, h=1e-6)
            an = p.evaluate_jacobian(x)
            rel = np.max(np.abs(fd - an)) / max(1.0, np.max(np.abs(an)))
            assert rel <= 1e-5


def test_gap_iff_all_satisfied(rng, problems):
    # tolerance-matched equivalence on random points plus known solutions
    tol = EXACT
    for name, p in problems.items():
        pts = [rng.uniform(0, 1, p.n) for _ in range(1000)]
        pts += [np.array([0.5, 0.5]), np.zeros(2), np.ones(2),
                np.array([0.25, 0.25])]
        for x in pts:
            gap_small = vi_gap(p, x) <= p.n * tol.zero
            sat = all_satisfied(p, x, tol)
            assert gap_small == sat, f"{name} at {x}"


def test_classify_all_consistent(rng, problems):
    for p in problems.values():
        for _ in range(50):
            x = rng.uniform(0, 1, p.n)
            bulk = classify_all(p, x)
            for j in range(1, p.n + 1):
                assert bulk[j - 1] == classify_coordinate(p, x, j)


def test_builtin_constants_bound_sampled_quotients(problems):
    from ridge_solver import estimate_constants
    for p in problems.values():
        lam, smooth = estimate_constants(p, seed=0, samples=500)
        assert lam <= p.lipschitz * (1 + 1e-9)
        assert smooth <= p.smoothness * (1 + 1e-9) + 1e-12
