import numpy as np
import pytest

from ridge_solver import (AllFrozen, AllSatisfied, EpochState,
                          MultipleBoundaryConflicts, RankDeficient, VIProblem,
                          admissible_pair, builtin_problem, compute_direction,
                          ideal_direction, is_frozen)

from oracles import angle_between, brute_direction, random_vi


def test_epoch_state_validation():
    with pytest.raises(ValueError):
        EpochState(2, (2,))
    with pytest.raises(ValueError):
        EpochState(0, ())
    e = EpochState(3, (2, 1))
    assert e.S == (1, 2) and e.support == (1, 2, 3) and e.bitmask == 3
    assert EpochState.from_bitmask(3, 3) == e


def test_direction_empty_support():
    p = builtin_problem("bilinear")
    d = compute_direction(p, np.array([0.3, 0.0]), EpochState(1, ()))
    assert np.array_equal(d.d, [1.0, 0.0])
    assert d.orientation_det == 1.0 and d.smallest_singular == 0.0
    d = compute_direction(p, np.array([1.0, 0.2]), EpochState(2, ()))
    assert np.array_equal(d.d, [0.0, 1.0])


def test_direction_ridge_leg():
    # one zero constraint: the unit tangent with the orientation convention
    p = builtin_problem("bilinear")
    d = compute_direction(p, np.array([0.8, 0.5]), EpochState(2, (1,)))
    assert np.allclose(d.d, [-1.0, 0.0], atol=1e-12)
    assert d.orientation_det < 0  # sign (-1)^{|S|}
    assert d.smallest_singular == pytest.approx(1.0)


def test_direction_unit_norm_and_orthogonality(rng):
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 6))
        p = random_vi(rng, n)
        i = int(rng.integers(1, n + 1))
        smax = i - 1
        s = tuple(sorted(rng.choice(np.arange(1, i), size=int(rng.integers(0, smax + 1)),
                                    replace=False).tolist())) if smax else ()
        x = rng.uniform(0, 1, n)
        e = EpochState(i, s)
        try:
            d = compute_direction(p, x, e)
        except RankDeficient:
            continue
        assert abs(np.linalg.norm(d.d) - 1.0) <= 1e-9
        jac = p.evaluate_jacobian(x)
        for j in e.S:
            grad = jac[j - 1]
            assert abs(grad @ d.d) <= 1e-8 * np.linalg.norm(grad)
        target = -1.0 if len(e.S) % 2 else 1.0
        assert np.sign(d.orientation_det) == target
        off = [k for k in range(n) if (k + 1) not in e.support]
        assert np.all(d.d[off] == 0.0)
        checked += 1


def test_direction_determinant_nondegenerate(rng):
    # full-rank restriction implies a determinant bounded away from zero
    for _ in range(100):
        n = int(rng.integers(2, 5))
        p = random_vi(rng, n)
        i = int(rng.integers(2, n + 1))
        s = (int(rng.integers(1, i)),)
        try:
            d = compute_direction(p, rng.uniform(0, 1, n), EpochState(i, s))
        except RankDeficient:
            continue
        assert abs(d.orientation_det) > 0.0


def test_direction_matches_brute_force(rng):
    # dimensions <= 3, |S| <= 2: grid-search oracle within 1e-3 angle
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 4))
        p = random_vi(rng, n)
        i = int(rng.integers(1, n + 1))
        smax = i - 1
        size = int(rng.integers(0, min(smax, 2) + 1)) if smax else 0
        s = tuple(sorted(rng.choice(np.arange(1, i), size=size, replace=False).tolist()))
        x = rng.uniform(0, 1, n)
        try:
            d = compute_direction(p, x, EpochState(i, s))
        except RankDeficient:
            continue
        oracle = brute_direction(p, x, s, i)
        assert angle_between(d.d, oracle) <= 1e-3
        checked += 1


def test_rank_deficient_raises():
    # V1's gradient vanishes at x1 = 0.5, so the (2,{1}) restriction loses rank
    p = VIProblem(n=2,
                  evaluate_v=lambda x: np.array([(x[0] - 0.5) ** 2, x[0] + x[1]]),
                  evaluate_jacobian=lambda x: np.array([[2.0 * (x[0] - 0.5), 0.0],
                                                        [1.0, 1.0]]))
    with pytest.raises(RankDeficient):
        compute_direction(p, np.array([0.5, 0.3]), EpochState(2, (1,)),
                          rank_tol=1e-8)
    # the same call with the constraint dropped is fine
    compute_direction(p, np.array([0.5, 0.3]), EpochState(2, ()))


def test_ideal_direction_bilinear_no_prune():
    p = builtin_problem("bilinear")
    d, s = ideal_direction(p, np.array([1.0, 0.5]), 2)
    assert s == (1,)
    assert np.allclose(d.d, [-1.0, 0.0], atol=1e-12)


def test_ideal_direction_first_coordinate():
    p = builtin_problem("bilinear")
    d, s = ideal_direction(p, np.array([0.7, 0.2]), 1)
    assert s == () and np.array_equal(d.d, [1.0, 0.0])


def test_ideal_direction_prunes_exiting_face_coordinate():
    # linear field where the (2,{1}) tangent pushes coordinate 1 below its
    # face, so the zero set collapses to {} and the motion is +e2
    def v(x):
        return np.array([x[0] - x[1] + 0.2, x[0] + x[1]])

    p = VIProblem(n=2, evaluate_v=v,
                  evaluate_jacobian=lambda x: np.array([[1.0, -1.0], [1.0, 1.0]]))
    x = np.array([0.0, 0.2])
    assert abs(v(x)[0]) < 1e-15  # coordinate 1 zero-satisfied at its face
    d_full = compute_direction(p, x, EpochState(2, (1,)))
    assert d_full.d[0] < 0  # points out of the lower face
    d, s = ideal_direction(p, x, 2)
    assert s == ()
    assert np.array_equal(d.d, [0.0, 1.0])


def test_ideal_direction_multiple_conflicts(rng):
    # two zero-satisfied face coordinates whose tangent exits both faces:
    # relabeling the constraint rows flips the oriented tangent, so one of
    # the two labelings exhibits the double conflict
    found = False
    for _ in range(200):
        n = 3
        a = rng.normal(size=(n, n))
        c = np.array([0.0, 0.0, rng.uniform(0.3, 0.7)])
        shift = -a @ c  # makes V(c) = 0 so coordinates 1,2 are zero-satisfied

        def v(x, a=a, shift=shift):
            return a @ np.asarray(x, dtype=float) + shift

        for perm in ((0, 1, 2), (1, 0, 2)):
            ap = a[list(perm)]
            shiftp = shift[list(perm)]
            p = VIProblem(n=3,
                          evaluate_v=lambda x, ap=ap, sp=shiftp: ap @ np.asarray(x) + sp,
                          evaluate_jacobian=lambda x, ap=ap: ap)
            try:
                d = compute_direction(p, c, EpochState(3, (1, 2)))
            except RankDeficient:
                continue
            if d.d[0] < -1e-9 and d.d[1] < -1e-9:
                with pytest.raises(MultipleBoundaryConflicts):
                    ideal_direction(p, c, 3)
                found = True
        if found:
            break
    assert found


def test_admissible_pair_bilinear_examples():
    p = builtin_problem("bilinear")
    assert admissible_pair(p, np.array([0.0, 0.0])) == EpochState(1, ())
    assert admissible_pair(p, np.array([1.0, 0.0])) == EpochState(2, ())
    assert admissible_pair(p, np.array([1.0, 0.5])) == EpochState(2, (1,))


def test_admissible_pair_all_satisfied():
    p = builtin_problem("bilinear")
    with pytest.raises(AllSatisfied):
        admissible_pair(p, np.array([0.5, 0.5]))


def test_admissible_pair_all_frozen():
    # constant negative field: coordinate 1 unsatisfied at its upper face
    # with ideal direction +e1, hence frozen
    p = VIProblem(n=2, evaluate_v=lambda x: np.array([-1.0, -1.0]),
                  evaluate_jacobian=lambda x: np.zeros((2, 2)))
    assert is_frozen(p, np.array([1.0, 0.3]), 1)
    with pytest.raises(AllFrozen):
        admissible_pair(p, np.array([1.0, 0.3]))


def test_frozen_interior_is_false():
    p = builtin_problem("bilinear")
    assert not is_frozen(p, np.array([0.4, 0.6]), 1)
