"""Admissible directions, frozen coordinates, and epoch derivation.

An epoch (i, S) moves only in the support coordinates S and i, tangent to the
set {V_j = 0 : j in S}. The unit tangent is the null vector of the restricted
Jacobian rows, oriented so that the bordered determinant (gradient columns of
the S rows plus the direction as last column) has sign (-1)^|S|. For S empty
the direction is +e_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vi import Array, DEFAULT_TOL, Tolerances, VIProblem, classify_all


class DirectionError(Exception):
    """Base class for direction-layer failures; carries the witness point."""


class RankDeficient(DirectionError):
    pass


class DegenerateOrientation(DirectionError):
    pass


class MultipleBoundaryConflicts(DirectionError):
    pass


class AllFrozen(DirectionError):
    pass


class AllSatisfied(DirectionError):
    """No unsatisfied coordinate: the point already solves the problem."""


@dataclass(frozen=True)
class EpochState:
    """Coordinate under examination and the zero-constrained set (1-based)."""

    i: int
    S: tuple[int, ...]

    def __post_init__(self):
        s = tuple(sorted(set(self.S)))
        object.__setattr__(self, "S", s)
        if self.i < 1:
            raise ValueError("i must be >= 1")
        if any(j < 1 or j >= self.i for j in s):
            raise ValueError("S must be a subset of {1, ..., i-1}")

    @property
    def support(self) -> tuple[int, ...]:
        return self.S + (self.i,)

    @property
    def bitmask(self) -> int:
        return sum(1 << (j - 1) for j in self.S)

    @staticmethod
    def from_bitmask(i: int, mask: int) -> "EpochState":
        s = tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)
        return EpochState(i, s)


@dataclass(frozen=True)
class Direction:
    """Oriented unit direction with its support and orientation certificate."""

    d: Array
    support: tuple[int, ...]
    orientation_det: float
    smallest_singular: float  # sigma_m of the restricted rows; 0.0 when S is empty


def restricted_rows(p: VIProblem, x: Array, e: EpochState) -> Array:
    """The |S| x (|S|+1) matrix of S-gradients restricted to the support."""
    jac = p.evaluate_jacobian(np.asarray(x, dtype=float))
    rows = [j - 1 for j in e.S]
    cols = [j - 1 for j in e.support]
    return jac[np.ix_(rows, cols)]


def compute_direction(p: VIProblem, x: Array, e: EpochState,
                      rank_tol: float | None = None) -> Direction:
    """Oriented unit direction for epoch e at x.

    Raises RankDeficient when the restricted rows lose rank (sigma_m below
    rank_tol, default 1e-8 times the largest singular value with floor 1) and
    DegenerateOrientation if the bordering determinant is numerically zero,
    which a full-rank restriction rules out.
    """
    x = np.asarray(x, dtype=float)
    n = p.n
    cols = [j - 1 for j in e.support]
    m = len(e.S)
    if m == 0:
        d = np.zeros(n)
        d[e.i - 1] = 1.0
        return Direction(d=d, support=e.support, orientation_det=1.0,
                         smallest_singular=0.0)

    b = restricted_rows(p, x, e)
    _, sv, vt = np.linalg.svd(b)
    tol = rank_tol if rank_tol is not None else 1e-8 * max(sv[0], 1.0)
    if sv[-1] <= tol:
        raise RankDeficient(
            f"restricted rows rank-deficient at x={x.tolist()} for epoch "
            f"(i={e.i}, S={e.S}): sigma_min={sv[-1]:.3e} <= {tol:.3e}")
    u = vt[-1]  # unit null vector of b, unique up to sign

    # bordered matrix: gradient columns for the S rows, direction last
    mtx = np.hstack([b.T, u[:, None]])
    det = float(np.linalg.det(mtx))
    target = -1.0 if m % 2 else 1.0
    if det * target < 0:
        u = -u
        det = -det
    hadamard = float(np.prod(np.linalg.norm(b, axis=1))) or 1.0
    if abs(det) <= tol * max(hadamard, 1.0):
        raise DegenerateOrientation(
            f"orientation determinant {det:.3e} numerically zero at x={x.tolist()}")

    d = np.zeros(n)
    d[cols] = u
    return Direction(d=d, support=e.support, orientation_det=det,
                     smallest_singular=float(sv[-1]))


def _boundary_conflicts(x: Array, d: Array, coords, tol: Tolerances) -> list[int]:
    out = []
    for j in coords:
        xj = x[j - 1]
        dj = d[j - 1]
        if (xj <= tol.boundary and dj < -tol.direction_zero) or \
           (xj >= 1.0 - tol.boundary and dj > tol.direction_zero):
            out.append(j)
    return out


def ideal_direction(p: VIProblem, x: Array, i: int,
                    tol: Tolerances = DEFAULT_TOL) -> tuple[Direction, tuple[int, ...]]:
    """Direction of movement for coordinate i with the pruned zero set.

    S collects the zero-satisfied coordinates below i. If exactly one of them
    sits on a face that the direction points out of, it is dropped and the
    direction recomputed; more than one such coordinate is a degeneracy.
    """
    x = np.asarray(x, dtype=float)
    v = p.evaluate_v(x)
    s0 = tuple(j for j in range(1, i) if abs(v[j - 1]) <= tol.zero)
    dir0 = compute_direction(p, x, EpochState(i, s0))
    conflicts = _boundary_conflicts(x, dir0.d, s0, tol)
    if not conflicts:
        return dir0, s0
    if len(conflicts) > 1:
        raise MultipleBoundaryConflicts(
            f"coordinates {conflicts} all exit their faces at x={x.tolist()} (i={i})")
    s1 = tuple(j for j in s0 if j != conflicts[0])
    return compute_direction(p, x, EpochState(i, s1)), s1


def is_frozen(p: VIProblem, x: Array, j: int, tol: Tolerances = DEFAULT_TOL) -> bool:
    """A face coordinate is frozen when its own ideal direction points out."""
    x = np.asarray(x, dtype=float)
    xj = x[j - 1]
    on_lower = xj <= tol.boundary
    on_upper = xj >= 1.0 - tol.boundary
    if not (on_lower or on_upper):
        return False
    d, _ = ideal_direction(p, x, j, tol)
    dj = d.d[j - 1]
    return (on_lower and dj < -tol.direction_zero) or \
           (on_upper and dj > tol.direction_zero)


def admissible_pair(p: VIProblem, x: Array,
                    tol: Tolerances = DEFAULT_TOL) -> EpochState:
    """Recover (i, S) from the point alone.

    i is the largest non-frozen coordinate at or below the least unsatisfied
    one; S is the pruned zero set of its ideal direction. Raises AllSatisfied
    when nothing is unsatisfied and AllFrozen when every candidate is stuck
    (which the convergence argument rules out; surfaced for diagnostics).
    """
    x = np.asarray(x, dtype=float)
    statuses = classify_all(p, x, tol)
    unsatisfied = [j for j in range(1, p.n + 1) if not statuses[j - 1].satisfied]
    if not unsatisfied:
        raise AllSatisfied(f"every coordinate is satisfied at x={x.tolist()}")
    ell = min(unsatisfied)
    candidate = None
    for j in range(1, ell + 1):
        if not is_frozen(p, x, j, tol):
            candidate = j
    if candidate is None:
        raise AllFrozen(f"all coordinates up to {ell} frozen at x={x.tolist()}")
    _, s = ideal_direction(p, x, candidate, tol)
    return EpochState(candidate, s)
