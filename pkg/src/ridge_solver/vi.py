"""Box-constrained variational inequality problems.

A problem is a map V on the unit box together with its Jacobian. A point
solves the problem when every coordinate is *satisfied*: either V_j vanishes
there, or the coordinate sits on a face of the box with V_j pressing out of
it. Min-max objectives reduce to this form by flipping the gradient sign on
minimizing coordinates; arbitrary boxes are normalized to the unit box with
chain-rule scaling so that satisfaction is preserved.

Coordinate indices are 1-based throughout the public API.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances for satisfaction tests.

    ``zero`` bounds |V_j| for zero-satisfaction, ``boundary`` bounds the
    distance to a box face, ``direction_zero`` is the threshold below which a
    direction component counts as zero in sign tests.
    """

    zero: float = 1e-9
    boundary: float = 1e-12
    direction_zero: float = 1e-12

    def with_zero(self, zero: float) -> "Tolerances":
        return Tolerances(zero=zero, boundary=self.boundary,
                          direction_zero=self.direction_zero)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box in problem units with an affine map to the unit box."""

    lower: Array
    upper: Array

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be strictly below its upper bound")

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def width(self) -> Array:
        return self.upper - self.lower

    def to_unit(self, u: Array) -> Array:
        """Problem units -> unit box."""
        return (np.asarray(u, dtype=float) - self.lower) / self.width

    def from_unit(self, x: Array) -> Array:
        """Unit box -> problem units."""
        return self.lower + self.width * np.asarray(x, dtype=float)

    @staticmethod
    def unit(n: int) -> "BoxDomain":
        return BoxDomain(np.zeros(n), np.ones(n))


class Role(enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class MinMaxObjective:
    """Scalar objective with per-coordinate player roles, in problem units.

    ``hessian`` may be None, in which case the induced problem falls back to
    central differences of V for its Jacobian.
    """

    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    hessian: Optional[Callable[[Array], Array]]
    roles: tuple[Role, ...]
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.roles)


@dataclass(frozen=True)
class VIProblem:
    """Map V and Jacobian J on the unit box.

    ``evaluate_v`` and ``evaluate_jacobian`` must be pure: same input, same
    output, no hidden state. ``domain`` records the original problem-unit box
    for reporting; all computation happens in normalized coordinates.
    ``lipschitz`` and ``smoothness`` are optional metadata used only in
    reports, never for correctness.
    """

    n: int
    evaluate_v: Callable[[Array], Array]
    evaluate_jacobian: Callable[[Array], Array]
    domain: BoxDomain = None  # type: ignore[assignment]
    lipschitz: Optional[float] = None
    smoothness: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if self.domain is None:
            object.__setattr__(self, "domain", BoxDomain.unit(self.n))
        if self.domain.n != self.n:
            raise ValueError("domain dimension does not match n")


class SatisfactionKind(enum.Enum):
    ZERO_SATISFIED = "zero"
    BOUNDARY_SATISFIED = "boundary"
    UNSATISFIED = "unsatisfied"


@dataclass(frozen=True)
class CoordinateStatus:
    """Classification of one coordinate at a point.

    ``on_boundary`` flags zero-satisfied coordinates that also sit on a face
    (ties are reported as zero-satisfied).
    """

    kind: SatisfactionKind
    value: float
    on_boundary: bool = False

    @property
    def satisfied(self) -> bool:
        return self.kind is not SatisfactionKind.UNSATISFIED


def min_max_to_vi(obj: MinMaxObjective, domain: BoxDomain) -> VIProblem:
    """Reduce a min-max objective to a VI problem on the unit box.

    V_j = -df/du_j on minimizing coordinates and +df/du_j on maximizing ones,
    scaled by the box widths so that a unit-box step corresponds to a
    problem-unit step; the Jacobian carries the outer product of widths.
    """
    if obj.n != domain.n:
        raise ValueError(f"objective has {obj.n} coordinates, domain has {domain.n}")
    signs = np.array([-1.0 if r is Role.MIN else 1.0 for r in obj.roles])
    w = domain.width

    def evaluate_v(x: Array) -> Array:
        u = domain.from_unit(x)
        return signs * w * np.asarray(obj.gradient(u), dtype=float)

    if obj.hessian is not None:
        scale = np.outer(w, w) * signs[:, None]

        def evaluate_jacobian(x: Array) -> Array:
            u = domain.from_unit(x)
            return scale * np.asarray(obj.hessian(u), dtype=float)
    else:
        def evaluate_jacobian(x: Array, _h: float = 1e-6) -> Array:
            return _central_jacobian(evaluate_v, np.asarray(x, dtype=float), _h)

    return VIProblem(n=obj.n, evaluate_v=evaluate_v,
                     evaluate_jacobian=evaluate_jacobian,
                     domain=domain, name=obj.name)


def classify_coordinate(p: VIProblem, x: Array, j: int,
                        tol: Tolerances = DEFAULT_TOL) -> CoordinateStatus:
    """Classify coordinate j (1-based) at x per the satisfaction rules."""
    v = float(p.evaluate_v(np.asarray(x, dtype=float))[j - 1])
    xj = float(x[j - 1])
    on_lower = xj <= tol.boundary
    on_upper = xj >= 1.0 - tol.boundary
    if abs(v) <= tol.zero:
        return CoordinateStatus(SatisfactionKind.ZERO_SATISFIED, v,
                                on_boundary=on_lower or on_upper)
    if (on_lower and v <= tol.zero) or (on_upper and v >= -tol.zero):
        return CoordinateStatus(SatisfactionKind.BOUNDARY_SATISFIED, v,
                                on_boundary=True)
    return CoordinateStatus(SatisfactionKind.UNSATISFIED, v)


def classify_all(p: VIProblem, x: Array,
                 tol: Tolerances = DEFAULT_TOL) -> list[CoordinateStatus]:
    """Classify every coordinate with a single V evaluation."""
    x = np.asarray(x, dtype=float)
    v = p.evaluate_v(x)
    out = []
    for j in range(p.n):
        vj = float(v[j])
        on_lower = x[j] <= tol.boundary
        on_upper = x[j] >= 1.0 - tol.boundary
        if abs(vj) <= tol.zero:
            out.append(CoordinateStatus(SatisfactionKind.ZERO_SATISFIED, vj,
                                        on_boundary=on_lower or on_upper))
        elif (on_lower and vj <= tol.zero) or (on_upper and vj >= -tol.zero):
            out.append(CoordinateStatus(SatisfactionKind.BOUNDARY_SATISFIED, vj,
                                        on_boundary=True))
        else:
            out.append(CoordinateStatus(SatisfactionKind.UNSATISFIED, vj))
    return out


def all_satisfied(p: VIProblem, x: Array, tol: Tolerances = DEFAULT_TOL) -> bool:
    return all(s.satisfied for s in classify_all(p, x, tol))


def vi_gap(p: VIProblem, x: Array) -> float:
    """max over y in the box of V(x)^T (y - x).

    Zero exactly when every coordinate is satisfied: a positive V_j
    contributes V_j (1 - x_j), a negative one |V_j| x_j.
    """
    x = np.asarray(x, dtype=float)
    v = p.evaluate_v(x)
    return float(np.sum(np.where(v > 0, v * (1.0 - x), -v * x)))


def progress_residual(p: VIProblem, x: Array) -> float:
    """max over y in the box of V(x)^T (x - y).

    Measures how much feasible motion remains along the field: a coordinate
    contributes nothing only when V_j = 0 or the point sits on the face V_j
    points away from. Used as the solver's continuation test; it is positive
    at boundary rest points the dynamics can still leave and agrees with
    ``vi_gap`` (both zero) at interior equilibria.
    """
    x = np.asarray(x, dtype=float)
    v = p.evaluate_v(x)
    return float(np.sum(np.where(v > 0, v * x, -v * (1.0 - x))))


def is_approx_solution(p: VIProblem, x: Array, alpha: float) -> bool:
    """True iff vi_gap(p, x) <= alpha."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return vi_gap(p, x) <= alpha


def _central_jacobian(fn: Callable[[Array], Array], x: Array, h: float) -> Array:
    n = x.size
    out = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        lo_ok = x[k] - h >= 0.0
        hi_ok = x[k] + h <= 1.0
        if lo_ok and hi_ok:
            out[:, k] = (fn(x + e) - fn(x - e)) / (2.0 * h)
        elif hi_ok:
            out[:, k] = (fn(x + e) - fn(x)) / h
        else:
            out[:, k] = (fn(x) - fn(x - e)) / h
    return out


def finite_diff_jacobian(p: VIProblem, x: Array, h: float = 1e-6) -> Array:
    """Difference approximation of the Jacobian, column k = dV/dx_k.

    Central differences in the interior; one-sided within h of a face.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    return _central_jacobian(p.evaluate_v, np.asarray(x, dtype=float), h)


def estimate_constants(p: VIProblem, seed: int = 0,
                       samples: int = 200) -> tuple[float, float]:
    """Sampled estimates of the Lipschitz constant of V and of J.

    Reporting only; max of difference quotients over random point pairs.
    """
    rng = np.random.default_rng(seed)
    lam = 0.0
    smooth = 0.0
    for _ in range(samples):
        a = rng.uniform(0, 1, p.n)
        b = rng.uniform(0, 1, p.n)
        dist = float(np.linalg.norm(a - b))
        if dist < 1e-12:
            continue
        lam = max(lam, float(np.linalg.norm(p.evaluate_v(a) - p.evaluate_v(b))) / dist)
        smooth = max(smooth, float(np.linalg.norm(
            p.evaluate_jacobian(a) - p.evaluate_jacobian(b), ord="fro")) / dist)
    return lam, smooth
