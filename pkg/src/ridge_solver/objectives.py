"""Built-in test problems and perturbation generators.

Four registered problems, all two-dimensional with coordinate 1 minimizing
and coordinate 2 maximizing:

* ``bilinear``   (t - 1/2)(w - 1/2) on [0,1]^2, equilibrium (1/2, 1/2)
* ``f1``         a damped quartic saddle on [-1,1]^2, equilibrium (0, 0);
                 first-order methods orbit a limit cycle around it
* ``f2``         a smooth-step-gated quadratic on [-1,1]^2, equilibrium (0,0);
                 first-order methods diverge unless started close
* ``neg_square`` -(t - w)^2 on [-1,1]^2; no equilibrium away from the
                 boundary (the whole diagonal is stationary), used as a
                 negative test

Derivatives are hand-coded and cross-checked against central differences in
the test suite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .vi import BoxDomain, MinMaxObjective, Role, VIProblem, min_max_to_vi

BUILTIN_NAMES = ("bilinear", "f1", "f2", "neg_square")


def smooth_step(t: float) -> float:
    """0 below 0, 3t^2 - 2t^3 on [0,1], 1 above 1; C1 at the junctions."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return 3.0 * t * t - 2.0 * t * t * t


def smooth_step_d1(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return 6.0 * t - 6.0 * t * t


def smooth_step_d2(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return 6.0 - 12.0 * t


def _bilinear() -> tuple[MinMaxObjective, BoxDomain]:
    def value(u):
        t, w = u
        return (t - 0.5) * (w - 0.5)

    def gradient(u):
        t, w = u
        return np.array([w - 0.5, t - 0.5])

    def hessian(u):
        return np.array([[0.0, 1.0], [1.0, 0.0]])

    obj = MinMaxObjective(value, gradient, hessian, (Role.MIN, Role.MAX), "bilinear")
    return obj, BoxDomain(np.zeros(2), np.ones(2))


def _f1() -> tuple[MinMaxObjective, BoxDomain]:
    # f = P * E with Q = w - 3t + t^3/20, P = 4t^2 - Q^2 - w^4/10,
    # E = exp(-(t^2 + w^2)/100)
    def parts(t, w):
        q = w - 3.0 * t + t ** 3 / 20.0
        p = 4.0 * t * t - q * q - w ** 4 / 10.0
        e = math.exp(-(t * t + w * w) / 100.0)
        return q, p, e

    def value(u):
        t, w = u
        _, p, e = parts(t, w)
        return p * e

    def gradient(u):
        t, w = u
        q, p, e = parts(t, w)
        qt = -3.0 + 3.0 * t * t / 20.0
        pt = 8.0 * t - 2.0 * q * qt
        pw = -2.0 * q - 0.4 * w ** 3
        return np.array([e * (pt - p * t / 50.0), e * (pw - p * w / 50.0)])

    def hessian(u):
        t, w = u
        q, p, e = parts(t, w)
        qt = -3.0 + 3.0 * t * t / 20.0
        qtt = 3.0 * t / 10.0
        pt = 8.0 * t - 2.0 * q * qt
        pw = -2.0 * q - 0.4 * w ** 3
        ptt = 8.0 - 2.0 * qt * qt - 2.0 * q * qtt
        ptw = -2.0 * qt
        pww = -2.0 - 1.2 * w * w
        gt = pt - p * t / 50.0
        gw = pw - p * w / 50.0
        ftt = e * (-(t / 50.0) * gt + ptt - (t / 50.0) * pt - p / 50.0)
        ftw = e * (-(w / 50.0) * gt + ptw - (t / 50.0) * pw)
        fww = e * (-(w / 50.0) * gw + pww - (w / 50.0) * pw - p / 50.0)
        return np.array([[ftt, ftw], [ftw, fww]])

    obj = MinMaxObjective(value, gradient, hessian, (Role.MIN, Role.MAX), "f1")
    return obj, BoxDomain(-np.ones(2), np.ones(2))


def _f2() -> tuple[MinMaxObjective, BoxDomain]:
    # f = -t w - w^2/20 + 0.1 * S((t^2 + w^2)/2) * w^2
    def value(u):
        t, w = u
        r = (t * t + w * w) / 2.0
        return -t * w - w * w / 20.0 + 0.1 * smooth_step(r) * w * w

    def gradient(u):
        t, w = u
        r = (t * t + w * w) / 2.0
        s, sp = smooth_step(r), smooth_step_d1(r)
        ft = -w + 0.1 * sp * t * w * w
        fw = -t - w / 10.0 + 0.1 * sp * w ** 3 + 0.2 * s * w
        return np.array([ft, fw])

    def hessian(u):
        t, w = u
        r = (t * t + w * w) / 2.0
        s, sp, spp = smooth_step(r), smooth_step_d1(r), smooth_step_d2(r)
        ftt = 0.1 * w * w * (spp * t * t + sp)
        ftw = -1.0 + 0.1 * t * w * (spp * w * w + 2.0 * sp)
        fww = -0.1 + 0.1 * spp * w ** 4 + 0.5 * sp * w * w + 0.2 * s
        return np.array([[ftt, ftw], [ftw, fww]])

    obj = MinMaxObjective(value, gradient, hessian, (Role.MIN, Role.MAX), "f2")
    return obj, BoxDomain(-np.ones(2), np.ones(2))


def _neg_square() -> tuple[MinMaxObjective, BoxDomain]:
    def value(u):
        t, w = u
        return -(t - w) ** 2

    def gradient(u):
        t, w = u
        return np.array([-2.0 * (t - w), 2.0 * (t - w)])

    def hessian(u):
        return np.array([[-2.0, 2.0], [2.0, -2.0]])

    obj = MinMaxObjective(value, gradient, hessian, (Role.MIN, Role.MAX), "neg_square")
    return obj, BoxDomain(-np.ones(2), np.ones(2))


_REGISTRY = {
    "bilinear": _bilinear,
    "f1": _f1,
    "f2": _f2,
    "neg_square": _neg_square,
}

# Field/Jacobian Lipschitz constants on the unit box: exact for the linear
# fields (operator norm of the constant Jacobian), sampled sup-estimates
# rounded up for f1/f2. Metadata for reports only.
_CONSTANTS = {
    "bilinear": (1.0, 0.0),
    "f1": (160.0, 1100.0),
    "f2": (11.0, 70.0),
    "neg_square": (16.0, 0.0),
}


def builtin(name: str) -> tuple[MinMaxObjective, BoxDomain]:
    """Look up a built-in objective and its domain by registry name."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {BUILTIN_NAMES}") from None
    return factory()


def builtin_problem(name: str) -> VIProblem:
    """Built-in objective reduced to a normalized VI problem, with constants."""
    obj, domain = builtin(name)
    p = min_max_to_vi(obj, domain)
    lam, smooth = _CONSTANTS[name]
    return VIProblem(n=p.n, evaluate_v=p.evaluate_v,
                     evaluate_jacobian=p.evaluate_jacobian, domain=p.domain,
                     lipschitz=lam, smoothness=smooth, name=name)


class PerturbationKind(enum.Enum):
    SINUSOIDAL_BIAS = "sinusoidal_bias"
    LINEAR_MAP = "linear_map"
    BOUNDARY_SHRINK = "boundary_shrink"


@dataclass(frozen=True)
class PerturbationSpec:
    """Seeded random perturbation of a problem.

    ``magnitude`` is the bias amplitude, the linear-map entry bound, or the
    per-face shrink bound, depending on ``kind``.
    """

    kind: PerturbationKind
    magnitude: float
    seed: int = 0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("magnitude must be nonnegative")


def perturb(p: VIProblem, spec: PerturbationSpec) -> VIProblem:
    """Apply a seeded perturbation, keeping V and J consistent."""
    rng = np.random.default_rng(spec.seed)
    n = p.n
    mag = spec.magnitude
    base_v, base_j = p.evaluate_v, p.evaluate_jacobian
    name = f"{p.name}+{spec.kind.value}" if p.name else spec.kind.value

    if spec.kind is PerturbationKind.SINUSOIDAL_BIAS:
        phases = rng.uniform(0.0, 2.0 * np.pi, n)

        def evaluate_v(x):
            return base_v(x) + mag * np.cos(np.asarray(x, dtype=float) + phases)

        def evaluate_jacobian(x):
            j = np.array(base_j(x), dtype=float, copy=True)
            j[np.diag_indices(n)] += -mag * np.sin(np.asarray(x, dtype=float) + phases)
            return j

        return VIProblem(n=n, evaluate_v=evaluate_v,
                         evaluate_jacobian=evaluate_jacobian,
                         domain=p.domain, name=name)

    if spec.kind is PerturbationKind.LINEAR_MAP:
        a = rng.uniform(-mag, mag, (n, n))

        def evaluate_v(x):
            return base_v(x) + a @ np.asarray(x, dtype=float)

        def evaluate_jacobian(x):
            return base_j(x) + a

        return VIProblem(n=n, evaluate_v=evaluate_v,
                         evaluate_jacobian=evaluate_jacobian,
                         domain=p.domain, name=name)

    # boundary shrink: restrict each coordinate to [lo_j, 1 - hi_j] and
    # renormalize that sub-box back to the unit box
    if mag >= 0.5:
        raise ValueError("boundary shrink magnitude must be < 1/2")
    lo = rng.uniform(0.0, mag, n)
    hi = rng.uniform(0.0, mag, n)
    width = 1.0 - lo - hi

    def evaluate_v(x):
        return width * base_v(lo + width * np.asarray(x, dtype=float))

    def evaluate_jacobian(x):
        return np.outer(width, width) * base_j(lo + width * np.asarray(x, dtype=float))

    inner = BoxDomain(p.domain.from_unit(lo), p.domain.from_unit(1.0 - hi))
    return VIProblem(n=n, evaluate_v=evaluate_v,
                     evaluate_jacobian=evaluate_jacobian,
                     domain=inner, name=name)
