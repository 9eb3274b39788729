"""Reference first- and second-order methods for comparison runs.

The methods iterate in problem units with projection onto the problem box;
eta therefore acts at the scale the objectives are written in. Update rules
are the standard ones from the min-max literature:

* gda   u+ = P(u + eta V(u))
* eg    u+ = P(u + eta V(u + eta V(u)))
* ogda  u+ = P(u + eta (2 V(u) - V(u_prev))), bootstrapped with u_prev = u
* ftr   gradient descent on the minimizing block; the maximizing block adds
        a damped second-order correction steering it toward its local argmax

V here is the problem-unit field (gradient with the minimizing sign flip).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import MAX_STEPS, Row, SOLVED, Trajectory, _domain_tuple
from .vi import Array, BoxDomain, MinMaxObjective, Role, VIProblem, vi_gap

BASELINE_KINDS = ("gda", "eg", "ogda", "ftr")


class SingularCorrection(Exception):
    pass


@dataclass(frozen=True)
class BaselineMethod:
    """Method selector with step size and budget.

    ``alpha`` is the gap threshold for early termination; None runs the full
    budget regardless (used when the point of the run is the trajectory).
    """

    kind: str
    eta: float = 1e-2
    damping: float = 1e-6  # ftr only
    budget: int = 100_000
    alpha: Optional[float] = 1e-3

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline {self.kind!r}; choose from {BASELINE_KINDS}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.damping < 0:
            raise ValueError("damping must be nonnegative")
        if self.budget < 1:
            raise ValueError("budget must be positive")


@dataclass
class BaselineState:
    """Iterate in problem units, plus the previous field value for ogda."""

    u: Array
    v_prev: Optional[Array] = None


def _problem_field(p: VIProblem):
    w = p.domain.width

    def v(u: Array) -> Array:
        return p.evaluate_v(p.domain.to_unit(u)) / w

    return v


def _ftr_step(obj: MinMaxObjective, domain: BoxDomain, u: Array,
              m: BaselineMethod) -> Array:
    grad = np.asarray(obj.gradient(u), dtype=float)
    hess = np.asarray(obj.hessian(u), dtype=float)
    mins = np.array([r is Role.MIN for r in obj.roles])
    maxs = ~mins
    g_min = grad[mins]
    h_ww = hess[np.ix_(maxs, maxs)]
    h_wt = hess[np.ix_(maxs, mins)]
    sys = h_ww + m.damping * np.eye(int(maxs.sum()))
    try:
        corr = np.linalg.solve(sys, h_wt @ g_min)
    except np.linalg.LinAlgError as err:
        raise SingularCorrection(
            "the maximizing-block Hessian is singular; rerun with a positive "
            "damping value") from err
    out = np.array(u, dtype=float, copy=True)
    out[mins] -= m.eta * g_min
    out[maxs] += m.eta * (grad[maxs] + corr)
    return np.clip(out, domain.lower, domain.upper)


def baseline_step(p: VIProblem, state: BaselineState, m: BaselineMethod,
                  obj: Optional[MinMaxObjective] = None) -> BaselineState:
    """One projected update in problem units; ftr needs the objective."""
    u = np.asarray(state.u, dtype=float)
    lo, hi = p.domain.lower, p.domain.upper
    field = _problem_field(p)
    if m.kind == "gda":
        return BaselineState(np.clip(u + m.eta * field(u), lo, hi))
    if m.kind == "eg":
        half = u + m.eta * field(u)
        return BaselineState(np.clip(u + m.eta * field(half), lo, hi))
    if m.kind == "ogda":
        v = field(u)
        prev = state.v_prev if state.v_prev is not None else v
        return BaselineState(np.clip(u + m.eta * (2.0 * v - prev), lo, hi), v_prev=v)
    if obj is None or obj.hessian is None:
        raise ValueError("ftr needs a MinMaxObjective with a Hessian")
    return BaselineState(_ftr_step(obj, p.domain, u, m))


def run_baseline(p: VIProblem, m: BaselineMethod, init: Array,
                 obj: Optional[MinMaxObjective] = None,
                 record_every: int = 1) -> Trajectory:
    """Iterate from a problem-unit initial point until solved or budget.

    The trajectory format matches the ridge solver's (epoch and i stay 0);
    the V columns carry the normalized field at each recorded point.
    """
    lower, upper = _domain_tuple(p)
    u = np.asarray(init, dtype=float)
    if np.any(u < p.domain.lower) or np.any(u > p.domain.upper):
        raise ValueError(f"init {u.tolist()} lies outside the domain")
    state = BaselineState(u)
    rows: list[Row] = []

    def record(step, uq, event):
        xq = p.domain.to_unit(uq)
        rows.append(Row(step, 0, 0, 0, event, tuple(uq.tolist()),
                        tuple(float(c) for c in p.evaluate_v(xq))))

    status = MAX_STEPS
    step = 0
    for step in range(m.budget):
        if m.alpha is not None and vi_gap(p, p.domain.to_unit(state.u)) <= m.alpha:
            status = SOLVED
            break
        if step % record_every == 0:
            record(step, state.u, "")
        state = baseline_step(p, state, m, obj=obj)
    else:
        step = m.budget
    record(step, state.u, "solved" if status == SOLVED else "budget")
    return Trajectory(n=p.n, problem=p.name, method=m.kind,
                      domain_lower=lower, domain_upper=upper,
                      rows=rows, status=status)
