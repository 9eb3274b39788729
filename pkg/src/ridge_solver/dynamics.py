"""Discrete ridge-following dynamics with event-driven epochs.

The solver walks the unit box from the origin in epochs (i, S): Euler steps
of size gamma along the oriented tangent of the ridge {V_S = 0}, holding
every other coordinate fixed, until one of three events fires at the
projected iterate:

* good      coordinate i became (almost) satisfied,
* bad       a moving coordinate is about to leave the box,
* middling  a pinned coordinate below i is about to become unsatisfied,

after which (i, S) is updated and a new epoch starts. The loop continues
while the stationarity residual ``progress_residual`` exceeds alpha.

Two refinements keep the discrete walk on the guarantees of the continuous
dynamics: an optional Gauss-Newton correction pulls each iterate back onto
the ridge, and a sign change of V_i across one step is located by bisection
so a steep field cannot jump the epsilon detection band.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .direction import (AllFrozen, AllSatisfied, Direction, DirectionError,
                        EpochState, compute_direction, ideal_direction)
from .vi import Array, Tolerances, VIProblem, progress_residual, vi_gap

log = logging.getLogger("ridge_solver")

SOLVED = "solved"
MAX_EPOCHS = "max_epochs"
MAX_STEPS = "max_steps"
ASSUMPTION_VIOLATION = "assumption_violation"
EXITED = "exited"  # backward runs only

GOOD = "good"
BAD = "bad"
MIDDLING = "middling"


class CorrectionDiverged(DirectionError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Step size, event tolerances, and budgets for one run."""

    gamma: float = 1e-3
    epsilon: float = 1e-3
    alpha: float = 1e-3
    ridge_correction: bool = True
    correction_tol: Optional[float] = None  # defaults to epsilon / 10
    max_epochs: int = 10_000
    max_steps_per_epoch: Optional[int] = None  # defaults to min(1e7/gamma, 1e8)
    record_every: int = 1

    def __post_init__(self):
        if self.gamma <= 0 or self.epsilon <= 0 or self.alpha <= 0:
            raise ValueError("gamma, epsilon and alpha must be positive")
        if self.correction_tol is None:
            object.__setattr__(self, "correction_tol", self.epsilon / 10.0)
        if self.correction_tol >= self.epsilon:
            raise ValueError("correction_tol must be below epsilon")
        if self.max_steps_per_epoch is None:
            object.__setattr__(self, "max_steps_per_epoch",
                               int(min(1e7 / self.gamma, 1e8)))
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def tol(self) -> Tolerances:
        """Classification tolerances at the run's working epsilon."""
        return Tolerances(zero=self.epsilon)


@dataclass(frozen=True)
class ExitEvent:
    """Which event fired, where, and for which coordinate.

    ``zero_satisfied`` is set for good events (|V_i| within epsilon versus a
    pressed boundary); ``j`` for bad and middling events.
    """

    kind: str
    point: Array
    j: Optional[int] = None
    zero_satisfied: Optional[bool] = None
    warnings: tuple[str, ...] = ()

    @property
    def tag(self) -> str:
        if self.kind == GOOD:
            return "good_zero" if self.zero_satisfied else "good_boundary"
        return f"{self.kind}:{self.j}"


class Row(NamedTuple):
    """One recorded trajectory sample (x in problem units)."""

    step: int
    epoch: int
    i: int
    s_mask: int
    event: str
    x: tuple[float, ...]
    v: tuple[float, ...]


@dataclass(frozen=True)
class Leg:
    """A maximal run of rows sharing one epoch."""

    epoch: int
    state: EpochState
    start: tuple[float, ...]
    end: tuple[float, ...]
    prev: Optional[tuple[float, ...]]  # penultimate recorded point
    steps: int
    event: str


@dataclass
class Trajectory:
    """Time-ordered record of a run, in problem units."""

    n: int
    problem: str
    method: str
    domain_lower: tuple[float, ...]
    domain_upper: tuple[float, ...]
    rows: list[Row]
    status: str
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def final_x(self) -> tuple[float, ...]:
        if self.rows:
            return self.rows[-1].x
        return self.domain_lower  # runs start at the lower corner

    @property
    def steps(self) -> int:
        return self.rows[-1].step if self.rows else 0

    def legs(self, positive_only: bool = True) -> list[Leg]:
        """Group rows by epoch; positive_only drops zero-step transitions.

        Baseline trajectories (i recorded as 0) have no epoch structure and
        yield no legs.
        """
        out: list[Leg] = []
        k = 0
        while k < len(self.rows):
            j = k
            while j + 1 < len(self.rows) and self.rows[j + 1].epoch == self.rows[k].epoch:
                j += 1
            first, last = self.rows[k], self.rows[j]
            if first.i == 0:
                k = j + 1
                continue
            leg = Leg(epoch=first.epoch,
                      state=EpochState.from_bitmask(first.i, first.s_mask),
                      start=first.x, end=last.x,
                      prev=self.rows[j - 1].x if j > k else None,
                      steps=last.step - first.step, event=last.event)
            if leg.steps > 0 or not positive_only:
                out.append(leg)
            k = j + 1
        return out

    def epoch_sequence(self) -> list[tuple[int, tuple[int, ...]]]:
        """(i, S) of each positive-duration leg, in order."""
        return [(leg.state.i, leg.state.S) for leg in self.legs()]


def euler_step(p: VIProblem, z: Array, e: EpochState, cfg: SolverConfig,
               sign: int = 1) -> Array:
    """One explicit step z + gamma * D, then the ridge correction when on.

    The result is not projected; projection happens at exit detection.
    """
    d = compute_direction(p, z, e)
    out = np.asarray(z, dtype=float) + cfg.gamma * sign * d.d
    if cfg.ridge_correction and e.S:
        out = ridge_correction(p, out, e, cfg)
    return out


def ridge_correction(p: VIProblem, z: Array, e: EpochState,
                     cfg: SolverConfig) -> Array:
    """Pull z back onto {V_S = 0} within the support plane.

    At most 5 Gauss-Newton iterations on the restricted rows; total movement
    capped at gamma. Raises CorrectionDiverged when the residual grows or
    stays above epsilon.
    """
    if not e.S:
        return np.asarray(z, dtype=float)
    z = np.array(z, dtype=float, copy=True)
    rows = [j - 1 for j in e.S]
    cols = [j - 1 for j in e.support]
    resid = float(np.max(np.abs(p.evaluate_v(z)[rows])))
    if resid <= cfg.correction_tol:
        return z
    moved = 0.0
    prev = resid
    for _ in range(5):
        b = p.evaluate_jacobian(z)[np.ix_(rows, cols)]
        vs = p.evaluate_v(z)[rows]
        try:
            delta = -b.T @ np.linalg.solve(b @ b.T, vs)
        except np.linalg.LinAlgError as err:
            raise CorrectionDiverged(f"singular correction system at z={z.tolist()}") from err
        norm = float(np.linalg.norm(delta))
        if moved + norm > cfg.gamma:
            delta *= max(cfg.gamma - moved, 0.0) / norm
        z[cols] += delta
        moved += float(np.linalg.norm(delta))
        resid = float(np.max(np.abs(p.evaluate_v(z)[rows])))
        if resid <= cfg.correction_tol:
            return z
        if resid > prev * (1.0 + 1e-9):
            raise CorrectionDiverged(
                f"ridge residual grew from {prev:.3e} to {resid:.3e} at z={z.tolist()}")
        prev = resid
        if moved >= cfg.gamma:
            break
    if resid <= cfg.epsilon:
        return z
    raise CorrectionDiverged(
        f"ridge residual {resid:.3e} still above epsilon after correction")


def detect_exit(p: VIProblem, xp: Array, e: EpochState, cfg: SolverConfig,
                d: Optional[Array] = None) -> Optional[ExitEvent]:
    """Evaluate the exit conditions at a projected point, good before bad
    before middling; ties within a kind pick the smallest coordinate and are
    recorded as warnings.

    ``d`` is the direction the dynamics is actually traveling (pass the
    negated field for reversed legs); computed fresh when omitted.
    """
    xp = np.asarray(xp, dtype=float)
    tol = cfg.tol
    v = p.evaluate_v(xp)
    vi = float(v[e.i - 1])
    xi = xp[e.i - 1]

    if abs(vi) <= cfg.epsilon:
        return ExitEvent(GOOD, xp, zero_satisfied=True)
    if xi <= tol.boundary and vi < cfg.epsilon:
        return ExitEvent(GOOD, xp, zero_satisfied=False)
    if xi >= 1.0 - tol.boundary and vi > -cfg.epsilon:
        return ExitEvent(GOOD, xp, zero_satisfied=False)

    if d is None:
        d = compute_direction(p, xp, e).d
    warnings: tuple[str, ...] = ()

    bad = [j for j in e.support
           if (d[j - 1] > tol.direction_zero and xp[j - 1] >= 1.0 - tol.boundary)
           or (d[j - 1] < -tol.direction_zero and xp[j - 1] <= tol.boundary)]
    if bad:
        if len(bad) > 1:
            warnings = (f"multiple bad coordinates {bad} at x={xp.tolist()}",)
        return ExitEvent(BAD, xp, j=min(bad), warnings=warnings)

    pinned = [j for j in range(1, e.i) if j not in e.S
              and (xp[j - 1] <= tol.boundary or xp[j - 1] >= 1.0 - tol.boundary)]
    if pinned:
        v_ahead = p.evaluate_v(xp + cfg.gamma * d)
        mid = [j for j in pinned
               if (xp[j - 1] <= tol.boundary and v_ahead[j - 1] > 0.0)
               or (xp[j - 1] >= 1.0 - tol.boundary and v_ahead[j - 1] < 0.0)]
        if mid:
            if len(mid) > 1:
                warnings = (f"multiple middling coordinates {mid} at x={xp.tolist()}",)
            return ExitEvent(MIDDLING, xp, j=min(mid), warnings=warnings)
    return None


def epoch_transition(e: EpochState, ev: ExitEvent) -> EpochState:
    """Next (i, S) after an exit event at epoch e."""
    if ev.kind == GOOD:
        s = e.S + (e.i,) if ev.zero_satisfied else e.S
        return EpochState(e.i + 1, s)
    if ev.kind == BAD:
        if ev.j == e.i:
            if e.i == 1:
                raise AllFrozen("bad exit on coordinate 1: the dynamics left the box "
                                "from the first epoch, which the convergence argument "
                                "rules out")
            return EpochState(e.i - 1, tuple(j for j in e.S if j != e.i - 1))
        return EpochState(e.i, tuple(j for j in e.S if j != ev.j))
    return EpochState(e.i, e.S + (ev.j,))


def derive_epoch(p: VIProblem, x: Array, cfg: SolverConfig) -> EpochState:
    """Recompute (i, S) from the point alone, at the run's tolerances.

    Uses the frozen-coordinate rule when some coordinate is unsatisfied.
    Otherwise every coordinate presses into its face yet the stationarity
    residual may still be positive; the smallest coordinate with |V_j| above
    epsilon and residual contribution above alpha/n is examined instead, with
    the pruned zero set of its ideal direction.
    """
    from .direction import admissible_pair  # local to avoid cycle in docs

    x = np.asarray(x, dtype=float)
    tol = cfg.tol
    try:
        return admissible_pair(p, x, tol)
    except AllSatisfied:
        pass
    v = p.evaluate_v(x)
    # worst of the two per-coordinate stationarity contributions
    contrib = np.abs(v) * np.maximum(x, 1.0 - x)
    cands = [j for j in range(1, p.n + 1)
             if abs(v[j - 1]) > cfg.epsilon and contrib[j - 1] > cfg.alpha / p.n]
    if not cands:
        raise AllSatisfied(f"no stationarity-active coordinate at x={x.tolist()}")
    ell = min(cands)
    _, s = ideal_direction(p, x, ell, tol)
    return EpochState(ell, s)


def _outward_blocked(xp: Array, d: Array, e: EpochState, tol: Tolerances) -> bool:
    """True when following d immediately pushes a support coordinate out."""
    for j in e.support:
        if (d[j - 1] > tol.direction_zero and xp[j - 1] >= 1.0 - tol.boundary) or \
           (d[j - 1] < -tol.direction_zero and xp[j - 1] <= tol.boundary):
            return True
    return False


def _bisect_band(p: VIProblem, z_lo: Array, z_hi: Array, anchor_sign: float,
                 e: EpochState, cfg: SolverConfig, coord: Optional[int] = None,
                 target: Optional[float] = None) -> Array:
    """Locate a V_coord zero crossing on the chord between two iterates."""
    coord = e.i if coord is None else coord
    target = 0.5 * cfg.epsilon if target is None else target
    lo = np.array(z_lo, dtype=float)
    hi = np.array(z_hi, dtype=float)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if cfg.ridge_correction and e.S:
            try:
                mid = ridge_correction(p, mid, e, cfg)
            except CorrectionDiverged:
                pass
        vm = float(p.evaluate_v(np.clip(mid, 0.0, 1.0))[coord - 1])
        if abs(vm) <= target:
            return mid
        if np.sign(vm) == anchor_sign:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _refine_middling(p: VIProblem, xp: Array, d: Array, j: int, e: EpochState,
                     cfg: SolverConfig) -> Array:
    """Advance a middling exit to the point where V_j actually vanishes.

    The lookahead fires up to one step before the crossing; at the exit the
    triggering coordinate is both on its face and zero-satisfied (down to the
    exact classification tolerance), so the next epoch can legitimately add
    it to S.
    """
    target = Tolerances().zero
    vj = float(p.evaluate_v(xp)[j - 1])
    if abs(vj) <= target:
        return xp
    refined = _bisect_band(p, xp, xp + cfg.gamma * d, np.sign(vj), e, cfg,
                           coord=j, target=target)
    return np.clip(refined, 0.0, 1.0)


def _domain_tuple(p: VIProblem) -> tuple[tuple[float, ...], tuple[float, ...]]:
    return tuple(p.domain.lower.tolist()), tuple(p.domain.upper.tolist())


def run_stonr(p: VIProblem, cfg: SolverConfig = SolverConfig()) -> Trajectory:
    """Run the full epoch state machine from the box's lower corner.

    Terminates with status ``solved`` once both stationarity measures (the
    satisfaction gap and the progress residual) drop to alpha, or with a
    budget / assumption-violation status. Every recorded point lies in the
    box (projection before recording).
    """
    n = p.n
    tol = cfg.tol
    lower, upper = _domain_tuple(p)
    rows: list[Row] = []
    warnings: list[str] = []

    def record(step, epoch, e, xp, v, event):
        rows.append(Row(step, epoch, e.i, e.bitmask, event,
                        tuple(p.domain.from_unit(xp).tolist()),
                        tuple(float(c) for c in v)))

    def finish(status):
        return Trajectory(n=n, problem=p.name, method="stonr",
                          domain_lower=lower, domain_upper=upper,
                          rows=rows, status=status, warnings=tuple(warnings))

    x = np.zeros(n)
    e = EpochState(1, ())
    sign = 1
    rearmed = False
    step = 0
    instant_streak = 0

    for epoch_idx in range(cfg.max_epochs):
        # both stationarity measures must vanish: the satisfaction gap is
        # blind at faces the field presses out of, the progress residual at
        # faces it presses into
        if progress_residual(p, x) <= cfg.alpha and vi_gap(p, x) <= cfg.alpha:
            return finish(SOLVED)
        if e.i > n:
            try:
                e = derive_epoch(p, x, cfg)
                d0 = compute_direction(p, x, e).d
            except DirectionError as err:
                warnings.append(str(err))
                record(step, epoch_idx, e, x, p.evaluate_v(x), "violation")
                return finish(ASSUMPTION_VIOLATION)
            sign = -1 if _outward_blocked(x, d0, e, tol) else 1
            if sign < 0:
                log.info("epoch (%d, %s) re-armed with reversed orientation at %s",
                         e.i, e.S, x)
            rearmed = True

        z = x.copy()
        vi_prev: Optional[float] = None
        z_prev: Optional[Array] = None
        exited = False

        for k in range(cfg.max_steps_per_epoch):
            xp = np.clip(z, 0.0, 1.0)
            try:
                d = sign * compute_direction(p, xp, e).d
                vi_now = float(p.evaluate_v(xp)[e.i - 1])
                if (vi_prev is not None and abs(vi_now) > cfg.epsilon
                        and abs(vi_prev) > cfg.epsilon
                        and np.sign(vi_now) != np.sign(vi_prev)):
                    z = _bisect_band(p, z_prev, z, np.sign(vi_prev), e, cfg)
                    xp = np.clip(z, 0.0, 1.0)
                    d = sign * compute_direction(p, xp, e).d
                ev = None
                if not (rearmed and k == 0):
                    ev = detect_exit(p, xp, e, cfg, d=d)
            except DirectionError as err:
                warnings.append(str(err))
                record(step, epoch_idx, e, xp, p.evaluate_v(xp), "violation")
                return finish(ASSUMPTION_VIOLATION)

            if ev is not None:
                warnings.extend(ev.warnings)
                if ev.kind == MIDDLING:
                    xp = _refine_middling(p, xp, d, ev.j, e, cfg)
                record(step, epoch_idx, e, xp, p.evaluate_v(xp), ev.tag)
                try:
                    e = epoch_transition(e, ev)
                except AllFrozen as err:
                    warnings.append(str(err))
                    return finish(ASSUMPTION_VIOLATION)
                x = xp
                sign = 1
                rearmed = False
                instant_streak = instant_streak + 1 if k == 0 else 0
                if instant_streak > 4 * n + 8:
                    warnings.append(f"zero-length epoch cycle at x={xp.tolist()}")
                    return finish(ASSUMPTION_VIOLATION)
                exited = True
                break

            if k % cfg.record_every == 0:
                record(step, epoch_idx, e, xp, p.evaluate_v(xp), "")
            z_prev = z.copy()
            vi_prev = vi_now
            try:
                if np.array_equal(z, xp):
                    z = z + cfg.gamma * d
                    if cfg.ridge_correction and e.S:
                        z = ridge_correction(p, z, e, cfg)
                else:
                    z = euler_step(p, z, e, cfg, sign=sign)
            except DirectionError as err:
                warnings.append(str(err))
                record(step, epoch_idx, e, xp, p.evaluate_v(xp), "violation")
                return finish(ASSUMPTION_VIOLATION)
            step += 1
        if not exited:
            xp = np.clip(z, 0.0, 1.0)
            record(step, epoch_idx, e, xp, p.evaluate_v(xp), "budget")
            return finish(MAX_STEPS)

    return finish(MAX_EPOCHS)


def run_backward(p: VIProblem, start: Array, e: EpochState,
                 cfg: SolverConfig = SolverConfig(), sign: int = 1) -> Trajectory:
    """Integrate z <- z - gamma * sign * D until a reversed event fires.

    Only the bad and middling conditions are evaluated (against the reversed
    travel direction); the good condition does not involve the direction and
    would fire immediately at any successor point. Diagnostic use only.
    """
    lower, upper = _domain_tuple(p)
    rows: list[Row] = []
    z = np.array(start, dtype=float)
    tol = cfg.tol

    def record(step, xp, v, event):
        rows.append(Row(step, 0, e.i, e.bitmask, event,
                        tuple(p.domain.from_unit(xp).tolist()),
                        tuple(float(c) for c in v)))

    for k in range(cfg.max_steps_per_epoch):
        xp = np.clip(z, 0.0, 1.0)
        d_back = -sign * compute_direction(p, xp, e).d
        event = ""
        bad = [j for j in e.support
               if (d_back[j - 1] > tol.direction_zero and xp[j - 1] >= 1.0 - tol.boundary)
               or (d_back[j - 1] < -tol.direction_zero and xp[j - 1] <= tol.boundary)]
        if bad:
            event = f"{BAD}:{min(bad)}"
        else:
            pinned = [j for j in range(1, e.i) if j not in e.S
                      and (xp[j - 1] <= tol.boundary or xp[j - 1] >= 1.0 - tol.boundary)]
            if pinned:
                v_ahead = p.evaluate_v(xp + cfg.gamma * d_back)
                mid = [j for j in pinned
                       if (xp[j - 1] <= tol.boundary and v_ahead[j - 1] > 0.0)
                       or (xp[j - 1] >= 1.0 - tol.boundary and v_ahead[j - 1] < 0.0)]
                if mid:
                    event = f"{MIDDLING}:{min(mid)}"
        if event or k % cfg.record_every == 0:
            record(k, xp, p.evaluate_v(xp), event)
        if event:
            return Trajectory(n=p.n, problem=p.name, method="backward",
                              domain_lower=lower, domain_upper=upper,
                              rows=rows, status=EXITED)
        z = z + cfg.gamma * d_back
        if cfg.ridge_correction and e.S:
            try:
                z = ridge_correction(p, z, e, cfg)
            except CorrectionDiverged:
                pass
    return Trajectory(n=p.n, problem=p.name, method="backward",
                      domain_lower=lower, domain_upper=upper,
                      rows=rows, status=MAX_STEPS)
