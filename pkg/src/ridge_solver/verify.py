"""Empirical validation: regularity assumptions, pivots, and path diagnostics.

These checks are the measurable side of the convergence argument: restricted
Jacobians keep full rank along ridges, at most one support coordinate touches
a face at a time, null directions have nonzero components on face
coordinates, every epoch starts at a pivot, pivots never repeat, and each leg
can be retraced backward to its predecessor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .direction import (DirectionError, EpochState, compute_direction,
                        restricted_rows)
from .dynamics import EXITED, SolverConfig, Trajectory, derive_epoch, run_backward
from .vi import (Array, DEFAULT_TOL, SatisfactionKind, Tolerances, VIProblem,
                 classify_all)

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"


@dataclass
class AssumptionReport:
    """Per-assumption status with reproducible witnesses.

    The rank assumption is evaluated in both forms: the square S x S block
    and the full restricted rows including column i. The worked bilinear
    example has a singular square block on its ridge while the restricted
    form keeps rank, so only the restricted form gates ``passed``.
    """

    statuses: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    sample_count: int = 0
    sigma_min: Optional[float] = None
    sigma_max: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(self.statuses.get(k, NOT_APPLICABLE) != FAIL
                   for k in ("a1_restricted", "a2", "a3"))

    def to_dict(self) -> dict:
        return {"statuses": dict(self.statuses),
                "witnesses": {k: list(v) for k, v in self.witnesses.items()},
                "sample_count": self.sample_count,
                "sigma_min": self.sigma_min, "sigma_max": self.sigma_max,
                "passed": self.passed}


def check_assumptions(p: VIProblem, samples: Iterable[tuple[Array, Sequence[int], int]],
                      tol: float = 1e-8, qualify_zero: float = 1e-3) -> AssumptionReport:
    """Evaluate the three regularity assumptions on (x, S, i) samples.

    A sample qualifies for the boundary checks when its S coordinates are
    zero within ``qualify_zero`` and every off-support coordinate sits on a
    face. Reports, never raises.
    """
    report = AssumptionReport(statuses={k: NOT_APPLICABLE for k in
                                        ("a1_square", "a1_restricted", "a2", "a3")},
                              witnesses={k: [] for k in
                                         ("a1_square", "a1_restricted", "a2", "a3")})
    sig_lo, sig_hi = np.inf, 0.0

    def raise_to(key, status):
        order = {NOT_APPLICABLE: 0, PASS: 1, FAIL: 2}
        if order[status] > order[report.statuses[key]]:
            report.statuses[key] = status

    for x, s, i in samples:
        x = np.asarray(x, dtype=float)
        e = EpochState(int(i), tuple(int(j) for j in s))
        report.sample_count += 1
        jac = p.evaluate_jacobian(x)
        m = len(e.S)
        if m > 0:
            rows = [j - 1 for j in e.S]
            square = jac[np.ix_(rows, rows)]
            sq_sv = np.linalg.svd(square, compute_uv=False)
            if sq_sv[-1] <= tol:
                raise_to("a1_square", FAIL)
                report.witnesses["a1_square"].append(
                    {"x": x.tolist(), "S": list(e.S), "i": e.i,
                     "sigma": float(sq_sv[-1])})
            else:
                raise_to("a1_square", PASS)
            b = restricted_rows(p, x, e)
            sv = np.linalg.svd(b, compute_uv=False)
            sig_lo = min(sig_lo, float(sv[-1]))
            sig_hi = max(sig_hi, float(sv[0]))
            if sv[-1] <= tol:
                raise_to("a1_restricted", FAIL)
                report.witnesses["a1_restricted"].append(
                    {"x": x.tolist(), "S": list(e.S), "i": e.i,
                     "sigma": float(sv[-1])})
            else:
                raise_to("a1_restricted", PASS)

        v = p.evaluate_v(x)
        ridge_ok = all(abs(v[j - 1]) <= qualify_zero for j in e.S)
        off = [j for j in range(1, p.n + 1) if j not in e.support]
        pinned_ok = all(x[j - 1] <= DEFAULT_TOL.boundary
                        or x[j - 1] >= 1.0 - DEFAULT_TOL.boundary for j in off)
        if not (ridge_ok and pinned_ok):
            continue
        on_face = [j for j in e.support
                   if x[j - 1] <= DEFAULT_TOL.boundary
                   or x[j - 1] >= 1.0 - DEFAULT_TOL.boundary]
        if len(on_face) > 1:
            raise_to("a2", FAIL)
            report.witnesses["a2"].append(
                {"x": x.tolist(), "S": list(e.S), "i": e.i, "on_face": on_face})
        else:
            raise_to("a2", PASS)
        if on_face:
            try:
                d = compute_direction(p, x, e).d
            except DirectionError:
                continue  # rank failure already witnessed under a1
            small = [j for j in on_face if abs(d[j - 1]) <= tol]
            if small:
                raise_to("a3", FAIL)
                report.witnesses["a3"].append(
                    {"x": x.tolist(), "S": list(e.S), "i": e.i,
                     "zero_components": small,
                     "d": [float(d[j - 1]) for j in on_face]})
            else:
                raise_to("a3", PASS)

    if np.isfinite(sig_lo):
        report.sigma_min, report.sigma_max = sig_lo, sig_hi
    return report


def collect_samples(p: VIProblem, traj: Trajectory, cfg: SolverConfig,
                    seed: int = 0, n_ridge: int = 20) -> list[tuple[Array, tuple, int]]:
    """Epoch-start and exit samples from a run, plus Newton-found ridge points."""
    out: list[tuple[Array, tuple, int]] = []
    for leg in traj.legs():
        for pt in (leg.start, leg.end):
            x = p.domain.to_unit(np.asarray(pt))
            if leg.state.i <= p.n:
                out.append((x, leg.state.S, leg.state.i))
    rng = np.random.default_rng(seed)
    for _ in range(n_ridge):
        if p.n < 2:
            break
        i = int(rng.integers(2, p.n + 1))
        size = int(rng.integers(1, i))
        s = tuple(sorted(rng.choice(np.arange(1, i), size=size, replace=False).tolist()))
        z = rng.uniform(0.05, 0.95, p.n)
        rows = [j - 1 for j in s]
        ok = False
        for _ in range(30):
            vs = p.evaluate_v(z)[rows]
            if np.max(np.abs(vs)) <= 1e-9:
                ok = True
                break
            b = p.evaluate_jacobian(z)[rows, :]
            try:
                z = z - b.T @ np.linalg.solve(b @ b.T, vs)
            except np.linalg.LinAlgError:
                break
            if np.any(z < 0) or np.any(z > 1):
                break
        if ok and np.all(z >= 0) and np.all(z <= 1):
            out.append((z, s, i))
    return out


@dataclass(frozen=True)
class PivotCheck:
    """Verdict of the three pivot conditions at a point.

    Bullet 1: every unsatisfied coordinate has positive field value.
    Bullet 2: coordinates above the least unsatisfied one are still at zero.
    Bullet 3: some coordinate among the zero set and the least unsatisfied
    one touches a face. A point with nothing unsatisfied passes vacuously.
    """

    point: tuple[float, ...]
    ell: Optional[int]
    zero_set: tuple[int, ...]
    is_pivot: bool
    failing_bullets: tuple[int, ...]

    @property
    def first_failing(self) -> Optional[int]:
        return self.failing_bullets[0] if self.failing_bullets else None


def detect_pivot(p: VIProblem, x: Array, tol: Tolerances = DEFAULT_TOL) -> PivotCheck:
    """Evaluate the pivot conditions at x (normalized coordinates)."""
    x = np.asarray(x, dtype=float)
    statuses = classify_all(p, x, tol)
    unsat = [j for j in range(1, p.n + 1) if not statuses[j - 1].satisfied]
    failing: list[int] = []
    if not unsat:
        return PivotCheck(tuple(x.tolist()), None, (), True, ())
    if any(statuses[j - 1].value <= 0 for j in unsat):
        failing.append(1)
    ell = min(unsat)
    if any(x[j - 1] > tol.boundary for j in range(ell + 1, p.n + 1)):
        failing.append(2)
    zero_set = tuple(j for j in range(1, ell)
                     if statuses[j - 1].kind is SatisfactionKind.ZERO_SATISFIED)
    candidates = zero_set + (ell,)
    if not any(x[j - 1] <= tol.boundary or x[j - 1] >= 1.0 - tol.boundary
               for j in candidates):
        failing.append(3)
    return PivotCheck(tuple(x.tolist()), ell, zero_set,
                      not failing, tuple(failing))


def enumerate_pivots(p: VIProblem, resolution: float = 1e-3,
                     tol: Tolerances = DEFAULT_TOL) -> list[tuple[float, ...]]:
    """Grid-enumerate the pivots of a 2-d problem.

    Exhaustive scan at the given resolution; the finiteness of this set in
    the exact-arithmetic sense is not checkable, but on the built-ins the
    enumeration recovers exactly the points the solver pivots through.
    """
    if p.n != 2:
        raise ValueError("pivot enumeration is implemented for n=2 only")
    ticks = np.linspace(0.0, 1.0, int(round(1.0 / resolution)) + 1)
    out = []
    for a in ticks:
        for b in ticks:
            x = np.array([a, b])
            if detect_pivot(p, x, tol).is_pivot:
                out.append((float(a), float(b)))
    return out


@dataclass
class ParityReport:
    """Results of the five path-structure checks on one trajectory."""

    checks: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {"checks": self.checks, "all_passed": self.all_passed}


def _leg_sign(p: VIProblem, leg, cfg: SolverConfig) -> int:
    """Orientation a leg was traversed with, from its last recorded chord."""
    if leg.prev is None:
        return 1
    end = p.domain.to_unit(np.asarray(leg.end))
    prev = p.domain.to_unit(np.asarray(leg.prev))
    chord = end - prev
    if float(np.linalg.norm(chord)) < 1e-15:
        return 1
    try:
        d = compute_direction(p, np.clip(end, 0, 1), leg.state).d
    except DirectionError:
        return 1
    return 1 if float(chord @ d) >= 0 else -1


def parity_diagnostics(p: VIProblem, traj: Trajectory,
                       cfg: SolverConfig) -> ParityReport:
    """Five checks on a recorded run.

    (a) every epoch-start point (and the terminal point) is a pivot;
    (b) epoch-start tuples (i, S, x rounded to 1e-6) never repeat;
    (c) each leg, integrated backward from its end point with its epoch,
        lands within 5 gamma of its start;
    (d) integrating backward from the origin with epoch (1, {}) leaves the
        box within one step, so the start node has no predecessor;
    (e) the pair (i, S) recomputed from each epoch-start point equals the
        pair the run maintained.
    """
    report = ParityReport()
    tol = cfg.tol
    legs = traj.legs()

    pivot_witnesses = []
    starts = [leg.start for leg in legs]
    terminal = [traj.rows[-1].x] if traj.rows else []
    for pt in starts + terminal:
        x = p.domain.to_unit(np.asarray(pt))
        chk = detect_pivot(p, x, tol)
        if not chk.is_pivot:
            pivot_witnesses.append({"x": list(pt), "failing": list(chk.failing_bullets)})
    report.checks["pivot_at_epoch_starts"] = {
        "passed": not pivot_witnesses, "witnesses": pivot_witnesses}

    seen = {}
    repeats = []
    for leg in legs:
        x = p.domain.to_unit(np.asarray(leg.start))
        key = (leg.state.i, leg.state.S, tuple(np.round(x, 6).tolist()))
        if key in seen:
            repeats.append({"i": leg.state.i, "S": list(leg.state.S),
                            "x": list(leg.start)})
        seen[key] = True
    report.checks["no_repetition"] = {"passed": not repeats, "witnesses": repeats}

    bw_witnesses = []
    for leg in legs:
        start = p.domain.to_unit(np.asarray(leg.start))
        end = p.domain.to_unit(np.asarray(leg.end))
        sign = _leg_sign(p, leg, cfg)
        bw = run_backward(p, end, leg.state, cfg, sign=sign)
        final = p.domain.to_unit(np.asarray(bw.final_x))
        dist = float(np.linalg.norm(final - start))
        if bw.status != EXITED or dist > 5.0 * cfg.gamma:
            bw_witnesses.append({"i": leg.state.i, "S": list(leg.state.S),
                                 "start": list(leg.start), "landed": list(bw.final_x),
                                 "distance": dist, "status": bw.status})
    report.checks["backward_consistency"] = {
        "passed": not bw_witnesses, "witnesses": bw_witnesses}

    bw0 = run_backward(p, np.zeros(p.n), EpochState(1, ()), cfg)
    steps0 = bw0.rows[-1].step if bw0.rows else 0
    source_ok = bw0.status == EXITED and steps0 <= 1
    report.checks["origin_source"] = {
        "passed": source_ok,
        "witnesses": [] if source_ok else [{"status": bw0.status, "steps": steps0}]}

    pair_witnesses = []
    for leg in legs:
        x = p.domain.to_unit(np.asarray(leg.start))
        try:
            derived = derive_epoch(p, x, cfg)
            ok = derived == leg.state
            info = {"derived": [derived.i, list(derived.S)]}
        except DirectionError as err:
            ok = False
            info = {"error": str(err)}
        if not ok:
            pair_witnesses.append({"maintained": [leg.state.i, list(leg.state.S)],
                                   "x": list(leg.start), **info})
    report.checks["pair_agreement"] = {
        "passed": not pair_witnesses, "witnesses": pair_witnesses}

    return report
