"""Trajectory CSV and report JSON serialization.

The CSV schema is ``step,epoch,i,S,event,x1..xn,V1..Vn`` with S as a decimal
bitmask, points in problem units, and floats at 17 significant digits so a
read is the exact inverse of a write. Metadata needed to rebuild the
in-memory trajectory (status, problem, method, domain) travels in ``#``
comment lines above the header.
"""

from __future__ import annotations

import json
from pathlib import Path

from .dynamics import Row, Trajectory


class TrajectoryFormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _header(n: int) -> str:
    xs = ",".join(f"x{k}" for k in range(1, n + 1))
    vs = ",".join(f"V{k}" for k in range(1, n + 1))
    return f"step,epoch,i,S,event,{xs},{vs}"


def write_trajectory(traj: Trajectory, path) -> None:
    path = Path(path)
    lines = [
        "# schema=1",
        f"# problem={traj.problem}",
        f"# method={traj.method}",
        f"# status={traj.status}",
        f"# n={traj.n}",
        "# domain_lower=" + ",".join(_fmt(c) for c in traj.domain_lower),
        "# domain_upper=" + ",".join(_fmt(c) for c in traj.domain_upper),
        _header(traj.n),
    ]
    for r in traj.rows:
        cells = [str(r.step), str(r.epoch), str(r.i), str(r.s_mask), r.event]
        cells += [_fmt(c) for c in r.x]
        cells += [_fmt(c) for c in r.v]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    meta: dict[str, str] = {}
    rows: list[Row] = []
    header_seen = False
    n = None
    try:
        text = path.read_text()
    except OSError as err:
        raise TrajectoryFormatError(f"{path}: {err}") from err
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value
            continue
        if not header_seen:
            try:
                n = int(meta["n"])
            except (KeyError, ValueError):
                raise TrajectoryFormatError(f"{path}:{lineno}: missing '# n=' metadata")
            if line != _header(n):
                raise TrajectoryFormatError(f"{path}:{lineno}: unexpected header {line!r}")
            header_seen = True
            continue
        cells = line.split(",")
        if len(cells) != 5 + 2 * n:
            raise TrajectoryFormatError(
                f"{path}:{lineno}: expected {5 + 2 * n} fields, got {len(cells)}")
        try:
            rows.append(Row(int(cells[0]), int(cells[1]), int(cells[2]),
                            int(cells[3]), cells[4],
                            tuple(float(c) for c in cells[5:5 + n]),
                            tuple(float(c) for c in cells[5 + n:5 + 2 * n])))
        except ValueError as err:
            raise TrajectoryFormatError(f"{path}:{lineno}: {err}") from err
    if not header_seen:
        raise TrajectoryFormatError(f"{path}: no header line found")
    for key in ("problem", "method", "status", "domain_lower", "domain_upper"):
        if key not in meta:
            raise TrajectoryFormatError(f"{path}: missing '# {key}=' metadata")
    return Trajectory(
        n=n, problem=meta["problem"], method=meta["method"],
        domain_lower=tuple(float(c) for c in meta["domain_lower"].split(",")),
        domain_upper=tuple(float(c) for c in meta["domain_upper"].split(",")),
        rows=rows, status=meta["status"])


def write_report(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
