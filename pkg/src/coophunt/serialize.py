"""CSV and JSON writers with matching readers.

Floats are written with ``repr`` (shortest round-trip form), so reading a file
back reproduces the in-memory values exactly.  CSV files are UTF-8 with a
header row and LF line endings; each JSON file is a single document.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .bifurcation import (
    Axis,
    BifurcationDiagram,
    CriticalKind,
    CriticalPoint,
    FateMap,
    SweepPoint,
)
from .equilibria import Equilibrium, EquilibriumKind
from .integrate import Event, EventKind, Fate, IntegratorConfig, Trajectory
from .model import ModelParams
from .stability import (
    BoundaryStabilityReport,
    BoundaryVerdict,
    ClassifiedEquilibrium,
    EigenPair,
    StabilityClass,
    StabilityLabel,
)

TRAJECTORY_COLUMNS = ("t", "u", "v")
DIAGRAM_COLUMNS = ("value", "index", "branch", "u", "v", "class", "max_re_lambda")
FATE_COLUMNS = ("x", "y", "fate")


def _num(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path, header):
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        got = tuple(next(r))
        if got != tuple(header):
            raise ValueError(f"{path}: expected columns {header}, found {got}")
        return [row for row in r]


def dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# trajectories

def write_trajectory_csv(traj: Trajectory, path):
    _write_csv(path, TRAJECTORY_COLUMNS,
               ([_num(t), _num(u), _num(v)] for t, (u, v) in zip(traj.times, traj.states)))


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    rows = _read_csv(path, TRAJECTORY_COLUMNS)
    data = np.array([[float(x) for x in row] for row in rows]).reshape(-1, 3)
    return data[:, 0], data[:, 1:]


def trajectory_to_dict(traj: Trajectory, params: ModelParams, cfg: IntegratorConfig) -> dict:
    return {
        "params": params.as_dict(),
        "config": cfg.as_dict(),
        "times": [float(t) for t in traj.times],
        "states": [[float(u), float(v)] for u, v in traj.states],
        "events": [{"time": e.time, "kind": e.kind.value} for e in traj.events],
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "clamped_steps": traj.clamped_steps,
    }


def trajectory_from_dict(doc: dict) -> tuple[Trajectory, ModelParams, IntegratorConfig]:
    traj = Trajectory(
        times=np.array(doc["times"], dtype=float),
        states=np.array(doc["states"], dtype=float).reshape(-1, 2),
        events=[Event(e["time"], EventKind(e["kind"])) for e in doc["events"]],
        accepted_steps=doc["accepted_steps"],
        rejected_steps=doc["rejected_steps"],
        clamped_steps=doc["clamped_steps"],
    )
    return traj, ModelParams(**doc["params"]), IntegratorConfig(**doc["config"])


def write_trajectory_json(traj, params, cfg, path):
    dump_json(trajectory_to_dict(traj, params, cfg), path)


def read_trajectory_json(path):
    return trajectory_from_dict(load_json(path))


# equilibria and stability

def equilibrium_to_dict(e: Equilibrium) -> dict:
    return {
        "u": e.u, "v": e.v, "kind": e.kind.value, "residual": e.residual,
        "out_of_quadrant": e.out_of_quadrant, "coincident": e.coincident, "tangency": e.tangency,
    }


def equilibrium_from_dict(d: dict) -> Equilibrium:
    return Equilibrium(d["u"], d["v"], EquilibriumKind(d["kind"]), d["residual"],
                       d["out_of_quadrant"], d["coincident"], d["tangency"])


def _class_to_dict(c: StabilityClass | None):
    return None if c is None else {"label": c.label.value, "hyperbolic": c.hyperbolic}


def _class_from_dict(d) -> StabilityClass | None:
    return None if d is None else StabilityClass(StabilityLabel(d["label"]), d["hyperbolic"])


def classified_to_dict(ce: ClassifiedEquilibrium) -> dict:
    eig = None
    if ce.eigen is not None:
        eig = [[lam.real, lam.imag] for lam in ce.eigen]
    return {
        "equilibrium": equilibrium_to_dict(ce.equilibrium),
        "eigenvalues": eig,
        "max_re_lambda": None if ce.eigen is None else ce.eigen.max_real_part,
        "stability": _class_to_dict(ce.stability),
        "prey_slope": ce.prey_slope,
        "empirical": ce.empirical,
    }


def classified_from_dict(d: dict) -> ClassifiedEquilibrium:
    eig = None
    if d["eigenvalues"] is not None:
        eig = EigenPair(*(complex(re, im) for re, im in d["eigenvalues"]))
    return ClassifiedEquilibrium(equilibrium_from_dict(d["equilibrium"]), eig,
                                 _class_from_dict(d["stability"]), d["prey_slope"], d["empirical"])


def _verdict_to_dict(b: BoundaryVerdict) -> dict:
    return {
        "u": b.u, "growth": b.growth, "trace": b.trace, "det": b.det,
        "closed_form_stable": b.closed_form_stable,
        "closed_form": _class_to_dict(b.closed_form),
        "numeric": _class_to_dict(b.numeric),
        "out_of_quadrant": b.out_of_quadrant,
    }


def _verdict_from_dict(d: dict) -> BoundaryVerdict:
    return BoundaryVerdict(d["u"], d["growth"], d["trace"], d["det"], d["closed_form_stable"],
                           _class_from_dict(d["closed_form"]), _class_from_dict(d["numeric"]),
                           d["out_of_quadrant"])


def boundary_to_dict(r: BoundaryStabilityReport) -> dict:
    return {"carrying": _verdict_to_dict(r.carrying), "allee": _verdict_to_dict(r.allee)}


def boundary_from_dict(d: dict) -> BoundaryStabilityReport:
    return BoundaryStabilityReport(_verdict_from_dict(d["carrying"]), _verdict_from_dict(d["allee"]))


# bifurcation diagrams

def diagram_to_dict(diag: BifurcationDiagram) -> dict:
    return {
        "target": diag.target,
        "grid": list(diag.grid),
        "points": [
            {
                "value": p.value,
                "params": p.params.as_dict(),
                "interior": [classified_to_dict(ce) for ce in p.interior],
                "branches": list(p.branches),
                "boundary": boundary_to_dict(p.boundary),
            }
            for p in diag.points
        ],
        "critical_points": [
            {"value": c.value, "kind": c.kind.value, "lo": c.lo, "hi": c.hi, "branch": c.branch}
            for c in diag.critical_points
        ],
    }


def diagram_from_dict(doc: dict) -> BifurcationDiagram:
    points = tuple(
        SweepPoint(
            p["value"], ModelParams(**p["params"]),
            tuple(classified_from_dict(ce) for ce in p["interior"]),
            tuple(p["branches"]), boundary_from_dict(p["boundary"]),
        )
        for p in doc["points"]
    )
    crit = tuple(
        CriticalPoint(c["value"], CriticalKind(c["kind"]), c["lo"], c["hi"], c["branch"])
        for c in doc["critical_points"]
    )
    return BifurcationDiagram(doc["target"], tuple(doc["grid"]), points, crit)


def diagram_rows(diag: BifurcationDiagram) -> list[tuple]:
    """Long-format rows: one per (grid value, interior equilibrium)."""
    rows = []
    for p in diag.points:
        for i, (ce, br) in enumerate(zip(p.interior, p.branches)):
            e = ce.equilibrium
            rows.append((p.value, i, br, e.u, e.v, ce.stability.label.value, ce.eigen.max_real_part))
    return rows


def write_diagram_csv(diag: BifurcationDiagram, path):
    _write_csv(path, DIAGRAM_COLUMNS,
               ([_num(x), str(i), str(br), _num(u), _num(v), cls, _num(m)]
                for x, i, br, u, v, cls, m in diagram_rows(diag)))


def read_diagram_csv(path) -> list[tuple]:
    return [
        (float(x), int(i), int(br), float(u), float(v), cls, float(m))
        for x, i, br, u, v, cls, m in _read_csv(path, DIAGRAM_COLUMNS)
    ]


def write_diagram_json(diag, path):
    dump_json(diagram_to_dict(diag), path)


def read_diagram_json(path) -> BifurcationDiagram:
    return diagram_from_dict(load_json(path))


# fate maps

def _axis_to_dict(a: Axis) -> dict:
    return {"target": a.target, "lo": a.lo, "hi": a.hi, "steps": a.steps}


def fate_map_to_dict(fm: FateMap) -> dict:
    return {
        "x_axis": _axis_to_dict(fm.x_axis),
        "y_axis": _axis_to_dict(fm.y_axis),
        "init": list(fm.init),
        "base": fm.base.as_dict(),
        "fates": [[f.value for f in row] for row in fm.fates],
    }


def fate_map_from_dict(doc: dict) -> FateMap:
    return FateMap(
        Axis(**doc["x_axis"]), Axis(**doc["y_axis"]), tuple(doc["init"]),
        ModelParams(**doc["base"]),
        tuple(tuple(Fate(f) for f in row) for row in doc["fates"]),
    )


def fate_map_rows(fm: FateMap) -> list[tuple]:
    xs, ys = fm.x_axis.grid(), fm.y_axis.grid()
    return [(xs[ix], ys[iy], fm.fates[iy][ix].value)
            for iy in range(len(ys)) for ix in range(len(xs))]


def write_fate_map_csv(fm: FateMap, path):
    _write_csv(path, FATE_COLUMNS, ([_num(x), _num(y), f] for x, y, f in fate_map_rows(fm)))


def read_fate_map_csv(path) -> list[tuple]:
    return [(float(x), float(y), f) for x, y, f in _read_csv(path, FATE_COLUMNS)]


def write_fate_map_json(fm, path):
    dump_json(fate_map_to_dict(fm), path)


def read_fate_map_json(path) -> FateMap:
    return fate_map_from_dict(load_json(path))
