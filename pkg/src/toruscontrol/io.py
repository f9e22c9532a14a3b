"""JSON/CSV serialization with exact rational round-trips.

Rationals are written as "p/q" strings (or "p" for integers) so that field
files re-parse to exactly equal values; floats only appear where the data
is inherently numeric (ensembles, controls, trajectories).
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import IO

from .closure import (
    FULL_LATTICE,
    PLANAR_DEGENERATE,
    T3_DEGENERATE,
    UNCLASSIFIED,
    ClosureDescriptor,
    ModeSpanTable,
)
from .dynamics import ControlSignal, EnsemblePath, Segment
from .ensemble import EnsembleState
from .lattice import LatticeSubgroup
from .trigfield import CoeffPair, TrigField, trig_field


def _rat(x: Fraction) -> str:
    return str(x)


def _parse_rat(s) -> Fraction:
    return Fraction(s)


def field_to_dict(f: TrigField) -> dict:
    return {
        "dim": f.dim,
        "constant": [_rat(c) for c in f.constant],
        "terms": [
            {
                "mode": list(m),
                "a": [_rat(x) for x in pair.a],
                "b": [_rat(x) for x in pair.b],
            }
            for m, pair in sorted(f.terms.items())
        ],
    }


def field_from_dict(data: dict) -> TrigField:
    dim = int(data["dim"])
    terms = [
        (
            tuple(int(x) for x in t["mode"]),
            [_parse_rat(x) for x in t["a"]],
            [_parse_rat(x) for x in t["b"]],
        )
        for t in data.get("terms", [])
    ]
    constant = [_parse_rat(x) for x in data.get("constant", [0] * dim)]
    return trig_field(dim, terms, constant)


def ensemble_to_dict(e: EnsembleState) -> dict:
    return {"dim": e.dim, "points": [list(p) for p in e.points]}


def ensemble_from_dict(data: dict) -> EnsembleState:
    return EnsembleState.of(data["points"])


def control_to_dict(c: ControlSignal) -> dict:
    return {
        "segments": [
            {"dt": s.duration, "u": list(s.u), "alpha": s.alpha} for s in c.segments
        ]
    }


def control_from_dict(data: dict) -> ControlSignal:
    segs = tuple(
        Segment(float(s["dt"]), tuple(float(x) for x in s["u"]), float(s.get("alpha", 1.0)))
        for s in data["segments"]
    )
    return ControlSignal(segs)


def lattice_to_dict(g: LatticeSubgroup) -> dict:
    return {
        "dim": g.dim,
        "basis": [list(b) for b in g.basis],
        "rank": g.rank,
        "index": g.index if g.index is not None else "infinite",
    }


def descriptor_to_dict(c: ClosureDescriptor) -> dict:
    out: dict = {"kind": c.kind, "dim": c.dim}
    if c.kind == FULL_LATTICE:
        out["lattice"] = lattice_to_dict(c.lattice)
    elif c.kind == PLANAR_DEGENERATE:
        out["modes"] = sorted(list(m) for m in c.modes)
    elif c.kind == T3_DEGENERATE:
        out["orbits"] = [
            {
                "mode": list(m),
                "a": [_rat(x) for x in pair.a],
                "b": [_rat(x) for x in pair.b],
            }
            for m, pair in sorted(c.orbits.items())
        ]
    return out


def descriptor_from_dict(data: dict) -> ClosureDescriptor:
    kind = data["kind"]
    dim = int(data["dim"])
    if kind == FULL_LATTICE:
        basis = tuple(tuple(int(x) for x in row) for row in data["lattice"]["basis"])
        return ClosureDescriptor(kind, dim, lattice=LatticeSubgroup(dim, basis))
    if kind == PLANAR_DEGENERATE:
        return ClosureDescriptor(
            kind, dim, modes=frozenset(tuple(int(x) for x in m) for m in data["modes"])
        )
    if kind == T3_DEGENERATE:
        orbits = {
            tuple(int(x) for x in o["mode"]): CoeffPair(
                tuple(_parse_rat(x) for x in o["a"]),
                tuple(_parse_rat(x) for x in o["b"]),
            )
            for o in data["orbits"]
        }
        return ClosureDescriptor(kind, dim, orbits=orbits)
    if kind == UNCLASSIFIED:
        return ClosureDescriptor(kind, dim)
    raise ValueError(f"unknown closure kind {kind!r}")


def table_to_dict(t: ModeSpanTable) -> dict:
    return {
        "dim": t.dim,
        "inner_box": t.box,
        "stabilized": t.stabilized,
        "constants": [[_rat(x) for x in row] for row in t.constants],
        "modes": [
            {"mode": list(m), "basis": [[_rat(x) for x in row] for row in t.table[m]]}
            for m in sorted(t.table)
        ],
    }


def table_from_dict(data: dict) -> ModeSpanTable:
    table = ModeSpanTable(int(data["dim"]), int(data["inner_box"]), stabilized=bool(data["stabilized"]))
    table.constants = [tuple(_parse_rat(x) for x in row) for row in data["constants"]]
    for entry in data["modes"]:
        mode = tuple(int(x) for x in entry["mode"])
        table.table[mode] = [tuple(_parse_rat(x) for x in row) for row in entry["basis"]]
    return table


def dump_json(data: dict, fp: IO[str]) -> None:
    json.dump(data, fp, indent=2, sort_keys=True)
    fp.write("\n")


def load_json(fp: IO[str]) -> dict:
    return json.load(fp)


def write_json(path: str, data: dict) -> None:
    with open(path, "w") as fp:
        dump_json(data, fp)


def read_json(path: str) -> dict:
    with open(path) as fp:
        return load_json(fp)


def write_trajectory_csv(path: str, traj: EnsemblePath, dim: int) -> None:
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        n_pts = traj.states[0].shape[0]
        header = ["t"]
        for i in range(n_pts):
            header.extend(f"x{i}_{ax}" for ax in range(dim))
        writer.writerow(header)
        for t, state in zip(traj.times, traj.states):
            row = [f"{t:.12g}"]
            row.extend(f"{v:.12g}" for v in state.reshape(-1))
            writer.writerow(row)
