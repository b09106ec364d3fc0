"""JSON/CSV round-trip formats for problems, partitions and counter traces.

Floating-point values go through Python's shortest round-trip repr, so an
export/import cycle reproduces every number bit for bit.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .enumeration import ActiveSet
from .errors import DimensionMismatch
from .model import LinearSystem, Polytope, make_ocp
from .regions import PwaLaw, Region, classify_stage

SCHEMA_VERSION = 1

COUNTER_COLUMNS = ("N", "candidates", "pruning_tests", "rank_tests",
                   "optimality_lps", "feasibility_lps", "S_size", "M_size")


def problem_from_dict(doc: dict):
    """Build the OCP described by a schema-1 problem document."""
    if doc.get("schema") != SCHEMA_VERSION:
        raise DimensionMismatch(f"unsupported problem schema: {doc.get('schema')!r}")
    sys = LinearSystem(A=np.array(doc["A"], dtype=float),
                       B=np.array(doc["B"], dtype=float))
    U = Polytope(np.array(doc["U"]["C"], dtype=float), np.array(doc["U"]["d"], dtype=float))
    X = Polytope(np.array(doc["X"]["C"], dtype=float), np.array(doc["X"]["d"], dtype=float))
    return make_ocp(sys, U, X, np.array(doc["Q"], dtype=float), np.array(doc["R"], dtype=float))


def partition_to_dict(law: PwaLaw, extra: dict | None = None) -> dict:
    q_UX = law.metadata.get("q_UX")
    regions = []
    for reg in law.regions:
        regions.append({
            "active_set": list(reg.aset.indices),
            "C": reg.polytope.C.tolist(),
            "d": reg.polytope.d.tolist(),
            "gain": reg.gain.tolist(),
            "offset": reg.offset.tolist(),
            "stage_classification": classify_stage(reg.aset, law.horizon, q_UX),
        })
    doc = {
        "schema": SCHEMA_VERSION,
        "horizon": law.horizon,
        "regions": regions,
        "metadata": _plain(law.metadata),
    }
    if extra:
        doc.update(_plain(extra))
    return doc


def partition_from_dict(doc: dict) -> PwaLaw:
    if doc.get("schema") != SCHEMA_VERSION:
        raise DimensionMismatch(f"unsupported partition schema: {doc.get('schema')!r}")
    regions = []
    for r in doc["regions"]:
        regions.append(Region(
            aset=ActiveSet(r["active_set"]),
            polytope=Polytope(np.array(r["C"], dtype=float), np.array(r["d"], dtype=float)),
            gain=np.array(r["gain"], dtype=float),
            offset=np.array(r["offset"], dtype=float),
        ))
    return PwaLaw(horizon=int(doc["horizon"]), regions=tuple(regions),
                  metadata=dict(doc.get("metadata", {})))


def _plain(obj):
    """Recursively convert numpy containers to JSON-serializable types."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return str(obj)


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def counter_rows_to_csv(rows) -> str:
    """Rows are dicts keyed by COUNTER_COLUMNS plus an optional trailing
    ``algorithm`` column (present for two-algorithm comparison runs)."""
    rows = list(rows)
    has_alg = any("algorithm" in r for r in rows)
    cols = COUNTER_COLUMNS + (("algorithm",) if has_alg else ())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: r.get(c, "") for c in cols})
    return buf.getvalue()


def counter_rows_from_csv(text: str):
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in raw.items():
            if k == "algorithm":
                row[k] = v
            elif v not in (None, ""):
                row[k] = int(v)
        rows.append(row)
    return rows
