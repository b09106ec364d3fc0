"""Figure-data emission: 2-D partition SVG and counter-curve CSVs."""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import DimensionMismatch
from .regions import INTERIOR, LAST_STAGE_ACTIVE, TERMINAL_ACTIVE

_FILL = {
    TERMINAL_ACTIVE: "#b0b0b0",
    LAST_STAGE_ACTIVE: "#7da7d9",
    INTERIOR: "#ffffff",
}
# draw order: gray underneath, white on top of nothing relevant (regions are
# disjoint, order only matters for shared edges)
_ORDER = {TERMINAL_ACTIVE: 0, LAST_STAGE_ACTIVE: 1, INTERIOR: 2}


def polygon_vertices(C: np.ndarray, d: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Vertices of a bounded 2-D polytope, ordered counterclockwise."""
    if C.shape[1] != 2:
        raise DimensionMismatch("vertex enumeration implemented for 2-D only")
    pts = []
    r = len(d)
    for i in range(r):
        for j in range(i + 1, r):
            M = np.vstack([C[i], C[j]])
            if abs(np.linalg.det(M)) < 1e-10:
                continue
            p = np.linalg.solve(M, np.array([d[i], d[j]]))
            if np.all(C @ p <= d + tol):
                pts.append(p)
    if not pts:
        return np.zeros((0, 2))
    pts = np.asarray(pts)
    center = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0])
    pts = pts[np.argsort(ang)]
    # drop near-duplicate vertices
    keep = [0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - pts[keep[-1]]) > 1e-7:
            keep.append(i)
    if len(keep) > 1 and np.linalg.norm(pts[keep[-1]] - pts[keep[0]]) <= 1e-7:
        keep.pop()
    return pts[keep]


def partition_svg(partition: dict, width: int = 720) -> str:
    """SVG rendering of a 2-D partition with the three-way stage coloring."""
    regions = partition["regions"]
    if regions and len(regions[0]["C"][0]) != 2:
        raise DimensionMismatch("SVG export requires a 2-dimensional state space")
    polys = []
    for reg in regions:
        V = polygon_vertices(np.array(reg["C"], dtype=float), np.array(reg["d"], dtype=float))
        if len(V) >= 3:
            polys.append((reg["stage_classification"], V))
    if not polys:
        return ('<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10">'
                "<desc>empty partition</desc></svg>\n")
    allv = np.vstack([V for _, V in polys])
    lo = allv.min(axis=0)
    hi = allv.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    pad = 0.03 * span.max()
    lo -= pad
    hi += pad
    span = hi - lo
    height = int(round(width * span[1] / span[0]))

    def to_px(p):
        x = (p[0] - lo[0]) / span[0] * width
        y = height - (p[1] - lo[1]) / span[1] * height
        return f"{x:.2f},{y:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<desc>explicit solution partition, horizon {partition['horizon']}</desc>",
    ]
    for cls, V in sorted(polys, key=lambda t: _ORDER.get(t[0], 3)):
        pts = " ".join(to_px(p) for p in V)
        parts.append(
            f'<polygon points="{pts}" fill="{_FILL.get(cls, "#ffffff")}" '
            'stroke="#303030" stroke-width="0.6"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def regions_csv(partition: dict) -> str:
    """Flat CSV of region data for state dimensions other than 2."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["region", "stage_classification", "active_set", "C", "d",
                     "gain", "offset"])
    for i, reg in enumerate(partition["regions"]):
        writer.writerow([
            i, reg["stage_classification"],
            " ".join(str(j) for j in reg["active_set"]),
            repr(reg["C"]), repr(reg["d"]), repr(reg["gain"]), repr(reg["offset"]),
        ])
    return buf.getvalue()


def counter_curves_csv(rows) -> str:
    """Tidy long-format curves (one row per horizon/metric/algorithm)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["algorithm", "N", "metric", "value"])
    metrics = ("candidates", "pruning_tests", "rank_tests",
               "optimality_lps", "feasibility_lps")
    for row in rows:
        alg = row.get("algorithm", "dp")
        for met in metrics:
            if met in row:
                writer.writerow([alg, row["N"], met, row[met]])
    return buf.getvalue()
