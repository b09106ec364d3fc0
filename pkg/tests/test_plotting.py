import numpy as np
import pytest

import clqr
from clqr.enumeration import alg1_baseline
from clqr.errors import DimensionMismatch
from clqr.plotting import (
    counter_curves_csv,
    partition_svg,
    polygon_vertices,
    regions_csv,
)
from clqr.serialize import partition_to_dict


@pytest.fixture(scope="module")
def partition2(qp2):
    m_sets, _ = alg1_baseline(qp2)
    law = clqr.build_pwa(qp2, m_sets, metadata={})
    return partition_to_dict(law, extra={"n": 2, "m": 1})


def test_polygon_vertices_unit_box():
    C = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    d = np.array([1.0, 1.0, 1.0, 1.0])
    V = polygon_vertices(C, d)
    assert V.shape == (4, 2)
    # counterclockwise order with unit area contribution per quadrant
    area = 0.0
    for i in range(4):
        x1, y1 = V[i]
        x2, y2 = V[(i + 1) % 4]
        area += 0.5 * (x1 * y2 - x2 * y1)
    assert area == pytest.approx(4.0)


def test_polygon_vertices_triangle_with_redundant_row():
    C = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0], [1.0, 0.0]])
    d = np.array([0.0, 0.0, 1.0, 5.0])
    V = polygon_vertices(C, d)
    assert V.shape == (3, 2)


def test_polygon_vertices_requires_2d():
    with pytest.raises(DimensionMismatch):
        polygon_vertices(np.eye(3), np.ones(3))


def test_partition_svg_structure(partition2):
    svg = partition_svg(partition2)
    assert svg.startswith("<svg")
    assert svg.count("<polygon") == len(partition2["regions"])
    assert "#ffffff" in svg  # interior fill present around the origin


def test_partition_svg_rejects_3d():
    fake = {"horizon": 1, "regions": [{"C": [[1.0, 0.0, 0.0]], "d": [1.0],
                                       "stage_classification": "interior"}]}
    with pytest.raises(DimensionMismatch):
        partition_svg(fake)


def test_regions_csv(partition2):
    text = regions_csv(partition2)
    lines = text.splitlines()
    assert lines[0].startswith("region,stage_classification,active_set")
    assert len(lines) == 1 + len(partition2["regions"])


def test_counter_curves_csv():
    rows = [{"N": 1, "candidates": 10, "optimality_lps": 4},
            {"N": 2, "candidates": 20, "optimality_lps": 6, "algorithm": "baseline"}]
    text = counter_curves_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "algorithm,N,metric,value"
    assert "dp,1,candidates,10" in lines
    assert "baseline,2,optimality_lps,6" in lines
