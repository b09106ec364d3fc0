"""Solver orchestration shared by the HTTP service and the CLI."""

from __future__ import annotations

import numpy as np

from .condense import condense
from .enumeration import alg1_baseline, alg4_dp
from .model import Ocp
from .regions import build_pwa, evaluate
from .serialize import partition_from_dict, partition_to_dict

ALGORITHMS = ("dp", "baseline", "both")


def _dp_rows(result, n_max):
    rows = []
    for rec in result.history:
        c = rec.counters.as_dict()
        rows.append({"N": rec.horizon, "candidates": c["candidates"],
                     "pruning_tests": c["pruning_tests"],
                     "rank_tests": c["rank_tests"],
                     "optimality_lps": c["optimality_lps"],
                     "feasibility_lps": c["feasibility_lps"],
                     "S_size": rec.s_size})
    # final row carries the filter cost and the partition size
    final = result.counters.as_dict()
    rows[-1].update({"candidates": final["candidates"],
                     "pruning_tests": final["pruning_tests"],
                     "rank_tests": final["rank_tests"],
                     "optimality_lps": final["optimality_lps"],
                     "feasibility_lps": final["feasibility_lps"],
                     "M_size": len(result.m_sets)})
    # after finite determination no further work is done: the trace is flat
    last = rows[-1]
    for n in range(result.n_reached + 1, n_max + 1):
        rows.append(dict(last, N=n))
    return rows


def _baseline_rows(ocp: Ocp, n_max: int):
    rows = []
    last_m = None
    for n in range(1, n_max + 1):
        qp = condense(ocp, n)
        m_sets, counters = alg1_baseline(qp)
        c = counters.as_dict()
        rows.append({"N": n, "candidates": c["candidates"],
                     "pruning_tests": c["pruning_tests"],
                     "rank_tests": c["rank_tests"],
                     "optimality_lps": c["optimality_lps"],
                     "feasibility_lps": c["feasibility_lps"],
                     "S_size": "", "M_size": len(m_sets)})
        last_m = (m_sets, qp)
    return rows, last_m


def solve_problem(ocp: Ocp, algorithm: str, n_max: int, seed: int = 0) -> dict:
    """Run the requested algorithm(s) and package partition + counter rows."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    dp_result = None
    base_last = None
    rows = []
    if algorithm in ("dp", "both"):
        dp_result = alg4_dp(ocp, n_max)
        dp_rows = _dp_rows(dp_result, n_max)
        if algorithm == "both":
            for r in dp_rows:
                r["algorithm"] = "dp"
        rows.extend(dp_rows)
    if algorithm in ("baseline", "both"):
        base_rows, base_last = _baseline_rows(ocp, n_max)
        if algorithm == "both":
            for r in base_rows:
                r["algorithm"] = "baseline"
        rows.extend(base_rows)

    if dp_result is not None:
        m_sets, qp = dp_result.m_sets, dp_result.qp
        n_reached = dp_result.n_reached
        finitely_determined = dp_result.finitely_determined
    else:
        m_sets, qp = base_last
        n_reached = n_max
        finitely_determined = False  # the baseline cannot certify this

    algorithms_agree = None
    if algorithm == "both":
        algorithms_agree = frozenset(dp_result.m_sets) == frozenset(base_last[0])

    law = build_pwa(qp, m_sets, metadata={
        "algorithm": algorithm,
        "n_reached": n_reached,
        "finitely_determined": finitely_determined,
        "seed": seed,
        "counters": (dp_result.counters.as_dict() if dp_result is not None
                     else rows[-1]),
    })
    partition = partition_to_dict(law, extra={
        "n": qp.n, "m": qp.m,
        "n_reached": n_reached,
        "finitely_determined": finitely_determined,
    })
    if algorithms_agree is not None:
        partition["algorithms_agree"] = algorithms_agree
    return {
        "partition": partition,
        "counter_rows": rows,
        "n_reached": n_reached,
        "finitely_determined": finitely_determined,
        "algorithms_agree": algorithms_agree,
    }


def evaluate_partition(partition: dict, x) -> dict:
    law = partition_from_dict(partition)
    u = evaluate(law, np.asarray(x, dtype=float))
    if u is None:
        return {"feasible": False, "u": None}
    return {"feasible": True, "u": [float(v) for v in u]}
