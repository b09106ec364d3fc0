"""HTTP facade: a FastAPI app exposing solve / eval / plot.

Run with ``uvicorn clqr.service:app``.  The CLI reuses the same request and
response models and calls the handlers in-process by default.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, field_validator

from . import __version__
from .errors import ClqrError, NumericalFailure
from .plotting import counter_curves_csv, partition_svg, regions_csv
from .runner import evaluate_partition, solve_problem
from .serialize import problem_from_dict


class PolytopeModel(BaseModel):
    C: list[list[float]]
    d: list[float]


class ProblemModel(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    name: Optional[str] = None
    A: list[list[float]]
    B: list[list[float]]
    Q: list[list[float]]
    R: list[list[float]]
    U: PolytopeModel
    X: PolytopeModel

    model_config = {"populate_by_name": True}

    @field_validator("schema_version")
    @classmethod
    def _schema_supported(cls, v):
        if v != 1:
            raise ValueError(f"unsupported schema version {v}")
        return v

    def as_document(self) -> dict:
        doc = self.model_dump(by_alias=True)
        return doc


class SolveRequest(BaseModel):
    problem: ProblemModel
    algorithm: Literal["dp", "baseline", "both"] = "dp"
    n_max: int = Field(default=1, ge=1)
    seed: int = 0


class SolveResponse(BaseModel):
    partition: dict
    counter_rows: list[dict]
    n_reached: int
    finitely_determined: bool
    algorithms_agree: Optional[bool] = None


class EvalRequest(BaseModel):
    partition: dict
    x: list[float]


class EvalResponse(BaseModel):
    feasible: bool
    u: Optional[list[float]] = None


class PlotRequest(BaseModel):
    partition: dict
    counter_rows: Optional[list[dict]] = None
    format: Literal["svg", "csv"] = "svg"


class PlotResponse(BaseModel):
    svg: Optional[str] = None
    regions_csv: Optional[str] = None
    curves_csv: Optional[str] = None


app = FastAPI(title="clqr", version=__version__,
              description="Explicit solutions of constrained LQR problems "
                          "by combinatorial active-set enumeration.")


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    try:
        ocp = problem_from_dict(req.problem.as_document())
        result = solve_problem(ocp, req.algorithm, req.n_max, seed=req.seed)
    except NumericalFailure as exc:
        raise HTTPException(status_code=500,
                            detail={"code": "numerical_failure", "message": str(exc)})
    except ClqrError as exc:
        raise HTTPException(status_code=422,
                            detail={"code": "invalid_problem", "message": str(exc)})
    return SolveResponse(**result)


@app.post("/eval", response_model=EvalResponse)
def eval_point(req: EvalRequest) -> EvalResponse:
    try:
        result = evaluate_partition(req.partition, req.x)
    except (ClqrError, KeyError, ValueError) as exc:
        raise HTTPException(status_code=422,
                            detail={"code": "invalid_partition", "message": str(exc)})
    return EvalResponse(**result)


@app.post("/plot", response_model=PlotResponse)
def plot(req: PlotRequest) -> PlotResponse:
    try:
        regions = req.partition.get("regions", [])
        two_d = not regions or len(regions[0]["C"][0]) == 2
        if req.format == "svg" and not two_d:
            raise HTTPException(status_code=400,
                                detail={"code": "not_two_dimensional",
                                        "message": "SVG output requires a 2-D state space"})
        out = PlotResponse()
        if req.format == "svg":
            out.svg = partition_svg(req.partition)
        else:
            out.regions_csv = regions_csv(req.partition)
        if req.counter_rows is not None:
            out.curves_csv = counter_curves_csv(req.counter_rows)
        return out
    except HTTPException:
        raise
    except (ClqrError, KeyError, ValueError) as exc:
        raise HTTPException(status_code=422,
                            detail={"code": "invalid_partition", "message": str(exc)})
