"""Command-line front end.

The CLI is a thin client of the HTTP service: every command builds the same
request models the service accepts and either posts them to a remote server
(``--server``) or calls the service handlers in-process.

Exit codes: 2 for schema/input errors, 3 for numerical failures,
4 when SVG output is requested for a non-planar state space.
"""

from __future__ import annotations

import json
import os
import sys

import click
import pydantic

from .errors import NumericalFailure
from .serialize import counter_rows_from_csv, counter_rows_to_csv, dumps_json
from . import service

EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3
EXIT_NOT_2D = 4

_SEED_ENV = "DPMPQP_SEED"


def _default_seed() -> int:
    raw = os.environ.get(_SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise click.exceptions.Exit(EXIT_SCHEMA)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _call(server: str | None, path: str, handler, request_model):
    """Dispatch a request either to a remote server or in-process."""
    if server:
        import httpx

        resp = httpx.post(server.rstrip("/") + path,
                          json=request_model.model_dump(by_alias=True),
                          timeout=None)
        if resp.status_code >= 400:
            detail = resp.json().get("detail", {})
            code = detail.get("code") if isinstance(detail, dict) else None
            if code == "numerical_failure":
                _fail(EXIT_NUMERICAL, detail.get("message", "numerical failure"))
            if code == "not_two_dimensional":
                _fail(EXIT_NOT_2D, detail.get("message", "state space is not 2-D"))
            _fail(EXIT_SCHEMA, str(detail))
        return resp.json()
    try:
        return handler(request_model).model_dump()
    except NumericalFailure as exc:
        _fail(EXIT_NUMERICAL, str(exc))
    except service.HTTPException as exc:
        detail = exc.detail if isinstance(exc.detail, dict) else {"message": str(exc.detail)}
        if detail.get("code") == "numerical_failure":
            _fail(EXIT_NUMERICAL, detail.get("message", "numerical failure"))
        if detail.get("code") == "not_two_dimensional":
            _fail(EXIT_NOT_2D, detail.get("message", "state space is not 2-D"))
        _fail(EXIT_SCHEMA, detail.get("message", "invalid input"))


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_SCHEMA, f"cannot read {path}: {exc}")


@click.group()
def main():
    """Explicit constrained-LQR solver."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Problem description (JSON, schema 1).")
@click.option("--algorithm", type=click.Choice(["dp", "baseline", "both"]), default="dp")
@click.option("--n-max", type=int, required=True, help="Horizon cap (>= 1).")
@click.option("--out-partition", required=True, type=click.Path())
@click.option("--out-counters", required=True, type=click.Path())
@click.option("--seed", type=int, default=None,
              help=f"Sampling seed recorded in the output (default 0 or ${_SEED_ENV}).")
@click.option("--server", default=None, help="Base URL of a running clqr service.")
def solve(input_path, algorithm, n_max, out_partition, out_counters, seed, server):
    """Compute the explicit solution and write partition + counter trace."""
    doc = _load_json(input_path)
    seed = _default_seed() if seed is None else seed
    try:
        req = service.SolveRequest(problem=doc, algorithm=algorithm,
                                   n_max=n_max, seed=seed)
    except pydantic.ValidationError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    result = _call(server, "/solve", service.solve, req)
    with open(out_partition, "w") as fh:
        fh.write(dumps_json(result["partition"]))
    with open(out_counters, "w") as fh:
        fh.write(counter_rows_to_csv(result["counter_rows"]))
    click.echo(f"N_reached={result['n_reached']} "
               f"finitely_determined={str(result['finitely_determined']).lower()}")
    if result.get("algorithms_agree") is not None:
        click.echo(f"algorithms_agree={str(result['algorithms_agree']).lower()}")


@main.command("eval")
@click.option("--partition", "partition_path", required=True, type=click.Path(exists=True))
@click.option("--x", "x_text", required=True, help="Comma-separated state vector.")
@click.option("--server", default=None)
def eval_cmd(partition_path, x_text, server):
    """Evaluate the explicit control law at a state."""
    partition = _load_json(partition_path)
    try:
        x = [float(v) for v in x_text.split(",") if v.strip() != ""]
    except ValueError:
        _fail(EXIT_SCHEMA, f"malformed state vector {x_text!r}")
    n = partition.get("n")
    if n is not None and len(x) != n:
        _fail(EXIT_SCHEMA, f"state vector has {len(x)} entries, expected {n}")
    try:
        req = service.EvalRequest(partition=partition, x=x)
    except pydantic.ValidationError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    result = _call(server, "/eval", service.eval_point, req)
    if not result["feasible"]:
        click.echo("infeasible")
    else:
        click.echo(" ".join(repr(v) for v in result["u"]))


@main.command()
@click.option("--partition", "partition_path", required=True, type=click.Path(exists=True))
@click.option("--counters", "counters_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Partition figure: .svg for 2-D states, .csv otherwise.")
@click.option("--out-curves", "curves_path", default=None, type=click.Path(),
              help="Counter-vs-horizon curves (long-format CSV).")
@click.option("--server", default=None)
def plot(partition_path, counters_path, out_path, curves_path, server):
    """Emit partition figure data and counter curves."""
    partition = _load_json(partition_path)
    rows = None
    if counters_path:
        with open(counters_path) as fh:
            rows = counter_rows_from_csv(fh.read())
    fmt = "svg" if out_path.lower().endswith(".svg") else "csv"
    try:
        req = service.PlotRequest(partition=partition, counter_rows=rows, format=fmt)
    except pydantic.ValidationError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    result = _call(server, "/plot", service.plot, req)
    with open(out_path, "w") as fh:
        fh.write(result["svg"] if fmt == "svg" else result["regions_csv"])
    if curves_path:
        if result.get("curves_csv") is None:
            _fail(EXIT_SCHEMA, "--out-curves requires --counters")
        with open(curves_path, "w") as fh:
            fh.write(result["curves_csv"])
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
