"""qpsim command line: run .qp programs, generate Shor circuits, factor
integers, and serve the local JSON API."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .errors import QpError
from .executor import ExecutionConfig, execute, render_state, run_log, timing_report
from .gates import default_registry
from .lang import parse
from .shor import FactorizationResult, ShorParams, build_shor_text, factor

EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _default_seed() -> int:
    return int(os.environ.get("QPSIM_SEED", "0"))


def _fail(err: QpError) -> None:
    click.echo(f"error: {err}", err=True)
    sys.exit(err.exit_code)


@click.group()
def main():
    """Hybrid quantum/classical circuit simulator."""


@main.command("run")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="RNG seed (default env QPSIM_SEED or 0).")
@click.option("--mode", type=click.Choice(["sparse", "dense"]), default="sparse")
@click.option("--state-format", type=click.Choice(["amplitudes", "probabilities", "plain"]),
              default="amplitudes")
@click.option("--measurement", type=click.Choice(["in_place", "deferred"]),
              default="in_place")
@click.option("--trace/--no-trace", default=False, help="Record per-step snapshots.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="Append the full run log to this file.")
@click.option("--memory-budget", type=int, default=None, help="Dense-mode budget in bytes.")
def cli_run(file, seed, mode, state_format, measurement, trace, log_path,
            memory_budget):
    """Parse, validate and execute a .qp program."""
    seed = _default_seed() if seed is None else seed
    try:
        program = parse(Path(file).read_text())
        config = ExecutionConfig(seed=seed, mode=mode, measurement=measurement,
                                 trace_states=trace, memory_budget=memory_budget)
        result = execute(program, default_registry(), config)
    except QpError as err:
        _fail(err)
    click.echo(f"seed: {seed}")
    click.echo(timing_report(result))
    if result.classical_register is not None and len(result.classical_register):
        click.echo(f"classical register: {result.classical_register.as_bitstring()} "
                   f"| {result.classical_register.as_int()}")
    click.echo(render_state(result.final_state, state_format), nl=False)
    if log_path:
        with open(log_path, "a") as fh:
            fh.write(run_log(result, program, state_format))
            fh.write("\n")


@main.command("shor-gen")
@click.option("--N", "n_value", type=int, required=True)
@click.option("--a", "a_value", type=int, default=2)
@click.option("--approach", type=click.Choice(["nx2n", "3nx1"]), default="nx2n")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output path (default Shor-N<N>-a<a>-<approach>.qp).")
def cli_shor_gen(n_value, a_value, approach, out):
    """Generate a Shor factorization .qp program."""
    try:
        params = ShorParams(N=n_value, a=a_value, approach=approach)
        text = build_shor_text(params)
    except QpError as err:
        _fail(err)
    path = Path(out) if out else Path(params.filename())
    path.write_text(text)
    click.echo(str(path))


def _print_factor_report(result: FactorizationResult) -> None:
    if result.classical:
        p, q = result.factors
        click.echo(f"Classical factor found: {p} and {q}")
        return
    for i, run in enumerate(result.runs, start=1):
        if run.trace is not None:
            lines = timing_report(run.trace).split("\n")
            click.echo(f"Run {i}: {lines[0]}")
            for line in lines[1:]:
                click.echo(f"      {line}")
    click.echo("*****")
    click.echo("Measured States | Integer Rep.")
    for i, run in enumerate(result.runs, start=1):
        click.echo(f"Run {i}: {run.bits} | {run.integer}")
    click.echo("*****")
    click.echo("Extract prime Factors:")
    for run in result.runs:
        click.echo(f"Using {run.bits} ({run.integer}):")
        if run.order is not None:
            click.echo(f"Order from continued fractions: {run.order}")
        else:
            click.echo("Order from continued fractions: none")
        if run.factors:
            p, q = run.factors
            click.echo(f"Factors using GCD: {p} and {q}")
            click.echo(f"Prime factors of {result.N} found!")
    click.echo("*****")


@main.command("factor")
@click.option("--N", "n_value", type=int, required=True)
@click.option("--a", "a_value", type=int, default=None,
              help="Base (default: try a=2,3,4,... in turn).")
@click.option("--approach", type=click.Choice(["nx2n", "3nx1"]), default="nx2n")
@click.option("--runs", type=int, default=10, help="Max runs per base.")
@click.option("--seed", type=int, default=None)
@click.option("--try-multiples/--no-try-multiples", default=False,
              help="Also test small multiples of each order candidate.")
@click.option("--mode", type=click.Choice(["sparse", "dense"]), default="sparse")
@click.option("--memory-budget", type=int, default=None)
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write runs.csv and figures into this directory.")
def cli_factor(n_value, a_value, approach, runs, seed, try_multiples, mode,
               memory_budget, report_dir):
    """Factor an odd composite via quantum order finding."""
    seed = _default_seed() if seed is None else seed
    click.echo(f"seed: {seed}")
    try:
        result = factor(n_value, a_value, approach, seed=seed, max_runs=runs,
                        try_multiples=try_multiples, mode=mode,
                        memory_budget=memory_budget, keep_traces=True)
    except QpError as err:
        _fail(err)
    _print_factor_report(result)
    if report_dir:
        from .report import write_report
        for path in write_report(result, report_dir):
            click.echo(f"wrote {path}")
    if not result.success:
        click.echo(f"No factors of {n_value} found in {len(result.runs)} runs.")
        sys.exit(EXIT_DOMAIN)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8489, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Serve this directory of static UI files at /.")
def cli_serve(host, port, ui_dir):
    """Start the local JSON API (and optionally the browser UI)."""
    import uvicorn

    from .service import create_app

    app = create_app(ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
