"""Command-line interface for lrplab."""

import asyncio
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
from dotenv import load_dotenv

from ..exploration.events import event_scan
from ..exploration.process import run_exploration, write_transcript
from ..harness.orchestrator import sweep_trend
from ..harness.results import EXIT_ERROR, ResultRecord, emit_results, exit_code, render_summary
from ..percolation.clusters import analyze_clusters
from ..percolation.generator import generate_environment
from ..percolation.model import expected_degree
from ..percolation.snapshot import save_snapshot
from ..utils.config import ExperimentConfig, OutputFormat, Pipeline
from ..utils.errors import ConfigError, LabError
from ..utils.streams import StreamFactory
from ..utils.system_init import acceptance_jobs, build_config, create_orchestrator
from ..walks.dump import dump_path
from ..walks.engine import intersection_counts, run_ensemble, wraparound_fraction

# Load environment variables
load_dotenv()


@click.group()
@click.version_option(package_name="lrplab")
@click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False), default=None, help="Experiment YAML file")
@click.option("--seed", type=int, default=None, help="Master seed (overrides the file)")
@click.option("--out", default=None, help="Output directory (overrides the file and LRPLAB_OUT)")
@click.option("--workers", type=int, default=None, help="Concurrent experiments (overrides LRPLAB_WORKERS)")
@click.option(
    "--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default=None, help="Result file format"
)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.pass_context
def cli(ctx, config_path, seed, out, workers, fmt, verbose):
    """lrplab: random walks on long-range percolation clusters."""
    ctx.ensure_object(dict)
    ctx.obj.update(config_path=config_path, seed=seed, out=out, workers=workers, fmt=fmt, verbose=verbose)


def _flags(ctx) -> dict:
    return {k: ctx.obj[k] for k in ("seed", "out", "workers", "fmt")}


def _load(ctx, pipeline: Optional[Pipeline] = None):
    """Config and input hash from --config, with the pipeline optionally forced."""
    if not ctx.obj["config_path"]:
        raise ConfigError("--config is required for this command")
    config, digest = build_config(ctx.obj["config_path"], **_flags(ctx))
    if pipeline is not None and config.pipeline != pipeline:
        config = config.with_overrides(pipeline=pipeline.value)
    return config, digest


def _fail(error: Exception):
    click.echo(f"Error: {error}", err=True)
    sys.exit(EXIT_ERROR)


def _finish(records: Sequence[ResultRecord], config: ExperimentConfig, extra: Optional[dict] = None):
    """Write the results, print the summary and exit with the aggregate code."""
    formats = {config.output.format, OutputFormat.MD}
    written = emit_results(records, config.output.out, sorted(formats, key=lambda f: f.value))
    if extra:
        target = Path(config.output.out) / "sweep.json"
        target.write_text(json.dumps(extra, sort_keys=True, indent=2) + "\n")
        written.append(target)
    click.echo(render_summary(records))
    for path in written:
        click.echo(f"wrote {path}", err=True)
    sys.exit(exit_code(records))


def _run_pipeline(ctx, pipeline: Optional[Pipeline] = None, checks: Optional[List[str]] = None):
    try:
        config, digest = _load(ctx, pipeline)
        if checks:
            config = config.with_overrides(checks=list(checks))
        orchestrator = create_orchestrator(config.output.workers, ctx.obj["verbose"])
        record = asyncio.run(orchestrator.run_experiment(config, input_hash=digest))
    except LabError as e:
        _fail(e)
    _finish([record], config)


def _echo_json(data: dict):
    click.echo(json.dumps(data, sort_keys=True, indent=2, default=str))


@cli.command()
@click.option("--method", type=click.Choice(["skip", "hash"]), default="skip", help="Edge sampler")
@click.option("--snapshot/--no-snapshot", default=True, help="Write an LRPENV snapshot")
@click.pass_context
def gen(ctx, method: str, snapshot: bool):
    """Generate an environment and report its degree and cluster statistics."""
    try:
        config, _ = _load(ctx)
        env = generate_environment(config.model, config.seed, method=method)
        report = {
            "params": config.model.model_dump(mode="json"),
            "seed": config.seed,
            "long_edges": env.long_edge_count,
            "mean_degree": float(env.degrees.mean()),
            "expected_degree": expected_degree(config.model),
            "max_long_length": env.max_long_length(),
            "clusters": analyze_clusters(env).to_report(),
        }
        if snapshot:
            target = Path(config.output.out) / f"env-{config.seed}.lrpenv"
            report["snapshot"] = str(save_snapshot(env, target))
    except LabError as e:
        _fail(e)
    _echo_json(report)


@cli.command()
@click.option("--steps", "-n", type=int, default=None, help="Steps per walk (default walks.steps)")
@click.option("--count", type=int, default=None, help="Number of walks (default walks.count)")
@click.option("--start", type=int, default=0, help="Start vertex")
@click.pass_context
def walk(ctx, steps: Optional[int], count: Optional[int], start: int):
    """Run an ensemble of walks on one environment and dump the paths."""
    try:
        config, _ = _load(ctx)
        env = generate_environment(config.model, config.seed)
        n = steps or config.walks.steps
        paths = run_ensemble(env, start, n, count or config.walks.count, StreamFactory(config.seed))
        out = Path(config.output.out) / "walks"
        for path in paths:
            dump_path(path, out / f"walk_{path.ell}.csv", {"seed": config.seed, **config.model.header_fields()})
        report = {
            "walks": len(paths),
            "steps": n,
            "intersections": intersection_counts(paths).to_report(),
            "wraparound_fraction": wraparound_fraction(paths, config.model.L),
            "directory": str(out),
        }
    except LabError as e:
        _fail(e)
    _echo_json(report)


@cli.command()
@click.option("--k", "k", type=int, default=None, help="Dyadic level (default: largest grids.k)")
@click.option("--walks", "walks", type=int, default=None, help="Walks (default walks.exploration_walks)")
@click.pass_context
def explore(ctx, k: Optional[int], walks: Optional[int]):
    """Run walks on a lazily revealed environment and write the transcript."""
    try:
        config, _ = _load(ctx)
        knobs = config.exploration
        level = k or max(config.grids.k)
        result = run_exploration(
            config.model,
            config.seed,
            level,
            walks or config.walks.exploration_walks,
            J=knobs.J,
            gamma=knobs.gamma,
            rho_floor=knobs.rho_floor,
            sampler=knobs.edge_sampler,
            pilot_samples=knobs.pilot_samples,
            local_trials=knobs.local_trials,
        )
        suffix = ".jsonl.gz" if config.output.compress else ".jsonl"
        target = write_transcript(result, Path(config.output.out) / f"transcript_k{level}{suffix}", config.output.compress)
        events = event_scan(result.paths, result.state, result.scales, error_free=[w.error_free for w in result.walks])
        report = {**result.to_report(), "events": events.to_report(), "transcript": str(target)}
    except LabError as e:
        _fail(e)
    _echo_json(report)


@cli.command()
@click.option("--check", "checks", multiple=True, help="Run only these checks (vstar, oracle, derived)")
@click.pass_context
def couple(ctx, checks):
    """Coupling lab: V* excursions, oracle equivalence and derived processes."""
    _run_pipeline(ctx, Pipeline.COUPLING, list(checks))


@cli.command()
@click.option(
    "--pipeline",
    type=click.Choice([Pipeline.STABLE.value, Pipeline.BROWNIAN.value, Pipeline.HEATKERNEL.value, Pipeline.EXPLORATION.value]),
    default=None,
    help="Override the pipeline of the config",
)
@click.option("--check", "checks", multiple=True, help="Run only these checks")
@click.pass_context
def estimate(ctx, pipeline: Optional[str], checks):
    """Run the estimator pipeline named by the config (or --pipeline)."""
    _run_pipeline(ctx, Pipeline(pipeline) if pipeline else None, list(checks))


@cli.command()
@click.pass_context
def cutpoints(ctx):
    """Cutpoint chain of d = 1 environments: Q symmetry, resistance bound, K*."""
    _run_pipeline(ctx, Pipeline.CUTPOINTS)


@cli.command()
@click.pass_context
def kconst(ctx):
    """New-vertex rates and the K_J sequence."""
    _run_pipeline(ctx, Pipeline.KCONSTANT)


@cli.command()
@click.option("--s", "s_values", type=float, multiple=True, help="Tail exponents (default grids.s_values)")
@click.pass_context
def sweep(ctx, s_values):
    """Run the config's pipeline at every tail exponent of a grid."""
    try:
        config, _ = _load(ctx)
        values = list(s_values) or config.grids.s_values
        if not values:
            raise ConfigError("no sweep values: pass --s or set grids.s_values")
        orchestrator = create_orchestrator(config.output.workers, ctx.obj["verbose"])
        records = asyncio.run(orchestrator.sweep(config, values))
    except LabError as e:
        _fail(e)
    extra = None
    if config.pipeline in (Pipeline.STABLE, Pipeline.BROWNIAN):
        trend = sweep_trend(records, values, config.model.d)
        records = records + [
            ResultRecord(
                name="sweep-trend",
                pipeline=config.pipeline.value,
                seed=config.seed,
                config_hash=config.config_hash(),
                checks=[trend["check"]],
            )
        ]
        extra = {k: v for k, v in trend.items() if k != "check"}
    _finish(records, config, extra)


@cli.command()
@click.option("--only", type=int, multiple=True, help="Criterion numbers to run")
@click.option("--quick", is_flag=True, help="Scaled-down presets for smoke runs")
@click.pass_context
def verify(ctx, only, quick: bool):
    """Run the acceptance presets and print the acceptance table."""
    try:
        jobs = acceptance_jobs(only, scale_down=quick, **_flags(ctx))
        workers = ctx.obj["workers"] or jobs[0]["config"].output.workers
        orchestrator = create_orchestrator(workers, ctx.obj["verbose"])
        records = asyncio.run(orchestrator.run_many(jobs))
    except LabError as e:
        _fail(e)
    _finish(records, jobs[0]["config"])


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
