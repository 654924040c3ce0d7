"""Exploration pipeline: coupling success over k and the event frequencies."""

from typing import Dict, List

import numpy as np

from ..exploration.events import event_scan
from ..exploration.process import ExplorationResult, run_exploration, write_transcript
from ..utils.stats import wilson_interval
from .base import BasePipeline, CheckOutput, PipelineContext, verdict


def explore(ctx: PipelineContext, k: int, index: int) -> ExplorationResult:
    """Exploration run ``index`` at level ``k``; run 0 uses the experiment seed."""
    knobs = ctx.config.exploration
    key = f"exploration:{k}:{index}"
    if key not in ctx.cache:
        seed = ctx.config.seed if index == 0 else ctx.child_seed(10, index)
        ctx.cache[key] = run_exploration(
            ctx.params,
            seed,
            k,
            ctx.config.walks.exploration_walks,
            J=knobs.J,
            gamma=knobs.gamma,
            rho_floor=knobs.rho_floor,
            sampler=knobs.edge_sampler,
            pilot_samples=knobs.pilot_samples,
            local_trials=knobs.local_trials,
            logger=ctx.logger,
        )
    return ctx.cache[key]


class ExplorationPipeline(BasePipeline):
    checks = ("coupling_success", "events")

    def __init__(self):
        super().__init__("exploration", "Lazily revealed environment, coupling flags and events A-G")

    def check_coupling_success(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        seeds = cfg.walks.environments
        rows: List[Dict] = []
        for k in sorted(cfg.grids.k):
            ok = 0
            codes = np.zeros(6, dtype=np.int64)
            for e in range(seeds):
                result = explore(ctx, k, e)
                ok += result.error_free
                codes += np.array([result.code_counts()[c] for c in range(1, 7)])
                if e == 0:
                    target = ctx.path(f"transcript_k{k}.jsonl" + (".gz" if cfg.output.compress else ""))
                    ctx.record(write_transcript(result, target, compress=cfg.output.compress))
                if e > 0:
                    ctx.forget(f"exploration:{k}:{e}")
            low, high = wilson_interval(ok, seeds, cfg.estimators.wilson_z)
            rows.append({"k": k, "seeds": seeds, "error_free": ok / seeds, "ci_low": low, "ci_high": high, "codes": codes.tolist()})
        ctx.write_json("coupling_success.json", rows)
        fractions = [r["error_free"] for r in rows]
        # nondecreasing up to the Wilson interval of the lower level
        monotone = all(b["error_free"] >= a["ci_low"] for a, b in zip(rows, rows[1:]))
        tol = cfg.tolerances.coupling_success
        return {"levels": rows}, [
            verdict("coupling_success", "error-free fraction nondecreasing in k", float(monotone), "true", monotone),
            verdict("coupling_success", f"error-free fraction at k={rows[-1]['k']}", fractions[-1], f">= {tol}", fractions[-1] >= tol),
        ]

    def check_events(self, ctx: PipelineContext) -> CheckOutput:
        result = explore(ctx, max(ctx.config.grids.k), 0)
        report = event_scan(result.paths, result.state, result.scales, error_free=[w.error_free for w in result.walks])
        ctx.write_json("events.json", report.to_report())
        return report.to_report(), [
            verdict("events", f"frequency of {name}", value, "report only", None) for name, value in sorted(report.frequencies.items())
        ] + [verdict("events", "F* pair frequency", report.f_star, "report only", None)]
