"""K-constant pipeline: new-vertex rates on one environment and the K_J sequence."""

from typing import Dict, Tuple

import numpy as np

from ..coupling.geometric import CouplingStreams, TypePool
from ..coupling.kconstant import k_sequence
from ..estimators.rates import LocalTypes, RateReport, new_vertex_rates
from ..exploration.types import estimate_q_grid
from ..utils.streams import StreamFactory
from ..walks.engine import run_ensemble
from .base import BasePipeline, CheckOutput, PipelineContext, verdict


class KConstantPipeline(BasePipeline):
    checks = ("rates", "k_sequence")

    def __init__(self):
        super().__init__("kconstant", "Ergodic new-vertex rates and the K_J bracket")

    def _ensemble(self, ctx: PipelineContext):
        if "ensemble" not in ctx.cache:
            env = ctx.environment()
            ctx.cache["ensemble"] = run_ensemble(
                env, ctx.start_vertex(env), ctx.config.walks.steps, ctx.config.walks.count, StreamFactory(ctx.child_seed(50))
            )
        return ctx.cache["ensemble"]

    def _pilot(self, ctx: PipelineContext) -> Tuple[np.ndarray, np.ndarray]:
        if "pilot" not in ctx.cache:
            knobs = ctx.config.estimators
            env = ctx.environment()
            types = LocalTypes(env, [0.5], knobs.ball_radius, knobs.cap, ctx.rng(51), ctx.config.exploration.local_trials)
            vertices = ctx.rng(52).integers(0, env.n_vertices, size=ctx.config.exploration.pilot_samples)
            pairs = [types.quantities(int(v)) for v in vertices]
            ctx.cache["pilot"] = (np.array([p for p, _ in pairs]), np.array([d for _, d in pairs], dtype=np.int64))
        return ctx.cache["pilot"]

    def _rates(self, ctx: PipelineContext, q_grid: np.ndarray) -> RateReport:
        knobs = ctx.config.estimators
        types = LocalTypes(ctx.environment(), q_grid, knobs.ball_radius, knobs.cap, ctx.rng(53), ctx.config.exploration.local_trials)
        return new_vertex_rates(self._ensemble(ctx), q_grid, types, chi=knobs.chi)

    def check_rates(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        p, _ = self._pilot(ctx)
        report = self._rates(ctx, estimate_q_grid(p, cfg.exploration.J))
        ctx.write_json("rates.json", report.to_report())
        tol = cfg.tolerances
        return report.to_report(), [
            verdict("rates", "C*", report.C_star, "> 0", report.C_star > 0),
            verdict("rates", "max per-walk |N_t/t - C*| / C*", report.max_relative_deviation, f"< {tol.rate_spread}", report.max_relative_deviation < tol.rate_spread),
            verdict("rates", "fraction of walks in H_{k,chi}", report.H_fraction, f">= {tol.h_pass}", report.H_fraction >= tol.h_pass),
        ]

    def check_k_sequence(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        pool = TypePool(*self._pilot(ctx))
        cache: Dict[int, Dict] = {}

        def rates_for(q_grid: np.ndarray):
            if q_grid.size not in cache:
                cache[q_grid.size] = self._rates(ctx, q_grid).rates()
            return cache[q_grid.size]

        sequence = k_sequence(pool, cfg.grids.J, rates_for, trials=cfg.estimators.k_trials, streams=CouplingStreams(cfg.seed))
        for report in sequence.reports:
            ctx.record(report.write(ctx.path(f"K_J{report.J}.json")))
        ctx.write_json("k_sequence.json", sequence.to_report())
        return sequence.to_report(), [
            verdict("k_sequence", "K estimate", sequence.K, "report only", None),
            verdict("k_sequence", "|K_J - K_2J| <= 2 psi_J", float(sequence.brackets_hold), "true", sequence.brackets_hold),
        ]
