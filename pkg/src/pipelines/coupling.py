"""Coupling pipeline: the V* excursion law, MC-vs-exact oracles and the derived processes."""

import numpy as np

from ..coupling.derived import build_derived_processes
from ..coupling.geometric import CouplingStreams
from ..coupling.vstar import random_vstar_fixture, simulate_vstar
from ..estimators.rates import new_vertex_rates
from ..estimators.returns import oracle_comparison, sample_balls
from .base import BasePipeline, CheckOutput, PipelineContext, verdict
from .exploration import explore


class CouplingPipeline(BasePipeline):
    checks = ("vstar", "oracle", "derived")

    def __init__(self):
        super().__init__("coupling", "Excursion geometric law, oracle equivalence and derived processes")

    def check_vstar(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        streams = CouplingStreams(ctx.config.seed)
        reports = []
        for f in range(cfg.walks.fixtures):
            rng = streams.vstar(f)
            ball_v, ball_x = random_vstar_fixture(rng)
            reports.append(simulate_vstar(ball_v, ball_x, cfg.walks.trials, rng).to_report())
        ctx.write_json("vstar.json", reports)
        ks = [r[key] for r in reports for key in ("ks_v", "ks_x") if r[key] is not None]
        ks_max = max(ks) if ks else 0.0
        side = min(r["side_rule_agreement"] for r in reports)
        tol = cfg.tolerances.geometric_ks
        return {"fixtures": reports, "ks_max": ks_max, "side_rule_min": side}, [
            verdict("vstar", "max KS of R_v, R_x vs geometric law", ks_max, f"< {tol}", ks_max < tol),
            verdict("vstar", "side = (R_v > R_x) agreement", side, "1.0", side == 1.0),
        ]

    def check_oracle(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        knobs = cfg.estimators
        env = ctx.environment()
        rng = ctx.rng(20)
        balls = sample_balls(env, cfg.walks.fixtures, knobs.ball_radius, knobs.cap, rng)
        report = oracle_comparison(balls, rng, trials=cfg.walks.trials, widths=cfg.tolerances.wilson_widths, z=knobs.wilson_z)
        ctx.write_json("oracle.json", {**report.to_report(), "cases": [c.model_dump() for c in report.cases]})
        tol = cfg.tolerances.oracle_pass
        return report.to_report(), [
            verdict("oracle", f"MC within {report.widths:g} Wilson widths of exact", report.agreement, f">= {tol}", report.agreement >= tol)
        ]

    def check_derived(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        result = explore(ctx, max(cfg.grids.k), 0)
        rates = new_vertex_rates(result.paths, result.q_grid, result.state.type_of, chi=cfg.estimators.chi)
        report = build_derived_processes(
            result,
            rates.rates(),
            q=cfg.estimators.lq,
            pilot_samples=cfg.exploration.pilot_samples,
        )
        out = {**report.to_report(), "z_max": [p.increments.z_max() for p in report.paths]}
        ctx.write_json("derived.json", out)
        gap = out["median_lq_hat_vs_walk"]
        return out, [
            verdict("derived", "median L^q distance of X-hat to X", gap if gap is not None else np.nan, "report only", None),
            verdict("derived", "exchangeability p-value", report.exchangeability_p, "report only", None),
        ]
