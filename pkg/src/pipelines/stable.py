"""Scaling pipelines: the stable regime (s < d + 2) and the Brownian regime."""

from typing import Dict, List

import numpy as np

from ..estimators.marginals import marginal_compare
from ..estimators.scaling import Statistic, scaling_exponent, small_jump_trend
from ..estimators.tails import hill_tail_index, zmax_tail_check
from ..exploration.scales import scale_parameters
from ..stable.reference import reference_endpoints, total_jump_statistic
from ..stable.samplers import calibrate_scale, dump_samples, sample_stable_1d, stable_path
from ..utils.stats import ks_two_sample
from ..utils.streams import StreamFactory
from ..walks.engine import endpoint_displacements, run_ensemble
from ..walks.path import rescale_path
from .base import BasePipeline, CheckOutput, PipelineContext, verdict, within


def _scaling_run(ctx: PipelineContext) -> Dict:
    """Endpoints at every n of the grid; the ensemble at the largest n is kept for tail checks."""
    cfg = ctx.config
    env = ctx.environment()
    start = ctx.start_vertex(env)
    kept: Dict = {}

    def factory(n: int, count: int) -> np.ndarray:
        paths = run_ensemble(env, start, n, count, StreamFactory(ctx.child_seed(1, n)))
        if n == max(cfg.grids.n_grid):
            kept["paths"] = paths
        return endpoint_displacements(paths).astype(np.float64)

    report = scaling_exponent(
        factory,
        cfg.grids.n_grid,
        cfg.walks.per_n,
        Statistic(cfg.estimators.statistic),
        rng=ctx.rng(2),
        resamples=cfg.estimators.bootstrap_resamples,
    )
    for w in report.warnings:
        ctx.logger.warn(w)
    ctx.write_json("scaling.json", report.to_report())
    return {"report": report, "paths": kept.get("paths", [])}


class StablePipeline(BasePipeline):
    """Superdiffusive scaling n^{1/alpha}, tails and the reference law, alpha = s - d."""

    checks = ("scaling", "marginals", "small_jumps", "zmax", "reference")

    def __init__(self):
        super().__init__("stable", "Stable-regime scaling exponent, tail index and marginals")

    def _scaling(self, ctx: PipelineContext) -> Dict:
        if "scaling" not in ctx.cache:
            ctx.cache["scaling"] = _scaling_run(ctx)
        return ctx.cache["scaling"]

    def check_scaling(self, ctx: PipelineContext) -> CheckOutput:
        alpha = ctx.params.alpha
        tol = ctx.config.tolerances.stable_slope
        run = self._scaling(ctx)
        report = run["report"]
        verdicts = [
            verdict("scaling", "slope of log |X_n| vs log n", report.slope, f"{1 / alpha:.4g} +- {tol}", within(report.slope, 1 / alpha, tol))
        ]
        out = {"scaling": report.to_report()}
        norms = np.linalg.norm(endpoint_displacements(run["paths"]), axis=1) if run["paths"] else np.zeros(0)
        norms = norms[norms > 0]
        if norms.size >= 100:
            fraction = min(0.2, max(ctx.config.estimators.hill_top_fraction, 20.0 / norms.size))
            hill = hill_tail_index(norms, top_fraction=fraction, rng=ctx.rng(3), resamples=ctx.config.estimators.bootstrap_resamples)
            out["hill"] = hill.to_report()
            verdicts.append(verdict("scaling", "Hill index of |X_n|", hill.alpha_hat, f"~ {alpha:.4g}", None))
        else:
            ctx.logger.warn(f"only {norms.size} nonzero endpoints; Hill estimate skipped")
        return out, verdicts

    def check_marginals(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        alpha, d = ctx.params.alpha, ctx.params.d
        paths = self._scaling(ctx)["paths"]
        if not paths:
            return {}, [verdict("marginals", "KS at t=1", None, "report only", None)]
        sim = [rescale_path(p, 1.0 / alpha) for p in paths]
        endpoints = np.stack([f.values[-1] for f in sim])
        calibration = calibrate_scale(endpoints, alpha, ctx.rng(4))
        calibration.write(ctx.path("calibration.json"))
        ctx.record(ctx.path("calibration.json"))
        grid = np.linspace(0.0, 1.0, 65)
        rng = ctx.rng(5)
        reference = [stable_path(alpha, d, grid, rng, scale=calibration.scale) for _ in range(len(sim))]
        report = marginal_compare(sim, reference, cfg.grids.marginal_times, q=cfg.estimators.lq)
        ctx.write_json("marginals.json", report.to_report())
        ks = report.ks_at(1.0) if 1.0 in cfg.grids.marginal_times else report.ks_max
        return report.to_report(), [verdict("marginals", "KS of rescaled X_n(1) vs calibrated stable", ks, "report only", None)]

    def check_small_jumps(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        grid: List[int] = cfg.grids.small_jump_grid
        env = ctx.environment()
        paths = run_ensemble(env, ctx.start_vertex(env), max(grid), cfg.walks.count, StreamFactory(ctx.child_seed(6)))
        k = int(np.log2(max(grid)))
        rho = scale_parameters(k, ctx.params.s, ctx.params.d, rho_floor=cfg.exploration.rho_floor).rho
        report = small_jump_trend(paths, rho, ctx.params.alpha, grid)
        ctx.write_json("small_jumps.json", report.to_report())
        tol = cfg.tolerances.small_jump_ratio
        return report.to_report(), [
            verdict("small_jumps", "median small-jump mass strictly decreasing", float(report.strictly_decreasing), "true", report.strictly_decreasing),
            verdict("small_jumps", "last / first median", report.ratio, f"< {tol}", report.ratio < tol),
        ]

    def check_zmax(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        alpha = ctx.params.alpha
        samples = total_jump_statistic(ctx.params, cfg.walks.reference_n, cfg.walks.samples, ctx.rng(7))
        dump_samples(samples, ctx.path("zmax_samples.csv"))
        ctx.record(ctx.path("zmax_samples.csv"))
        right = zmax_tail_check(samples, alpha, tolerance=cfg.tolerances.zmax)
        wrong = zmax_tail_check(samples, 2.0 * alpha, tolerance=cfg.tolerances.zmax)
        out = {"envelope": right.to_report(), "misspecified": wrong.to_report()}
        ctx.write_json("zmax.json", out)
        return out, [
            verdict("zmax", f"violations of c*y^-{alpha:.3g}", right.violations, "0", right.violations == 0),
            verdict("zmax", f"violations of c*y^-{2 * alpha:.3g}", wrong.violations, "> 0", wrong.violations > 0),
        ]

    def check_reference(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        alpha = ctx.params.alpha
        if ctx.params.d != 1:
            return {}, [verdict("reference", "KS of reference endpoint", None, "d = 1 only", None)]
        rng = ctx.rng(8)
        endpoints = reference_endpoints(ctx.params, cfg.walks.reference_n, cfg.walks.reference_paths, rng)[:, 0]
        calibration = calibrate_scale(endpoints, alpha, rng)
        stable = sample_stable_1d(alpha, endpoints.size, rng, scale=calibration.scale)
        ks, p = ks_two_sample(endpoints, stable)
        tol = cfg.tolerances.marginal_ks
        out = {"ks": ks, "p_value": p, "calibration": calibration.to_report()}
        ctx.write_json("reference.json", out)
        return out, [verdict("reference", "KS of rescaled reference endpoint vs CMS stable", ks, f"< {tol}", ks < tol)]


class BrownianPipeline(BasePipeline):
    """Diffusive scaling sqrt(n) and a flat Var(X_n)/n in the s > d + 2 regime."""

    checks = ("scaling",)

    def __init__(self):
        super().__init__("brownian", "Brownian-regime scaling exponent and variance plateau")

    def check_scaling(self, ctx: PipelineContext) -> CheckOutput:
        tol = ctx.config.tolerances
        report = _scaling_run(ctx)["report"]
        spread = report.top_octave_spread()
        return {"scaling": report.to_report()}, [
            verdict("scaling", "slope of log |X_n| vs log n", report.slope, f"0.5 +- {tol.brownian_slope}", within(report.slope, 0.5, tol.brownian_slope)),
            verdict("scaling", "Var(X_n)/n spread over top 3 octaves", spread, f"< {tol.variance_spread}", spread < tol.variance_spread),
        ]
