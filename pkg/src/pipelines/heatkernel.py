"""Heat-kernel pipeline: decay exponent of the return probability."""

from ..estimators.heat_kernel import heat_kernel_exponent
from ..utils.streams import StreamFactory
from .base import BasePipeline, CheckOutput, PipelineContext, verdict, within


class HeatKernelPipeline(BasePipeline):
    checks = ("heat_kernel",)

    def __init__(self):
        super().__init__("heatkernel", "Log-log slope of P_t(0, 0)")

    def check_heat_kernel(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        env = ctx.environment()
        report = heat_kernel_exponent(
            env,
            ctx.start_vertex(env),
            cfg.grids.t_grid,
            mode=cfg.estimators.heat_kernel_mode,
            trials=cfg.estimators.heat_kernel_trials,
            streams=StreamFactory(ctx.child_seed(30)),
        )
        for w in report.warnings:
            ctx.logger.warn(w)
        ctx.write_json("heat_kernel.json", report.to_report())
        expected = -ctx.params.d / min(ctx.params.alpha, 2.0)
        tol = cfg.tolerances.heat_kernel_slope
        return report.to_report(), [
            verdict("heat_kernel", "slope of log P_t(0,0) vs log t", report.slope, f"{expected:.4g} +- {tol}", within(report.slope, expected, tol))
        ]
