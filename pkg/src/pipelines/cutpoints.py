"""Cutpoint pipeline (d = 1): exact Q symmetry, the resistance bound and K*."""

import numpy as np

from ..estimators.cutpoint_chain import cutpoint_chain
from ..percolation.cutpoints import cutpoint_density
from ..utils.streams import StreamFactory
from .base import BasePipeline, CheckOutput, PipelineContext, verdict


class CutpointsPipeline(BasePipeline):
    checks = ("chain", "density")

    def __init__(self):
        super().__init__("cutpoints", "Cutpoint chain invariants and diffusion constant")

    def check_chain(self, ctx: PipelineContext) -> CheckOutput:
        cfg = ctx.config
        chains = []
        for e in range(cfg.walks.environments):
            env = ctx.environment(e)
            chain = cutpoint_chain(
                env,
                y_steps=cfg.walks.steps,
                walk_steps=cfg.walks.steps,
                walks=cfg.walks.count,
                streams=StreamFactory(ctx.child_seed(40, e)),
            )
            chains.append(chain.to_report())
            if e > 0:
                ctx.forget(f"env:{e}:")
        ctx.write_json("cutpoint_chains.json", chains)
        tol = cfg.tolerances
        symmetry = max(c["symmetry_error"] for c in chains)
        violations = sum(c["resistance_violations"] for c in chains)
        predicted = float(np.mean([c["K_star_times_fraction"] for c in chains]))
        measured = float(np.mean([c["walk_diffusivity"] for c in chains]))
        agreement = abs(measured - predicted) / predicted if predicted > 0 else np.inf
        out = {
            "environments": len(chains),
            "symmetry_error": symmetry,
            "resistance_violations": violations,
            "K_star_mean": float(np.mean([c["K_star"] for c in chains])),
            "K_star_times_fraction": predicted,
            "walk_diffusivity": measured,
            "y_diffusivity": float(np.mean([c["y_diffusivity"] for c in chains])),
            "relative_gap": agreement,
        }
        return out, [
            verdict("chain", "max |Q(j,j+1) - Q(j+1,j)|", symmetry, f"<= {tol.symmetry:g}", symmetry <= tol.symmetry),
            verdict("chain", "gaps with 1/Q(j,j+1) > 2(c_{j+1}-c_j)", violations, "0", violations == 0),
            verdict("chain", "|Var(X_t)/t - K* f| / (K* f)", agreement, f"< {tol.diffusivity}", agreement < tol.diffusivity),
        ]

    def check_density(self, ctx: PipelineContext) -> CheckOutput:
        densities = cutpoint_density(ctx.environment())
        spread = float(densities.std() / densities.mean()) if densities.mean() > 0 else 0.0
        out = {"densities": densities.tolist(), "relative_spread": spread}
        ctx.write_json("cutpoint_density.json", out)
        return out, [verdict("density", "relative spread of window densities", spread, "report only", None)]
