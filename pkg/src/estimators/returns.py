"""Local return probabilities and the Monte Carlo versus exact oracle check."""

from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..utils.errors import DomainError
from ..walks.ball import EXACT_MAX_STATES, GraphView, LocalBall, ReturnEstimate

MODES = ("exact", "monte-carlo")


def return_probabilities(
    view: GraphView,
    v: int,
    ball_radius: int,
    time_cap: Optional[int],
    mode: str = "exact",
    rng: Optional[np.random.Generator] = None,
    trials: int = 2000,
    absorb_boundary: bool = False,
) -> ReturnEstimate:
    """(p~_v, d~_v) on the sup-ball of ``ball_radius`` around v.

    ``time_cap=None`` with ``absorb_boundary`` gives the return-before-exit
    probability; a root without ball neighbours has p~ = 1 and is flagged
    ``isolated``.

    Raises:
        DomainError: unknown mode, exact mode on a ball above the state limit,
            or Monte Carlo without a cap
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    ball = LocalBall.from_view(view, v, ball_radius, cap=time_cap, absorb_boundary=absorb_boundary)
    if mode == "exact":
        return ball.return_probability_exact()
    return ball.return_probability_mc(rng or np.random.default_rng(v), trials)


class OracleCase(BaseModel):
    exact: float
    estimate: float
    ci_width: float
    agrees: bool


class OracleReport(BaseModel):
    """Agreement of Monte Carlo and exact solves on a set of balls."""

    widths: float = Field(..., description="Tolerance in Wilson interval widths")
    cases: List[OracleCase]

    @property
    def agreement(self) -> float:
        return float(np.mean([c.agrees for c in self.cases])) if self.cases else 1.0

    def to_report(self) -> dict:
        return {"widths": self.widths, "fixtures": len(self.cases), "agreement": self.agreement}


def oracle_comparison(
    balls: Sequence[LocalBall], rng: np.random.Generator, trials: int = 2000, widths: float = 3.0, z: float = 1.96
) -> OracleReport:
    """|MC - exact| < widths * Wilson width, per ball; isolated roots agree trivially."""
    cases = []
    for ball in balls:
        if ball.size > EXACT_MAX_STATES:
            raise DomainError("oracle fixtures must be small enough for the exact solve")
        exact = ball.return_probability_exact()
        mc = ball.return_probability_mc(rng, trials, z)
        width = mc.ci_width
        agrees = mc.isolated or abs(mc.p - exact.p) <= max(widths * width, 1e-12)
        cases.append(OracleCase(exact=exact.p, estimate=mc.p, ci_width=width, agrees=agrees))
    return OracleReport(widths=widths, cases=cases)


def sample_balls(
    view: GraphView, count: int, radius: int, cap: Optional[int], rng: np.random.Generator
) -> List[LocalBall]:
    """Balls around ``count`` uniformly chosen vertices."""
    roots = rng.integers(0, view.lattice.n, size=count)
    return [LocalBall.from_view(view, int(v), radius, cap=cap) for v in roots]
