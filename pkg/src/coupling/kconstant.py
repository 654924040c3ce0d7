"""Monte Carlo estimates of sigma_{j,m,J}, K_J and the K_J bracket."""

import json
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from ..exploration.types import estimate_q_grid, psi, validate_q_grid
from ..utils.errors import DomainError
from .geometric import CouplingStreams, TypePool, excursion_parameter, excursion_parameters, geometric_samples

TypeKey = Tuple[int, int]


class KReport(BaseModel):
    """K_J with its sigma and rate tables; tables are indexed [j-1][m-1]."""

    J: int
    q_grid: List[float]
    sigma_table: List[List[float]]
    C_table: List[List[float]]
    K_J: float
    psi_J: float
    trials: int

    def to_report(self) -> dict:
        return self.model_dump()

    def write(self, target: Union[str, Path]) -> Path:
        target = Path(target)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.to_report(), sort_keys=True, indent=2) + "\n")
        return target


class KSequence(BaseModel):
    reports: List[KReport]
    brackets: List[Dict[str, float]] = Field(default_factory=list, description="|K_J - K_2J| against 2 psi_J")

    @property
    def K(self) -> float:
        return self.reports[-1].K_J

    @property
    def brackets_hold(self) -> bool:
        return all(b["gap"] <= b["bound"] for b in self.brackets)

    def to_report(self) -> dict:
        return {
            "J": [r.J for r in self.reports],
            "K_J": [r.K_J for r in self.reports],
            "psi_J": [r.psi_J for r in self.reports],
            "K": self.K,
            "brackets": self.brackets,
            "brackets_hold": self.brackets_hold,
        }


def sigma_value(q: float, m: int, pool: TypePool, trials: int, rng: np.random.Generator) -> float:
    """P(R(param(q, m)) > R~(param(r, d))) with (r, d) drawn from ``pool``."""
    R = geometric_samples(rng, np.full(trials, excursion_parameter(q, m)))
    r, d = pool.sample_many(rng, trials)
    R_tilde = geometric_samples(rng, excursion_parameters(r, d))
    return float(np.mean(R > R_tilde))


def estimate_K(
    q_grid: Sequence[float],
    pool: TypePool,
    rates: Mapping[TypeKey, float],
    trials: int = 1_000_000,
    streams: Optional[CouplingStreams] = None,
) -> KReport:
    """K_J = sum over (j, m) in [J]^2 of sigma_{j,m,J} C_{q_{j-1},q_j,m}.

    Cells with a zero rate are skipped.
    """
    q = validate_q_grid(q_grid)
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    streams = streams or CouplingStreams(0)
    J = q.size
    sigma = np.zeros((J, J))
    C = np.zeros((J, J))
    for j in range(1, J + 1):
        for m in range(1, J + 1):
            C[j - 1, m - 1] = float(rates.get((j, m), 0.0))
            if C[j - 1, m - 1] > 0:
                sigma[j - 1, m - 1] = sigma_value(q[j - 1], m, pool, trials, streams.monte_carlo(J, j, m))
    return KReport(
        J=J,
        q_grid=q.tolist(),
        sigma_table=sigma.tolist(),
        C_table=C.tolist(),
        K_J=float((sigma * C).sum()),
        psi_J=psi(q),
        trials=trials,
    )


def k_sequence(
    pool: TypePool,
    Js: Sequence[int],
    rates_for: Callable[[np.ndarray], Mapping[TypeKey, float]],
    trials: int = 200_000,
    streams: Optional[CouplingStreams] = None,
) -> KSequence:
    """K_J over a list of J with grids estimated from the pool and the bracket
    |K_J - K_{2J}| <= 2 psi_J for every J whose double is also in the list."""
    reports = []
    for J in sorted(set(Js)):
        grid = estimate_q_grid(pool.p, J)
        reports.append(estimate_K(grid, pool, rates_for(grid), trials, streams))
    by_J = {r.J: r for r in reports}
    brackets = []
    for r in reports:
        twice = by_J.get(2 * r.J)
        if twice is not None:
            brackets.append({"J": r.J, "gap": abs(r.K_J - twice.K_J), "bound": 2.0 * r.psi_J})
    return KSequence(reports=reports, brackets=brackets)
