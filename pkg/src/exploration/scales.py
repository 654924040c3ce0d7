"""Dyadic scales of the exploration process."""

import math
from typing import List, Optional

from pydantic import BaseModel, Field

from ..utils.errors import DomainError

RHO_CEILING = 1 << 62


class Scales(BaseModel):
    """Derived scales at dyadic level k.

    ``ball_radius`` is floor(2^{delta k}); ``cap`` is max(1, round(2^{gamma k}))
    and the special phase lasts ``special_length`` = 2 * cap steps.
    ``near_radius`` = max(rho, 2 * ball_radius) separates hashed near pairs from
    far pairs decided at reveal time.
    """

    k: int = Field(..., ge=1, description="Dyadic level; walks run 2^k steps")
    d: int = Field(..., ge=1, description="Dimension")
    s: float = Field(..., description="Tail exponent")
    alpha: float = Field(..., description="s - d")
    rho_raw_log2: float = Field(..., description="log2 of the asymptotic threshold")
    rho: int = Field(..., ge=2, description="Long-edge threshold")
    rho_clamped: bool = Field(default=False, description="rho was raised to the floor")
    delta: float = Field(..., description="Ball exponent")
    gamma: float = Field(..., description="Special-phase exponent")
    ball_radius: int = Field(..., ge=1, description="Sup-radius of the local balls")
    cap: int = Field(..., ge=1, description="Return cap of the local walks")
    special_length: int = Field(..., description="Special phase length 2 * cap")
    near_radius: int = Field(..., description="max(rho, 2 * ball_radius)")
    warnings: List[str] = Field(default_factory=list, description="Clamp and margin warnings")

    @property
    def horizon(self) -> int:
        return 1 << self.k

    @property
    def proximity_radius(self) -> int:
        """2^{delta k + 1}: minimum distance of a long-edge endpoint from W+."""
        return 2 * self.ball_radius

    @property
    def scale_factor(self) -> float:
        """2^{-k/alpha}, the stable rescaling of a 2^k-step walk."""
        return 2.0 ** (-self.k / self.alpha)

    def to_report(self) -> dict:
        return self.model_dump()


def rho_log2(k: int, alpha: float) -> float:
    """log2 of k^{-200/(1-alpha)} 2^{k/alpha}."""
    return -200.0 / (1.0 - alpha) * math.log2(k) + k / alpha


def scale_parameters(
    k: int,
    s: float,
    d: int,
    gamma: Optional[float] = None,
    rho_floor: int = 2,
) -> Scales:
    """All exploration scales for level ``k``.

    Args:
        k: Dyadic level
        s: Tail exponent, d < s < d + 1
        d: Dimension
        gamma: Special-phase exponent (default delta / 8)
        rho_floor: Smallest admissible long-edge threshold

    Raises:
        DomainError: s outside (d, d+1), rho_floor < 2, or the special phase
            does not fit in 2^k steps
    """
    if not d < s < d + 1:
        raise DomainError(f"exploration needs d < s < d + 1 (got d={d}, s={s})")
    if rho_floor < 2:
        raise DomainError(f"rho floor must be >= 2, got {rho_floor}")
    alpha = s - d
    warnings: List[str] = []
    delta = min(0.5 * (1.0 / alpha - 1.0), 0.5)
    if delta < 0.05:
        warnings.append(f"delta={delta:.4f} is close to 0; balls are trivial at this k")
    if not 1.0 + delta * d < d / alpha:
        warnings.append(f"margin 1 + delta d < d / alpha fails (delta={delta:.4f})")
    gamma = delta / 8.0 if gamma is None else float(gamma)
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    log2_rho = rho_log2(k, alpha)
    raw = 2.0 ** min(log2_rho, 62.0)
    rho = int(min(round(raw), RHO_CEILING))
    clamped = rho < rho_floor
    if clamped:
        warnings.append(f"rho = 2^{log2_rho:.1f} below floor; clamped to {rho_floor}")
        rho = rho_floor
    ball_radius = max(1, int(math.floor(2.0 ** (delta * k))))
    cap = max(1, int(round(2.0 ** (gamma * k))))
    special_length = 2 * cap
    if special_length >= 1 << k:
        raise DomainError(f"special phase of {special_length} steps does not fit in 2^{k} steps")
    return Scales(
        k=k,
        d=d,
        s=s,
        alpha=alpha,
        rho_raw_log2=log2_rho,
        rho=rho,
        rho_clamped=clamped,
        delta=delta,
        gamma=gamma,
        ball_radius=ball_radius,
        cap=cap,
        special_length=special_length,
        near_radius=max(rho, 2 * ball_radius),
        warnings=warnings,
    )
