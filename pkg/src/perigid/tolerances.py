"""Numeric policy threaded through every tolerance-sensitive decision."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ToleranceVault:
    """Single source of truth for rank cuts, PSD slack, residual gates and RNG seeding.

    Every operation that makes a floating-point decision takes a vault instead
    of ad-hoc keyword thresholds, so a whole run can be tightened or loosened
    coherently and reproduced from the seed.
    """

    rank_rel_tol: float = 1e-9
    psd_slack: float = 1e-9
    residual_tol: float = 1e-9
    rng_seed: int = 2024
    generic_trials: int = 3

    def __post_init__(self) -> None:
        for name in ("rank_rel_tol", "psd_slack", "residual_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.generic_trials < 1:
            raise ValueError("generic_trials must be at least 1")

    def with_seed(self, seed: int) -> "ToleranceVault":
        return replace(self, rng_seed=int(seed))


DEFAULT_TOL = ToleranceVault()
