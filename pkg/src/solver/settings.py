"""
Typed solver settings, built from the `solver` section of config.yaml.
"""

from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class BarrierSettings(BaseModel):
    """Log-barrier interior-point parameters."""

    model_config = ConfigDict(frozen=True)

    initial_weight: float = Field(1.0, gt=0)
    weight_factor: float = Field(10.0, gt=1)
    gap_tolerance: float = Field(1e-8, gt=0)
    max_newton_steps: int = Field(500, ge=1)
    line_search_alpha: float = Field(0.25, gt=0, lt=0.5)
    line_search_beta: float = Field(0.5, gt=0, lt=1)
    newton_tolerance: float = Field(1e-12, gt=0)
    full_step_decrement: float = Field(0.25, gt=0)
    kkt_tolerance: float = Field(1e-7, gt=0)


class SolverSettings(BaseModel):
    """Settings of the fixed-assignment and relaxed programs."""

    model_config = ConfigDict(frozen=True)

    barrier: BarrierSettings = BarrierSettings()
    time_floor_s: float = Field(1e-12, gt=0)
    load_snap_bits: float = Field(1e-9, ge=0)
    initial_headroom: float = Field(0.1, gt=0)

    @classmethod
    def from_config(cls, section: Optional[Dict[str, Any]]) -> "SolverSettings":
        """Build settings from a config.yaml `solver` section; missing keys keep defaults."""
        return cls.model_validate(section or {})
