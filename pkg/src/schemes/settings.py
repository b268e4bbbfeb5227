"""
Typed scheme settings, built from the `algorithms` and `solver` sections of config.yaml.
"""

from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..solver.settings import SolverSettings


class SchemeSettings(BaseModel):
    """Knobs of the assignment schemes and the solver they call."""

    model_config = ConfigDict(frozen=True)

    solver: SolverSettings = SolverSettings()
    random_selection_attempts: int = Field(100, ge=1)
    random_search_draws: int = Field(1000, ge=1)
    exhaustive_limit: int = Field(100000, ge=1)
    exhaustive_jobs: int = 1
    repair: bool = True

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]]) -> "SchemeSettings":
        """Build from the whole application config dict."""
        config = config or {}
        algorithms = dict(config.get('algorithms', {}) or {})
        return cls(solver=SolverSettings.from_config(config.get('solver')), **algorithms)
