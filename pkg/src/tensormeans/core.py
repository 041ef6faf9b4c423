import contextvars
import json
import logging
import os
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field

# Setup local logging
logging.basicConfig(level=logging.WARNING, format='[%(levelname)s] %(message)s')
logger = logging.getLogger("tensormeans")

_env_level = os.environ.get("TENSORMEANS_LOG_LEVEL")
if _env_level:
    logger.setLevel(int(_env_level) if _env_level.isdigit() else _env_level.upper())

# The tolerances in force for the executing thread or task.
_current_tolerances_ctx = contextvars.ContextVar("current_tolerances", default=None)


def _log_event(event: str, level: int = logging.INFO, log: Optional[logging.Logger] = None, **fields):
    """Log in structured JSON format so runs can be parsed afterwards."""
    log_entry = {"event": event}
    log_entry.update(fields)
    (log or logger).log(level, json.dumps(log_entry, default=str))


def configure_logging(level: Union[int, str] = logging.INFO) -> logging.Logger:
    """Set the level of the package logger and return it."""
    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)
    return logger


class ToleranceConfig(BaseModel):
    """Numerical tolerances shared by every operation.

    Args:
        loewner_tol: Relative slack allowed in Loewner comparisons.
        eig_tol: Threshold below which an eigenvalue or singular value counts as zero.
        fixed_point_tol: Thompson-metric step at which fixed-point solvers stop.
        max_iterations: Iteration budget of every solver.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    loewner_tol: float = Field(default=1e-9, ge=0.0)
    eig_tol: float = Field(default=1e-10, ge=0.0)
    fixed_point_tol: float = Field(default=1e-12, ge=0.0)
    max_iterations: int = Field(default=10000, ge=1)

    def activate(self):
        """
        Context manager that makes these tolerances the active ones.
        Usage: with ToleranceConfig(loewner_tol=1e-8).activate(): ...
        """
        return ToleranceSession(self)


class ToleranceSession:
    def __init__(self, tolerances: ToleranceConfig):
        self.tolerances = tolerances
        self.token = None

    def __enter__(self):
        self.token = _current_tolerances_ctx.set(self.tolerances)
        _log_event("tolerance_session_start", logging.DEBUG, **self.tolerances.model_dump())
        return self.tolerances

    def __exit__(self, exc_type, exc_val, exc_tb):
        _current_tolerances_ctx.reset(self.token)
        _log_event("tolerance_session_end", logging.DEBUG)


_DEFAULT_TOLERANCES = ToleranceConfig()


def get_current_tolerances() -> ToleranceConfig:
    active = _current_tolerances_ctx.get()
    return active if active is not None else _DEFAULT_TOLERANCES


def resolve_tolerances(tol: Optional[ToleranceConfig]) -> ToleranceConfig:
    return tol if tol is not None else get_current_tolerances()
