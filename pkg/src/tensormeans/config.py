"""
Experiment configuration for the CLI.

Usage:
    config = load_config("experiment.json")
    source = config.build_source()
    spec = config.mean_spec()
"""

import json
import os
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .core import ToleranceConfig
from .errors import ConfigError
from .means import MeanSpec, RepresentingFunction, Weights
from .sampling import RandomPDSource
from .tensor_core import TensorShape, identity


def _default_workers() -> int:
    value = os.environ.get("TENSORMEANS_WORKERS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


class SourceConfig(BaseModel):
    """Law of the random inputs. ``atoms`` are scalars a, b standing for a*I and b*I."""

    model_config = ConfigDict(extra="forbid")

    law: Literal["spectral_uniform", "wishart", "two_point"] = "spectral_uniform"
    m: Optional[float] = None
    M: Optional[float] = None
    dof: Optional[int] = None
    ridge: Optional[float] = None
    atoms: Optional[List[float]] = None
    prob_a: Optional[float] = None

    @model_validator(mode="after")
    def check_parameters(self):
        required = {
            "spectral_uniform": ("m", "M"),
            "wishart": ("dof", "ridge"),
            "two_point": ("atoms", "prob_a"),
        }[self.law]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"law '{self.law}' needs {', '.join(missing)}")
        if self.law == "two_point":
            if len(self.atoms) != 2:
                raise ValueError(f"two_point needs exactly two atoms, got {len(self.atoms)}")
            if min(self.atoms) <= 0:
                raise ValueError(f"two_point atoms must be positive, got {self.atoms}")
        return self

    def build(self, shape: TensorShape, seed: int) -> RandomPDSource:
        if self.law == "spectral_uniform":
            return RandomPDSource.spectral_uniform(shape, self.m, self.M, seed)
        if self.law == "wishart":
            return RandomPDSource.wishart(shape, self.dof, self.ridge, seed)
        a, b = self.atoms
        return RandomPDSource.two_point(identity(shape) * a, identity(shape) * b, self.prob_a, seed)


class MeanConfig(BaseModel):
    """Descriptor of a MeanSpec; weights come from the enclosing experiment."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["arithmetic", "harmonic", "power", "karcher", "deformed", "adjoint"] = "karcher"
    q: Optional[float] = None
    base: Literal["arithmetic", "harmonic"] = "arithmetic"
    sigma_q: Optional[float] = None
    of: Optional["MeanConfig"] = None

    @model_validator(mode="after")
    def check_parameters(self):
        if self.kind == "power" and self.q is None:
            raise ValueError("power mean needs q")
        if self.kind == "deformed" and self.sigma_q is None:
            raise ValueError("deformed mean needs sigma_q")
        if self.kind == "adjoint" and self.of is None:
            raise ValueError("adjoint mean needs 'of'")
        return self

    def to_spec(self, weights: Weights) -> MeanSpec:
        if self.kind == "arithmetic":
            return MeanSpec.arithmetic(weights)
        if self.kind == "harmonic":
            return MeanSpec.harmonic(weights)
        if self.kind == "power":
            return MeanSpec.power(weights, self.q)
        if self.kind == "karcher":
            return MeanSpec.karcher(weights)
        if self.kind == "deformed":
            base = MeanSpec.arithmetic(weights) if self.base == "arithmetic" else MeanSpec.harmonic(weights)
            return MeanSpec.deformed(base, RepresentingFunction.power(self.sigma_q))
        return MeanSpec.adjoint(self.of.to_spec(weights))


MeanConfig.model_rebuild()


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    mode_dims: List[int] = Field(default_factory=lambda: [4])
    k: int = Field(default=3, ge=1)
    weights: Optional[List[float]] = None
    mean: MeanConfig = Field(default_factory=MeanConfig)
    p_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0])
    q_values: List[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0])
    r_values: List[float] = Field(default_factory=lambda: [1.0])
    c_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    source: SourceConfig = Field(default_factory=lambda: SourceConfig(law="spectral_uniform", m=1.0, M=2.0))
    trials: int = Field(default=100, ge=1)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    output_dir: str = "results"
    workers: int = Field(default_factory=_default_workers, ge=1)
    negative_control: Optional[Literal["invert"]] = None

    @model_validator(mode="after")
    def check_experiment(self):
        if not self.mode_dims or min(self.mode_dims) < 1:
            raise ValueError(f"mode_dims must be positive, got {self.mode_dims}")
        if self.weights is not None and len(self.weights) != self.k:
            raise ValueError(f"{len(self.weights)} weights given for k = {self.k} inputs")
        for name in ("p_values", "q_values", "r_values", "c_values"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if min(self.p_values) <= 0:
            raise ValueError(f"p_values must be positive, got {self.p_values}")
        if any(q == 0 or not -1 <= q <= 1 for q in self.q_values):
            raise ValueError(f"q_values must lie in [-1, 0) or (0, 1], got {self.q_values}")
        if min(self.r_values) < 1:
            raise ValueError(f"r_values must be >= 1, got {self.r_values}")
        if min(self.c_values) <= 0:
            raise ValueError(f"c_values must be positive, got {self.c_values}")
        # Build once so invalid weights or mean parameters surface as validation errors
        self.mean_spec()
        self.build_source()
        return self

    @property
    def shape(self) -> TensorShape:
        return TensorShape(tuple(self.mode_dims))

    def weight_values(self) -> Weights:
        return Weights.uniform(self.k) if self.weights is None else Weights(tuple(self.weights))

    def mean_spec(self) -> MeanSpec:
        return self.mean.to_spec(self.weight_values())

    def build_source(self) -> RandomPDSource:
        return self.source.build(self.shape, self.seed)

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None) -> "ExperimentConfig":
        update = {}
        if seed is not None:
            update["seed"] = seed
        if output_dir is not None:
            update["output_dir"] = str(output_dir)
        if not update:
            return self
        try:
            return ExperimentConfig.model_validate({**self.model_dump(), **update})
        except ValidationError as exc:
            raise ConfigError(f"invalid override: {exc}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration.

    Raises:
        ConfigError: the file cannot be read, is not JSON, or fails validation.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config '{path}' is not valid JSON: {exc}") from exc

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config '{path}': {exc}") from exc
