"""Seeded random PD tensors and Monte Carlo estimation.

Every draw is a pure function of ``(root_seed, trial_index)``: the pair keys a
numpy ``SeedSequence`` so trials can be generated in any order or in
parallel and still reproduce bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from .errors import NotPositiveDefiniteError, ShapeMismatchError
from .runner import TrialRunner
from .tensor_core import HermitianTensor, Tensor, TensorShape, _as_shape, _hermitize, lambda_max, lambda_min

logger = logging.getLogger("tensormeans.sampling")

SEED_LIMIT = 2 ** 64


@dataclass(frozen=True)
class SpectralUniform:
    """H = U diag(lambda) U^H with lambda_i uniform on [m, M] and U Haar."""

    m: float
    M: float

    def __post_init__(self):
        if not 0 < self.m < self.M:
            raise ValueError(f"spectral_uniform needs 0 < m < M, got m={self.m}, M={self.M}")


@dataclass(frozen=True)
class Wishart:
    """(G G^H) / dof + ridge * I with G a D x dof complex standard Gaussian."""

    dof: int
    ridge: float

    def __post_init__(self):
        if self.dof < 1:
            raise ValueError(f"wishart needs dof >= 1, got {self.dof}")
        if not self.ridge > 0:
            raise ValueError(f"wishart needs ridge > 0, got {self.ridge}")


@dataclass(frozen=True, eq=False)
class TwoPoint:
    """X_a with probability prob_a, else X_b."""

    a: HermitianTensor
    b: HermitianTensor
    prob_a: float

    def __post_init__(self):
        if not 0.0 <= self.prob_a <= 1.0:
            raise ValueError(f"two_point needs prob_a in [0, 1], got {self.prob_a}")
        if self.a.shape != self.b.shape:
            raise ShapeMismatchError("two_point atoms must share a shape")
        for label, atom in (("X_a", self.a), ("X_b", self.b)):
            if not lambda_min(atom) > 0:
                raise NotPositiveDefiniteError(f"two_point atom {label} is not positive definite")


Law = Union[SpectralUniform, Wishart, TwoPoint]


@dataclass(frozen=True, eq=False)
class RandomPDSource:
    shape: TensorShape
    law: Law
    root_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", _as_shape(self.shape))
        if not 0 <= int(self.root_seed) < SEED_LIMIT:
            raise ValueError(f"root_seed must be a 64-bit unsigned integer, got {self.root_seed}")
        object.__setattr__(self, "root_seed", int(self.root_seed))
        dim = self.shape.flat_dim
        if isinstance(self.law, Wishart) and self.law.dof < dim:
            raise ValueError(f"wishart needs dof >= D = {dim}, got {self.law.dof}")
        if isinstance(self.law, TwoPoint) and self.law.a.shape != self.shape:
            raise ShapeMismatchError(
                f"two_point atoms have mode_dims {self.law.a.shape.mode_dims}, source has {self.shape.mode_dims}"
            )

    @classmethod
    def spectral_uniform(cls, shape, m: float, M: float, root_seed: int = 0) -> "RandomPDSource":
        return cls(_as_shape(shape), SpectralUniform(m, M), root_seed)

    @classmethod
    def wishart(cls, shape, dof: int, ridge: float, root_seed: int = 0) -> "RandomPDSource":
        return cls(_as_shape(shape), Wishart(dof, ridge), root_seed)

    @classmethod
    def two_point(cls, a: HermitianTensor, b: HermitianTensor, prob_a: float,
                  root_seed: int = 0) -> "RandomPDSource":
        return cls(a.shape, TwoPoint(a, b, prob_a), root_seed)

    def window(self):
        """Almost-sure spectral window (m, M) of the law, or None when unbounded."""
        if isinstance(self.law, SpectralUniform):
            return self.law.m, self.law.M
        if isinstance(self.law, TwoPoint):
            lows = [lambda_min(x) for x in (self.law.a, self.law.b)]
            highs = [lambda_max(x) for x in (self.law.a, self.law.b)]
            return min(lows), max(highs)
        return None


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    n: int


def trial_rng(root_seed: int, trial_index: int, stream: Optional[int] = None) -> np.random.Generator:
    """Generator keyed by (root_seed, trial_index[, stream])."""
    key = (int(trial_index),) if stream is None else (int(trial_index), int(stream))
    return np.random.default_rng(np.random.SeedSequence(entropy=int(root_seed), spawn_key=key))


def _complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from QR of a complex Gaussian with phase correction."""
    q, r = linalg.qr(_complex_gaussian(rng, dim, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample(source: RandomPDSource, trial_index: int) -> HermitianTensor:
    dim = source.shape.flat_dim
    rng = trial_rng(source.root_seed, trial_index)
    law = source.law

    if isinstance(law, SpectralUniform):
        eigenvalues = rng.uniform(law.m, law.M, size=dim)
        u = haar_unitary(dim, rng)
        matrix = (u * eigenvalues) @ u.conj().T
    elif isinstance(law, Wishart):
        g = _complex_gaussian(rng, dim, law.dof)
        matrix = (g @ g.conj().T) / law.dof + law.ridge * np.eye(dim)
    elif isinstance(law, TwoPoint):
        return law.a if rng.random() < law.prob_a else law.b
    else:
        raise TypeError(f"unknown law {type(law).__name__}")

    return HermitianTensor._unchecked(source.shape, _hermitize(matrix))


def draw_inputs(source: RandomPDSource, trial: int, k: int) -> List[HermitianTensor]:
    """The k inputs of a trial, drawn at trial indices t*k .. t*k + k - 1."""
    return [sample(source, trial * k + j) for j in range(k)]


def random_invertible(dim: int, rng: np.random.Generator, cond: float = 100.0,
                      mode_dims: Optional[Sequence[int]] = None) -> Tensor:
    """U diag(s) V^H with Haar U, V and singular values spread over [1, cond]."""
    singular = np.geomspace(1.0, cond, dim) if dim > 1 else np.ones(1)
    u, v = haar_unitary(dim, rng), haar_unitary(dim, rng)
    shape = _as_shape(mode_dims if mode_dims is not None else (dim,))
    return Tensor._unchecked(shape, (u * singular) @ v.conj().T)


def random_psd(dim: int, rng: np.random.Generator, scale: float = 1.0,
               mode_dims: Optional[Sequence[int]] = None) -> HermitianTensor:
    g = _complex_gaussian(rng, dim, dim)
    shape = _as_shape(mode_dims if mode_dims is not None else (dim,))
    return HermitianTensor._unchecked(shape, _hermitize(scale * (g @ g.conj().T) / dim))


def random_reflection(dim: int, rng: np.random.Generator,
                      mode_dims: Optional[Sequence[int]] = None) -> HermitianTensor:
    """Hermitian unitary U diag(+-1) U^H, so B^2 = I."""
    u = haar_unitary(dim, rng)
    signs = rng.choice([-1.0, 1.0], size=dim)
    shape = _as_shape(mode_dims if mode_dims is not None else (dim,))
    return HermitianTensor._unchecked(shape, _hermitize((u * signs) @ u.conj().T))


def monte_carlo(source: RandomPDSource, k: int, statistic: Callable[[List[HermitianTensor]], Any],
                n: int, reducer: str = "mean", workers: int = 1) -> MonteCarloEstimate:
    """Estimate E[statistic] or Pr[statistic] over n seeded trials.

    Args:
        source: Law and seed of the inputs.
        k: Inputs per trial.
        statistic: Maps the k inputs of a trial to a real value
            (``reducer="mean"``) or a boolean event (``reducer="prob_of_event"``).
        n: Number of trials.
        reducer: ``"mean"`` or ``"prob_of_event"``.
        workers: Worker threads; the estimate does not depend on it.

    Returns:
        MonteCarloEstimate with the sample-variance stderr for means and the
        binomial stderr for probabilities.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    if k < 1:
        raise ValueError(f"need at least one input per trial, got k={k}")
    if reducer not in ("mean", "prob_of_event"):
        raise ValueError(f"unknown reducer '{reducer}'")

    values = TrialRunner(workers).map(lambda t: statistic(draw_inputs(source, t, k)), n)

    if reducer == "prob_of_event":
        hits = np.asarray([bool(v) for v in values], dtype=float)
        prob = float(np.mean(hits))
        return MonteCarloEstimate(prob, math.sqrt(prob * (1.0 - prob) / n), n)

    data = np.asarray(values, dtype=float)
    mean = float(np.mean(data))
    stderr = float(np.std(data, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MonteCarloEstimate(mean, stderr, n)
