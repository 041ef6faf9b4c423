"""Kubo-Ando binary means and multivariate means of PD Hermitian tensors.

Binary means follow the Kubo-Ando correspondence

    X sigma Y = X^{1/2} g(X^{-1/2} Y X^{-1/2}) X^{1/2}

with ``g`` a normalized operator monotone representing function. Deformed
means are solved as the fixed point X = M(X sigma A_1, ..., X sigma A_k) by
iterating from alpha * I above every input; the map is a strict contraction
in the Thompson metric for the power functions used here. The Karcher mean
is found by a damped Riemannian gradient iteration started at the arithmetic
mean.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import ToleranceConfig, _log_event, resolve_tolerances
from .errors import (
    ConvergenceError,
    InvalidMeanError,
    InvalidWeightsError,
    NotPositiveDefiniteError,
    NumericalBreakdownError,
    ShapeMismatchError,
)
from .guard import positive_definite
from .tensor_core import (
    HermitianTensor,
    Tensor,
    _as_hermitian,
    _thompson,
    apply_spectral_function,
    exp,
    hermitian_eig,
    identity,
    inverse,
    lambda_max,
    lambda_min,
    log,
    loewner_leq,
    norm,
    sandwich,
    sqrt_and_inverse_sqrt,
)

logger = logging.getLogger("tensormeans.means")

WEIGHT_TOL = 1e-12
NORMALIZATION_TOL = 1e-12
MIN_KARCHER_STEP = 2.0 ** -40
# Accuracy accepted when a solver stalls at rounding level above fixed_point_tol.
# Karcher: relative to max_i ||log A_i||; deformed: relative to ||X||.
KARCHER_RESIDUAL_REL = 1e-8
DEFORMED_RESIDUAL_REL = 1e-9
# Iterations without a new smallest Thompson step before a deformed solve counts as stalled
STALL_WINDOW = 50

TensorList = Sequence[HermitianTensor]


@dataclass(frozen=True)
class Weights:
    """Probability vector over the k inputs of a multivariate mean."""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise InvalidWeightsError("weights must be non-empty")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise InvalidWeightsError(f"weights must be finite and nonnegative, got {values}")
        total = math.fsum(values)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidWeightsError(f"weights must sum to 1, got {total!r}")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, k: int) -> "Weights":
        if k < 1:
            raise InvalidWeightsError(f"need at least one input, got k={k}")
        return cls(tuple([1.0 / k] * k))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def _as_weights(w: Union[Weights, Sequence[float]]) -> Weights:
    return w if isinstance(w, Weights) else Weights(tuple(w))


@dataclass(frozen=True)
class Transform:
    """A deformation applied to a representing function."""

    kind: str  # "root_deform" | "power_deform" | "adjoint"
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind == "root_deform":
            if self.p is None or not self.p >= 1:
                raise InvalidMeanError(f"root_deform needs p >= 1, got {self.p}")
        elif self.kind == "power_deform":
            if self.p is None or not 0 < self.p <= 1:
                raise InvalidMeanError(f"power_deform needs p in (0, 1], got {self.p}")
        elif self.kind != "adjoint":
            raise InvalidMeanError(f"unknown transform '{self.kind}'")


@dataclass(frozen=True)
class RepresentingFunction:
    """Representing function g of a Kubo-Ando mean, with optional deformations.

    Transforms apply in order: ``RepresentingFunction.power(q).root_deformed(p)``
    evaluates ``x -> g(x^{1/p})``.
    """

    kind: str  # "power" | "arithmetic_half" | "custom"
    q: Optional[float] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    pmi_flag: bool = False
    transforms: Tuple[Transform, ...] = ()
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind == "power":
            if self.q is None or not -1 <= self.q <= 1 or self.q == 0:
                raise InvalidMeanError(f"power representing function needs q in [-1, 1] without 0, got {self.q}")
        elif self.kind == "custom":
            if not callable(self.func):
                raise InvalidMeanError("custom representing function needs a callable")
        elif self.kind != "arithmetic_half":
            raise InvalidMeanError(f"unknown representing function kind '{self.kind}'")

        at_one = float(np.asarray(self(np.array([1.0])), dtype=float).reshape(-1)[0])
        if not abs(at_one - 1.0) <= NORMALIZATION_TOL:
            raise InvalidMeanError(f"representing function must satisfy g(1) = 1, got {at_one!r}")

    @classmethod
    def power(cls, q: float) -> "RepresentingFunction":
        return cls(kind="power", q=float(q))

    @classmethod
    def arithmetic_half(cls) -> "RepresentingFunction":
        return cls(kind="arithmetic_half")

    @classmethod
    def custom(cls, func: Callable, pmi: bool = False, label: Optional[str] = None) -> "RepresentingFunction":
        return cls(kind="custom", func=func, pmi_flag=pmi, label=label)

    def _with(self, transform: Transform) -> "RepresentingFunction":
        return replace(self, transforms=self.transforms + (transform,))

    def root_deformed(self, p: float) -> "RepresentingFunction":
        """sigma_{1/p}: x -> g(x^{1/p})."""
        return self._with(Transform("root_deform", float(p)))

    def power_deformed(self, p: float) -> "RepresentingFunction":
        """sigma_p: x -> g(x^p)."""
        return self._with(Transform("power_deform", float(p)))

    def adjoint(self) -> "RepresentingFunction":
        """sigma*: x -> 1 / g(1/x)."""
        return self._with(Transform("adjoint"))

    @property
    def pmi(self) -> bool:
        if self.kind == "power":
            return 0 < self.q <= 1
        if self.kind == "arithmetic_half":
            return True
        return self.pmi_flag

    @property
    def power_exponent(self) -> Optional[float]:
        """Exponent e when the function is exactly x -> x^e, else None."""
        if self.kind != "power":
            return None
        exponent = self.q
        for t in self.transforms:
            if t.kind == "root_deform":
                exponent = exponent / t.p
            elif t.kind == "power_deform":
                exponent = exponent * t.p
        return exponent

    def _base(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            return np.power(x, self.q)
        if self.kind == "arithmetic_half":
            return (1.0 + x) / 2.0
        return np.asarray(self.func(x), dtype=float)

    def _apply(self, x: np.ndarray, depth: int) -> np.ndarray:
        if depth == 0:
            return self._base(x)
        t = self.transforms[depth - 1]
        if t.kind == "root_deform":
            return self._apply(np.power(x, 1.0 / t.p), depth - 1)
        if t.kind == "power_deform":
            return self._apply(np.power(x, t.p), depth - 1)
        return 1.0 / self._apply(1.0 / x, depth - 1)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._apply(np.asarray(x, dtype=float), len(self.transforms))

    def describe(self) -> str:
        if self.kind == "power":
            text = f"power(q={self.q:g})"
        elif self.kind == "custom":
            text = f"custom({self.label or 'f'})"
        else:
            text = self.kind
        for t in self.transforms:
            text += f".{t.kind}" + (f"(p={t.p:g})" if t.p is not None else "")
        return text


@dataclass(frozen=True)
class MeanSpec:
    """Declarative description of a multivariate mean."""

    kind: str  # arithmetic | harmonic | power | karcher | deformed | adjoint
    weights: Optional[Weights] = None
    q: Optional[float] = None
    base: Optional["MeanSpec"] = None
    sigma: Optional[RepresentingFunction] = None
    of: Optional["MeanSpec"] = None

    def __post_init__(self):
        if self.kind in ("arithmetic", "harmonic", "karcher", "power"):
            if self.weights is None:
                raise InvalidMeanError(f"{self.kind} mean needs weights")
            object.__setattr__(self, "weights", _as_weights(self.weights))
            if self.kind == "power":
                if self.q is None or self.q == 0:
                    raise InvalidMeanError("power mean with q = 0 is the Karcher mean; use karcher_mean")
                if not -1 <= self.q <= 1:
                    raise InvalidMeanError(f"power mean needs q in [-1, 1], got {self.q}")
        elif self.kind == "deformed":
            if self.base is None or self.sigma is None:
                raise InvalidMeanError("deformed mean needs a base mean and a representing function")
        elif self.kind == "adjoint":
            if self.of is None:
                raise InvalidMeanError("adjoint mean needs the mean it is the adjoint of")
        else:
            raise InvalidMeanError(f"unknown mean kind '{self.kind}'")

    @classmethod
    def arithmetic(cls, w) -> "MeanSpec":
        return cls(kind="arithmetic", weights=_as_weights(w))

    @classmethod
    def harmonic(cls, w) -> "MeanSpec":
        return cls(kind="harmonic", weights=_as_weights(w))

    @classmethod
    def power(cls, w, q: float) -> "MeanSpec":
        return cls(kind="power", weights=_as_weights(w), q=float(q))

    @classmethod
    def karcher(cls, w) -> "MeanSpec":
        return cls(kind="karcher", weights=_as_weights(w))

    @classmethod
    def deformed(cls, base: "MeanSpec", sigma: RepresentingFunction) -> "MeanSpec":
        return cls(kind="deformed", base=base, sigma=sigma)

    @classmethod
    def adjoint(cls, of: "MeanSpec") -> "MeanSpec":
        if of.kind == "adjoint":
            return of.of
        return cls(kind="adjoint", of=of)

    @property
    def input_weights(self) -> Weights:
        if self.kind == "deformed":
            return self.base.input_weights
        if self.kind == "adjoint":
            return self.of.input_weights
        return self.weights

    @property
    def arity(self) -> int:
        return len(self.input_weights)

    def describe(self) -> str:
        if self.kind == "power":
            return f"power(q={self.q:g})"
        if self.kind == "deformed":
            return f"deformed({self.base.describe()}, {self.sigma.describe()})"
        if self.kind == "adjoint":
            return f"adjoint({self.of.describe()})"
        return self.kind


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    final_step_thompson: float
    residual_norm: float
    converged: bool

    def to_dict(self) -> dict:
        return asdict(self)


CLOSED_FORM = SolveDiagnostics(iterations=0, final_step_thompson=0.0, residual_norm=0.0, converged=True)


@dataclass(frozen=True)
class PowerLimitStep:
    q: float
    mean: HermitianTensor
    distance: float


def adjoint_mean(M: MeanSpec) -> MeanSpec:
    return MeanSpec.adjoint(M)


def _prepare(tensors: TensorList, k: Optional[int] = None) -> List[HermitianTensor]:
    tensors = [_as_hermitian(A) for A in tensors]
    if not tensors:
        raise ShapeMismatchError("a mean needs at least one input")
    if k is not None and len(tensors) != k:
        raise ShapeMismatchError(f"expected {k} inputs for the weights, got {len(tensors)}")
    shape = tensors[0].shape
    for A in tensors[1:]:
        if A.shape != shape:
            raise ShapeMismatchError(f"inputs disagree in shape: {shape.mode_dims} vs {A.shape.mode_dims}")
    return tensors


def _binary(X: HermitianTensor, Y: HermitianTensor, g: Callable, exponent: Optional[float] = None) -> HermitianTensor:
    if exponent == 1:
        return Y
    root, inv_root = sqrt_and_inverse_sqrt(X)
    return sandwich(root, apply_spectral_function(sandwich(inv_root, Y), g))


def _translate(X: HermitianTensor, tensors: TensorList, sigma: RepresentingFunction) -> List[HermitianTensor]:
    """[X sigma A for A in tensors] sharing one decomposition of X."""
    if sigma.power_exponent == 1:
        return list(tensors)
    root, inv_root = sqrt_and_inverse_sqrt(X)
    return [sandwich(root, apply_spectral_function(sandwich(inv_root, A), sigma)) for A in tensors]


@positive_definite("X", "Y")
def binary_mean(X: Tensor, Y: Tensor, g: RepresentingFunction) -> HermitianTensor:
    """Kubo-Ando mean X sigma Y for the representing function ``g``."""
    X, Y = _as_hermitian(X), _as_hermitian(Y)
    if X.shape != Y.shape:
        raise ShapeMismatchError(f"shape mismatch: {X.shape.mode_dims} vs {Y.shape.mode_dims}")
    return _binary(X, Y, g, g.power_exponent)


@positive_definite("X", "Y")
def geometric_power_binary(X: Tensor, Y: Tensor, q: float) -> HermitianTensor:
    """Weighted geometric mean X #_q Y = X^{1/2} (X^{-1/2} Y X^{-1/2})^q X^{1/2}."""
    X, Y = _as_hermitian(X), _as_hermitian(Y)
    if X.shape != Y.shape:
        raise ShapeMismatchError(f"shape mismatch: {X.shape.mode_dims} vs {Y.shape.mode_dims}")
    if q == 0:
        return X
    return _binary(X, Y, lambda x: np.power(x, q), float(q))


def _arithmetic(w: Weights, tensors: TensorList) -> HermitianTensor:
    acc = None
    for wi, A in zip(w.values, tensors):
        term = wi * A.entries
        acc = term if acc is None else acc + term
    return HermitianTensor._unchecked(tensors[0].shape, acc)


def _harmonic(w: Weights, tensors: TensorList) -> HermitianTensor:
    return inverse(_arithmetic(w, [inverse(A) for A in tensors]))


@positive_definite("tensors")
def weighted_arithmetic(w, tensors: TensorList) -> HermitianTensor:
    """Weighted arithmetic mean sum_i w_i A_i."""
    w = _as_weights(w)
    return _arithmetic(w, _prepare(tensors, len(w)))


@positive_definite("tensors")
def weighted_harmonic(w, tensors: TensorList) -> HermitianTensor:
    """Weighted harmonic mean (sum_i w_i A_i^{-1})^{-1}."""
    w = _as_weights(w)
    return _harmonic(w, _prepare(tensors, len(w)))


def _check_iterate(X: HermitianTensor, solver: str, iteration: int) -> None:
    if not np.all(np.isfinite(X.entries)):
        raise NumericalBreakdownError(f"{solver}: non-finite iterate at iteration {iteration}")
    smallest = hermitian_eig(X).lambda_min
    if not smallest > 0:
        raise NumericalBreakdownError(
            f"{solver}: iterate left the PD cone at iteration {iteration} (smallest eigenvalue {smallest:.3g})"
        )


def _deformed(base: MeanSpec, sigma: RepresentingFunction, tensors: List[HermitianTensor],
              tol: ToleranceConfig, raise_on_failure: bool) -> Tuple[HermitianTensor, SolveDiagnostics]:
    alpha = max(lambda_max(A) for A in tensors)
    X = identity(tensors[0].shape) * alpha
    step = math.inf
    best_step = math.inf
    since_best = 0
    stalled = False
    converged = False
    iterations = 0

    while iterations < tol.max_iterations:
        iterations += 1
        X_next, _ = _evaluate(base, _translate(X, tensors, sigma), tol)
        _check_iterate(X_next, "deformed_mean", iterations)
        step = _thompson(X, X_next)
        X = X_next
        if step <= tol.fixed_point_tol:
            converged = True
            break
        # The map is a strict contraction, so exact steps keep shrinking
        if step < best_step:
            best_step, since_best = step, 0
        else:
            since_best += 1
            if since_best >= STALL_WINDOW:
                stalled = True
                break

    image, _ = _evaluate(base, _translate(X, tensors, sigma), tol)
    residual = norm(X - image)
    if stalled and residual <= DEFORMED_RESIDUAL_REL * norm(X):
        converged = True
    diagnostics = SolveDiagnostics(iterations, float(step), float(residual), converged)

    if not converged:
        _log_event("deformed_mean_not_converged", logging.WARNING, log=logger, mean=base.describe(),
                   sigma=sigma.describe(), stalled=stalled, **diagnostics.to_dict())
        if raise_on_failure:
            reason = "stalled after" if stalled else "did not converge in"
            raise ConvergenceError(
                f"deformed mean {reason} {iterations} iterations (last Thompson step {step:.3g})",
                diagnostics=diagnostics,
                last_iterate=X,
            )
    else:
        _log_event("deformed_mean_solved", logging.DEBUG, log=logger, mean=base.describe(),
                   sigma=sigma.describe(), **diagnostics.to_dict())
    return X, diagnostics


@positive_definite("tensors")
def deformed_mean(base: MeanSpec, sigma: RepresentingFunction, tensors: TensorList,
                  tol: Optional[ToleranceConfig] = None,
                  raise_on_failure: bool = True) -> Tuple[HermitianTensor, SolveDiagnostics]:
    """Solve X = base(X sigma A_1, ..., X sigma A_k) by fixed-point iteration.

    Iterates X_{n+1} = base(X_n sigma A_i) from X_0 = alpha * I with
    alpha = max_i lambda_max(A_i) until the Thompson step is at most
    ``tol.fixed_point_tol``. A solve whose smallest step has not improved for
    STALL_WINDOW iterations stops early, and counts as converged when
    ||X - base(X sigma A)|| <= DEFORMED_RESIDUAL_REL * ||X||. The spectral
    residual of the returned point is reported in the diagnostics.

    Raises:
        ConvergenceError: when ``max_iterations`` is exhausted or the solve
            stalls short of that residual, and ``raise_on_failure`` is set;
            the error carries the diagnostics.
        NumericalBreakdownError: when an iterate is not PD.
    """
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, base.arity)
    return _deformed(base, sigma, tensors, tol, raise_on_failure)


def _power_parts(w: Weights, q: float) -> Tuple[MeanSpec, RepresentingFunction]:
    if q == 0:
        raise InvalidMeanError("power mean with q = 0 is the Karcher mean; use karcher_mean")
    if not -1 <= q <= 1:
        raise InvalidMeanError(f"power mean needs q in [-1, 1], got {q}")
    if q > 0:
        return MeanSpec.arithmetic(w), RepresentingFunction.power(q)
    return MeanSpec.harmonic(w), RepresentingFunction.power(-q)


@positive_definite("tensors")
def power_mean(w, q: float, tensors: TensorList, tol: Optional[ToleranceConfig] = None,
               raise_on_failure: bool = True) -> Tuple[HermitianTensor, SolveDiagnostics]:
    """Weighted power mean P_{w,q}: arithmetic base with #_q for q > 0, harmonic base with #_{-q} for q < 0."""
    w = _as_weights(w)
    base, sigma = _power_parts(w, q)
    tol = resolve_tolerances(tol)
    return _deformed(base, sigma, _prepare(tensors, len(w)), tol, raise_on_failure)


def _karcher_residual(X: HermitianTensor, w: Weights, tensors: TensorList) -> Tuple[HermitianTensor, float]:
    _, inv_root = sqrt_and_inverse_sqrt(X)
    acc = np.zeros_like(X.entries)
    for wi, A in zip(w.values, tensors):
        if wi:
            acc = acc + wi * log(sandwich(inv_root, A)).entries
    residual = HermitianTensor._unchecked(X.shape, acc)
    return residual, norm(residual)


@positive_definite("X", "tensors")
def karcher_residual(X: Tensor, w, tensors: TensorList) -> Tuple[HermitianTensor, float]:
    """Karcher residual R = sum_i w_i log(X^{-1/2} A_i X^{-1/2}) and its spectral norm."""
    w = _as_weights(w)
    tensors = _prepare(tensors, len(w))
    X = _as_hermitian(X)
    if X.shape != tensors[0].shape:
        raise ShapeMismatchError(f"shape mismatch: {X.shape.mode_dims} vs {tensors[0].shape.mode_dims}")
    return _karcher_residual(X, w, tensors)


def _karcher(w: Weights, tensors: List[HermitianTensor], tol: ToleranceConfig,
             raise_on_failure: bool) -> Tuple[HermitianTensor, SolveDiagnostics]:
    X = _arithmetic(w, tensors)
    step = 1.0
    norm_old = math.inf
    iterations = 0
    converged = False

    while True:
        R, r_norm = _karcher_residual(X, w, tensors)
        if r_norm <= tol.fixed_point_tol:
            converged = True
            break
        if iterations >= tol.max_iterations or step < MIN_KARCHER_STEP:
            break

        # Halve the step whenever the residual fails to decrease
        if r_norm < norm_old:
            norm_old = r_norm
        else:
            step = step / 2.0

        root, _ = sqrt_and_inverse_sqrt(X)
        X = sandwich(root, exp(R * step))
        iterations += 1
        _check_iterate(X, "karcher_mean", iterations)

    if not converged and step < MIN_KARCHER_STEP:
        scale = max(norm(log(A)) for A in tensors)
        converged = r_norm <= KARCHER_RESIDUAL_REL * scale

    diagnostics = SolveDiagnostics(iterations, float(r_norm), float(r_norm), converged)
    if not converged:
        _log_event("karcher_mean_not_converged", logging.WARNING, log=logger, step=step, **diagnostics.to_dict())
        if raise_on_failure:
            raise ConvergenceError(
                f"Karcher mean did not converge in {iterations} iterations (residual {r_norm:.3g})",
                diagnostics=diagnostics,
                last_iterate=X,
            )
    else:
        _log_event("karcher_mean_solved", logging.DEBUG, log=logger, **diagnostics.to_dict())
    return X, diagnostics


@positive_definite("tensors")
def karcher_mean(w, tensors: TensorList, tol: Optional[ToleranceConfig] = None,
                 raise_on_failure: bool = True) -> Tuple[HermitianTensor, SolveDiagnostics]:
    """Karcher (Riemannian barycenter) mean of PD tensors.

    Solves sum_i w_i log(X^{-1/2} A_i X^{-1/2}) = 0 with the update
    X <- X^{1/2} exp(theta R(X)) X^{1/2}, starting at the weighted arithmetic
    mean with theta = 1 and halving theta whenever the residual norm fails to
    decrease. Convergence is declared when the residual's spectral norm, which
    is the Thompson length of the undamped step, is at most
    ``tol.fixed_point_tol``. When rounding keeps the residual above that and
    theta falls below MIN_KARCHER_STEP, the iterate is still accepted if its
    residual is at most KARCHER_RESIDUAL_REL * max_i ||log A_i||.
    """
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    return _karcher(w, _prepare(tensors, len(w)), tol, raise_on_failure)


def _evaluate(spec: MeanSpec, tensors: List[HermitianTensor],
              tol: ToleranceConfig) -> Tuple[HermitianTensor, SolveDiagnostics]:
    if spec.kind == "arithmetic":
        return _arithmetic(spec.weights, tensors), CLOSED_FORM
    if spec.kind == "harmonic":
        return _harmonic(spec.weights, tensors), CLOSED_FORM
    if spec.kind == "power":
        base, sigma = _power_parts(spec.weights, spec.q)
        return _deformed(base, sigma, tensors, tol, True)
    if spec.kind == "karcher":
        return _karcher(spec.weights, tensors, tol, True)
    if spec.kind == "deformed":
        return _deformed(spec.base, spec.sigma, tensors, tol, True)
    # adjoint: invert inputs, evaluate, invert the result
    value, diagnostics = _evaluate(spec.of, [inverse(A) for A in tensors], tol)
    return inverse(value), diagnostics


@positive_definite("tensors")
def evaluate(spec: MeanSpec, tensors: TensorList,
             tol: Optional[ToleranceConfig] = None) -> Tuple[HermitianTensor, SolveDiagnostics]:
    """Evaluate any MeanSpec on PD inputs."""
    tol = resolve_tolerances(tol)
    return _evaluate(spec, _prepare(tensors, spec.arity), tol)


def evaluate_adjoint(spec: MeanSpec, tensors: TensorList,
                     tol: Optional[ToleranceConfig] = None) -> Tuple[HermitianTensor, SolveDiagnostics]:
    """M*(A_1, ..., A_k) = M(A_1^{-1}, ..., A_k^{-1})^{-1}."""
    return evaluate(adjoint_mean(spec), tensors, tol)


@positive_definite("tensors")
def karcher_sensitivity(w, tensors: TensorList, index: int, direction: Tensor, h: float = 1e-4,
                        tol: Optional[ToleranceConfig] = None) -> HermitianTensor:
    """Central finite difference of the Karcher mean along ``direction`` in input ``index``."""
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    if not 0 <= index < len(tensors):
        raise IndexError(f"input index {index} out of range for {len(tensors)} inputs")
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    direction = _as_hermitian(direction)

    shifted = []
    for sign in (1.0, -1.0):
        moved = tensors[index] + direction * (sign * h)
        if not lambda_min(moved) > 0:
            raise NotPositiveDefiniteError(
                f"step h={h:g} drives input {index} out of the PD cone"
            )
        inputs = list(tensors)
        inputs[index] = moved
        shifted.append(_karcher(w, inputs, tol, True)[0])

    plus, minus = shifted
    return HermitianTensor._unchecked(plus.shape, (plus.entries - minus.entries) / (2.0 * h))


@positive_definite("tensors")
def karcher_power_limit(w, tensors: TensorList, levels: int = 6,
                        tol: Optional[ToleranceConfig] = None) -> List[PowerLimitStep]:
    """Power means P_{w, 2^-j}, j = 1..levels, with their Thompson distance to the Karcher mean."""
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    target, _ = _karcher(w, tensors, tol, True)
    steps = []
    for j in range(1, levels + 1):
        q = 2.0 ** -j
        base, sigma = _power_parts(w, q)
        value, _ = _deformed(base, sigma, tensors, tol, True)
        steps.append(PowerLimitStep(q=q, mean=value, distance=_thompson(value, target)))
    return steps


@positive_definite("X", "tensors")
def classify_candidate(X: Tensor, base: MeanSpec, sigma: RepresentingFunction, tensors: TensorList,
                       tol: Optional[ToleranceConfig] = None) -> str:
    """Place X relative to the deformed mean through one application of the fixed-point map.

    X <= base(X sigma A) makes X a subsolution, which lies below the deformed
    mean; base(X sigma A) <= X makes it a supersolution, which lies above.
    """
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, base.arity)
    X = _as_hermitian(X)
    image, _ = _evaluate(base, _translate(X, tensors, sigma), tol)
    below = loewner_leq(X, image, tol).holds
    above = loewner_leq(image, X, tol).holds
    if below and above:
        return "fixed_point"
    if below:
        return "subsolution"
    if above:
        return "supersolution"
    return "neither"
