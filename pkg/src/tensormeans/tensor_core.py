"""Matricized Hermitian tensors and their spectral calculus.

An even-order tensor in C^{I_1 x ... x I_N x I_1 x ... x I_N} is stored as a
D x D complex matrix with D = I_1 * ... * I_N, flattening the first N indices
against the last N in row-major order. Under this encoding the Einstein
product is ordinary matrix multiplication, so every operation below works on
the matricized form.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .core import ToleranceConfig, resolve_tolerances
from .errors import (
    EigenSolverError,
    NotHermitianError,
    NotPositiveDefiniteError,
    ShapeMismatchError,
    SingularTensorError,
    SpectralDomainError,
)
from .guard import positive_definite

logger = logging.getLogger("tensormeans.tensor_core")

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class TensorShape:
    """Mode dimensions (I_1, ..., I_N) of an even-order square tensor."""

    mode_dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims:
            raise ShapeMismatchError("mode_dims must be non-empty")
        if any(d < 1 for d in dims):
            raise ShapeMismatchError(f"mode_dims must be positive, got {dims}")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def flat_dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def order(self) -> int:
        return 2 * len(self.mode_dims)

    @classmethod
    def square(cls, dim: int) -> "TensorShape":
        return cls((dim,))


def _as_shape(shape: Union[TensorShape, Sequence[int], int]) -> TensorShape:
    if isinstance(shape, TensorShape):
        return shape
    if isinstance(shape, (int, np.integer)):
        return TensorShape((int(shape),))
    return TensorShape(tuple(shape))


def _hermitize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def _freeze(matrix: np.ndarray) -> np.ndarray:
    matrix.flags.writeable = False
    return matrix


class Tensor:
    """A general square even-order tensor in matricized form."""

    __slots__ = ("shape", "_entries")

    def __init__(self, shape: Union[TensorShape, Sequence[int], int], entries):
        shape = _as_shape(shape)
        matrix = np.array(entries, dtype=np.complex128)
        dim = shape.flat_dim
        if matrix.shape != (dim, dim):
            raise ShapeMismatchError(
                f"entries of shape {matrix.shape} do not match mode_dims {shape.mode_dims} (expected {dim}x{dim})"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("tensor entries must be finite")
        self.shape = shape
        self._entries = _freeze(matrix)

    @classmethod
    def _unchecked(cls, shape: TensorShape, matrix: np.ndarray):
        obj = cls.__new__(cls)
        obj.shape = shape
        obj._entries = _freeze(matrix)
        if isinstance(obj, HermitianTensor):
            obj._spectrum = None
        return obj

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def flat_dim(self) -> int:
        return self.shape.flat_dim

    def conj_transpose(self) -> "Tensor":
        return Tensor._unchecked(self.shape, self._entries.conj().T.copy())

    def to_array(self) -> np.ndarray:
        """Fold back into the order-2N array of shape (I_1..I_N, I_1..I_N)."""
        return self._entries.reshape(self.shape.mode_dims + self.shape.mode_dims)

    @classmethod
    def from_array(cls, array):
        """Unfold an order-2N array whose trailing N modes repeat the leading N."""
        array = np.asarray(array, dtype=np.complex128)
        if array.ndim % 2 or array.ndim == 0:
            raise ShapeMismatchError(f"expected an even-order array, got order {array.ndim}")
        half = array.ndim // 2
        if array.shape[:half] != array.shape[half:]:
            raise ShapeMismatchError(f"array of shape {array.shape} is not square in its mode pairs")
        shape = TensorShape(array.shape[:half])
        return cls(shape, array.reshape(shape.flat_dim, shape.flat_dim))

    def _combine(self, other: "Tensor", matrix: np.ndarray) -> "Tensor":
        if isinstance(self, HermitianTensor) and isinstance(other, HermitianTensor):
            return HermitianTensor._unchecked(self.shape, matrix)
        return Tensor._unchecked(self.shape, matrix)

    def __add__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        _check_same_shape(self, other)
        return self._combine(other, self._entries + other._entries)

    def __sub__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        _check_same_shape(self, other)
        return self._combine(other, self._entries - other._entries)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        if isinstance(self, HermitianTensor) and np.isreal(scalar):
            return HermitianTensor._unchecked(self.shape, self._entries * float(np.real(scalar)))
        return Tensor._unchecked(self.shape, self._entries * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * -1.0

    def __matmul__(self, other):
        return einstein_product(self, other)

    def __repr__(self):
        return f"{type(self).__name__}(mode_dims={self.shape.mode_dims})"


class HermitianTensor(Tensor):
    """A Hermitian tensor; entries are re-Hermitized on construction."""

    __slots__ = ("_spectrum",)

    def __init__(self, shape: Union[TensorShape, Sequence[int], int], entries):
        super().__init__(shape, entries)
        matrix = self._entries
        deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
        if deviation > HERMITIAN_TOL:
            spectral = float(np.linalg.norm(matrix, 2))
            if deviation > HERMITIAN_TOL * (1.0 + spectral):
                raise NotHermitianError(
                    f"entries deviate from Hermitian by {deviation:.3g} (spectral norm {spectral:.3g})"
                )
        self._entries = _freeze(_hermitize(matrix))
        self._spectrum = None

    @classmethod
    def from_tensor(cls, tensor: Tensor) -> "HermitianTensor":
        if isinstance(tensor, HermitianTensor):
            return tensor
        return cls(tensor.shape, tensor.entries)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order and the matching unitary eigenbasis."""

    eigenvalues: np.ndarray
    eigenbasis: np.ndarray

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        return (self.eigenbasis * self.eigenvalues) @ self.eigenbasis.conj().T


class GaugeNorm(str, enum.Enum):
    """Unitarily invariant norms given by a gauge function of |eigenvalues|."""

    SPECTRAL = "spectral"
    TRACE = "trace"
    FROBENIUS = "frobenius"


class LoewnerComparison(NamedTuple):
    holds: bool
    margin: float


def _check_same_shape(a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape.mode_dims} vs {b.shape.mode_dims}")


def _as_hermitian(tensor: Tensor) -> HermitianTensor:
    return HermitianTensor.from_tensor(tensor)


def _is_diagonal(matrix: np.ndarray) -> bool:
    return np.count_nonzero(matrix) == np.count_nonzero(np.diagonal(matrix))


def identity(shape: Union[TensorShape, Sequence[int], int]) -> HermitianTensor:
    shape = _as_shape(shape)
    return HermitianTensor._unchecked(shape, np.eye(shape.flat_dim, dtype=np.complex128))


def from_diagonal(values: Iterable[float], mode_dims: Optional[Sequence[int]] = None) -> HermitianTensor:
    values = np.asarray(list(values), dtype=float)
    shape = _as_shape(mode_dims if mode_dims is not None else (len(values),))
    if shape.flat_dim != len(values):
        raise ShapeMismatchError(f"{len(values)} diagonal values do not fit mode_dims {shape.mode_dims}")
    return HermitianTensor._unchecked(shape, np.diag(values).astype(np.complex128))


def einstein_product(A: Tensor, B: Tensor) -> Tensor:
    """Einstein product A *_N B, i.e. the matrix product of the matricized operands."""
    _check_same_shape(A, B)
    return Tensor._unchecked(A.shape, A.entries @ B.entries)


def hermitian_eig(H: Tensor) -> Spectrum:
    H = _as_hermitian(H)
    if H._spectrum is not None:
        return H._spectrum
    try:
        values, vectors = linalg.eigh(H.entries)
    except linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver failed on a {H.flat_dim}x{H.flat_dim} tensor: {exc}") from exc
    spectrum = Spectrum(_freeze(values[::-1].copy()), _freeze(vectors[:, ::-1].copy()))
    H._spectrum = spectrum
    return spectrum


def _eigenvalues(H: HermitianTensor) -> np.ndarray:
    if H._spectrum is not None:
        return H._spectrum.eigenvalues
    try:
        return linalg.eigvalsh(H.entries)[::-1]
    except linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver failed: {exc}") from exc


def _evaluate(f: Callable, points: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        values = np.asarray(f(points))
    if np.iscomplexobj(values):
        raise SpectralDomainError("spectral function must be real-valued")
    values = np.broadcast_to(values.astype(float), points.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise SpectralDomainError(
            f"spectral function is undefined at eigenvalue {float(points[bad][0]):.6g}"
        )
    return values


def apply_spectral_function(H: Tensor, f: Callable[[np.ndarray], np.ndarray]) -> HermitianTensor:
    """Return U diag(f(lambda)) U^H, re-Hermitized.

    ``f`` is applied to the whole eigenvalue vector at once, so it must be
    vectorized (numpy ufuncs and lambdas over arrays are). Diagonal inputs
    bypass the eigensolver and are mapped entrywise.
    """
    H = _as_hermitian(H)
    matrix = H.entries
    if _is_diagonal(matrix):
        values = _evaluate(f, matrix.diagonal().real.copy())
        return HermitianTensor._unchecked(H.shape, np.diag(values).astype(np.complex128))
    spectrum = hermitian_eig(H)
    values = _evaluate(f, spectrum.eigenvalues)
    basis = spectrum.eigenbasis
    return HermitianTensor._unchecked(H.shape, _hermitize((basis * values) @ basis.conj().T))


def power(H: Tensor, p: float) -> HermitianTensor:
    if p == 1:
        return _as_hermitian(H)
    return apply_spectral_function(H, lambda x: np.power(x, p))


def sqrt(H: Tensor) -> HermitianTensor:
    return apply_spectral_function(H, np.sqrt)


def inverse(H: Tensor) -> HermitianTensor:
    return apply_spectral_function(H, lambda x: 1.0 / x)


def log(H: Tensor) -> HermitianTensor:
    return apply_spectral_function(H, np.log)


def exp(H: Tensor) -> HermitianTensor:
    return apply_spectral_function(H, np.exp)


def abs_tensor(H: Tensor) -> HermitianTensor:
    return apply_spectral_function(H, np.abs)


def sqrt_and_inverse_sqrt(X: Tensor) -> Tuple[HermitianTensor, HermitianTensor]:
    """Return (X^{1/2}, X^{-1/2}) from a single eigendecomposition."""
    X = _as_hermitian(X)
    matrix = X.entries
    if _is_diagonal(matrix):
        diag = matrix.diagonal().real
        if np.min(diag) <= 0:
            raise NotPositiveDefiniteError(f"smallest eigenvalue is {float(np.min(diag)):.6g}")
        root = np.sqrt(diag)
        return (
            HermitianTensor._unchecked(X.shape, np.diag(root).astype(np.complex128)),
            HermitianTensor._unchecked(X.shape, np.diag(1.0 / root).astype(np.complex128)),
        )
    spectrum = hermitian_eig(X)
    if spectrum.lambda_min <= 0:
        raise NotPositiveDefiniteError(f"smallest eigenvalue is {spectrum.lambda_min:.6g}")
    root = np.sqrt(spectrum.eigenvalues)
    basis = spectrum.eigenbasis
    basis_h = basis.conj().T
    return (
        HermitianTensor._unchecked(X.shape, _hermitize((basis * root) @ basis_h)),
        HermitianTensor._unchecked(X.shape, _hermitize((basis / root) @ basis_h)),
    )


def sandwich(outer: HermitianTensor, inner: HermitianTensor) -> HermitianTensor:
    """outer * inner * outer for Hermitian ``outer``, re-Hermitized."""
    matrix = outer.entries @ inner.entries @ outer.entries
    return HermitianTensor._unchecked(inner.shape, _hermitize(matrix))


def lambda_min(H: Tensor) -> float:
    return float(_eigenvalues(_as_hermitian(H))[-1])


def lambda_max(H: Tensor) -> float:
    return float(_eigenvalues(_as_hermitian(H))[0])


def is_positive_definite(H: Tensor) -> bool:
    return lambda_min(H) > 0


def trace(T: Tensor) -> Union[float, complex]:
    value = complex(np.trace(T.entries))
    if isinstance(T, HermitianTensor):
        return value.real
    return value


def norm(H: Tensor, gauge: Union[GaugeNorm, str] = GaugeNorm.SPECTRAL) -> float:
    gauge = GaugeNorm(gauge)
    magnitudes = np.abs(_eigenvalues(_as_hermitian(H)))
    if gauge is GaugeNorm.SPECTRAL:
        return float(np.max(magnitudes))
    if gauge is GaugeNorm.TRACE:
        return float(np.sum(magnitudes))
    return float(np.sqrt(np.sum(magnitudes ** 2)))


def loewner_leq(X: Tensor, Y: Tensor, tol: Optional[ToleranceConfig] = None) -> LoewnerComparison:
    """Decide X <= Y in the Loewner order, with margin lambda_min(Y - X)."""
    _check_same_shape(X, Y)
    tol = resolve_tolerances(tol)
    X, Y = _as_hermitian(X), _as_hermitian(Y)
    margin = lambda_min(Y - X)
    scale = max(1.0, norm(X), norm(Y))
    return LoewnerComparison(bool(margin >= -tol.loewner_tol * scale), float(margin))


def _ratio_eigenvalues(X: HermitianTensor, Y: HermitianTensor) -> np.ndarray:
    _, inv_root = sqrt_and_inverse_sqrt(X)
    values = _eigenvalues(sandwich(inv_root, Y))
    if values[-1] <= 0:
        raise NotPositiveDefiniteError(f"smallest eigenvalue is {float(values[-1]):.6g}")
    return values


def _thompson(X: HermitianTensor, Y: HermitianTensor) -> float:
    if X is Y or np.array_equal(X.entries, Y.entries):
        return 0.0
    return float(np.max(np.abs(np.log(_ratio_eigenvalues(X, Y)))))


@positive_definite("X", "Y")
def thompson_metric(X: Tensor, Y: Tensor) -> float:
    """Thompson metric max_i |log lambda_i(X^{-1/2} Y X^{-1/2})|."""
    _check_same_shape(X, Y)
    return _thompson(_as_hermitian(X), _as_hermitian(Y))


@positive_definite("X", "Y")
def max_ratio(X: Tensor, Y: Tensor) -> float:
    """Smallest alpha > 0 with X <= alpha * Y."""
    _check_same_shape(X, Y)
    return float(_ratio_eigenvalues(_as_hermitian(Y), _as_hermitian(X))[0])


def congruence(A: Tensor, Z: Tensor, tol: Optional[ToleranceConfig] = None) -> HermitianTensor:
    """Z^H * A * Z for an invertible Z."""
    _check_same_shape(A, Z)
    tol = resolve_tolerances(tol)
    A = _as_hermitian(A)
    smallest = float(linalg.svdvals(Z.entries)[-1])
    if smallest <= tol.eig_tol:
        raise SingularTensorError(f"congruence factor is singular (smallest singular value {smallest:.3g})")
    matrix = Z.entries.conj().T @ A.entries @ Z.entries
    return HermitianTensor._unchecked(A.shape, _hermitize(matrix))


def tensor_to_dict(T: Tensor) -> dict:
    flat = T.entries.reshape(-1)
    return {
        "mode_dims": list(T.shape.mode_dims),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def tensor_from_dict(data: dict) -> HermitianTensor:
    try:
        shape = TensorShape(tuple(data["mode_dims"]))
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"tensor record must hold 'mode_dims', 're' and 'im': {exc}") from exc
    expected = shape.flat_dim ** 2
    if re.size != expected or im.size != expected:
        raise ShapeMismatchError(
            f"mode_dims {shape.mode_dims} need {expected} entries, got re={re.size}, im={im.size}"
        )
    dim = shape.flat_dim
    return HermitianTensor(shape, (re + 1j * im).reshape(dim, dim))


def load_tensor(path: Union[str, Path]) -> HermitianTensor:
    with open(path, "r", encoding="utf-8") as fh:
        return tensor_from_dict(json.load(fh))


def save_tensor(T: Tensor, path: Union[str, Path]) -> Path:
    from .reports import canonical_dumps

    path = Path(path)
    path.write_text(canonical_dumps(tensor_to_dict(T)), encoding="utf-8")
    return path
