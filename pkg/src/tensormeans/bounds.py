"""Kantorovich constants, Ando-Hiai type inequality checks and Markov tail bounds.

Every check returns ``InequalityReport`` values instead of asserting: the
margin is lambda_min(RHS - LHS) / ||RHS||_spec, and ``holds`` compares it
with the report's tolerance.
"""

from __future__ import annotations

import contextvars
import logging
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import ToleranceConfig, _log_event, resolve_tolerances
from .errors import DegenerateConstantError, WindowViolationError
from .guard import positive_definite, require_positive_definite
from .means import (
    MeanSpec,
    RepresentingFunction,
    Weights,
    _as_weights,
    _deformed,
    _karcher,
    _power_parts,
    _prepare,
)
from .runner import TrialRunner
from .sampling import RandomPDSource, draw_inputs
from .tensor_core import (
    HermitianTensor,
    Tensor,
    _as_hermitian,
    apply_spectral_function,
    identity,
    inverse,
    lambda_max,
    lambda_min,
    loewner_leq,
    norm,
    power,
    sandwich,
)

logger = logging.getLogger("tensormeans.bounds")

_inverted_orderings = contextvars.ContextVar("inverted_orderings", default=False)


@contextmanager
def inverted_orderings():
    """Swap both sides of every ordering and scalar comparison (negative control)."""
    token = _inverted_orderings.set(True)
    try:
        yield
    finally:
        _inverted_orderings.reset(token)


@dataclass(frozen=True)
class KantorovichParams:
    M: float
    m: float
    p: float

    def __post_init__(self):
        if not 0 < self.m < self.M:
            raise DegenerateConstantError(f"Kantorovich constant needs 0 < m < M, got m={self.m}, M={self.M}")

    @property
    def value(self) -> float:
        return kantorovich(self.M, self.m, self.p)


@dataclass(frozen=True)
class InequalityReport:
    name: str
    holds: bool
    margin: float
    witness_seed: int
    tolerance: float
    informational: bool = False
    strict: bool = False
    constant: Optional[float] = None

    @property
    def violated(self) -> bool:
        return not self.holds and not self.informational

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TailBoundReport:
    name: str
    empirical_prob: float
    mc_stderr: float
    trace_bound: float
    n_samples: int
    r: float
    threshold: Optional[float] = None
    informational: bool = False

    @property
    def holds(self) -> bool:
        return self.empirical_prob <= self.trace_bound + 3.0 * self.mc_stderr

    @property
    def violated(self) -> bool:
        return not self.holds and not self.informational

    def to_dict(self) -> dict:
        data = asdict(self)
        data["holds"] = self.holds
        return data


@dataclass(frozen=True, eq=False)
class TailSamples:
    """Statistic values and event values of a coupled sample stream."""

    values: List[HermitianTensor]
    events: List[HermitianTensor]

    @property
    def n(self) -> int:
        return len(self.values)


def _check_window_values(M: float, m: float) -> None:
    if not (math.isfinite(m) and math.isfinite(M)):
        raise DegenerateConstantError(f"window must be finite, got m={m}, M={M}")
    if not m > 0:
        raise DegenerateConstantError(f"Kantorovich constant needs m > 0, got m={m}")
    if not M > m:
        raise DegenerateConstantError(f"Kantorovich constant needs m < M, got m={m}, M={M}")


def kantorovich_f(M: float, m: float, f: Callable[[float], float], p: float) -> float:
    """Generalized Kantorovich constant K(M, m, f, p)."""
    _check_window_values(M, m)
    if p == 1:
        raise DegenerateConstantError("K(M, m, f, p) is undefined at p = 1; use kantorovich for the limit")
    if p == 0:
        raise DegenerateConstantError("K(M, m, f, p) is undefined at p = 0")

    f_M, f_m = float(f(M)), float(f(m))
    cross = m * f_M - M * f_m
    if cross == 0 or not math.isfinite(cross):
        raise DegenerateConstantError(
            f"K(M, m, f, p) is degenerate: m f(M) - M f(m) = {cross!r} for m={m}, M={M}"
        )

    ratio = (p - 1) * (f_M - f_m) / (p * cross)
    if not ratio > 0:
        raise DegenerateConstantError(f"K(M, m, f, p) is degenerate: base of the power is {ratio!r}")
    return float(cross / ((p - 1) * (M - m)) * ratio ** p)


def kantorovich(M: float, m: float, p: float) -> float:
    """Kantorovich constant K(M, m, p) for f(t) = t^p; 1 at p = 1 and at M = m."""
    if not m > 0:
        raise DegenerateConstantError(f"Kantorovich constant needs m > 0, got m={m}")
    if p == 1 or M == m:
        return 1.0
    return kantorovich_f(M, m, lambda t: t ** p, p)


def _kantorovich_unordered(a: float, b: float, p: float) -> float:
    # K is symmetric in its two window arguments
    return kantorovich(max(a, b), min(a, b), p)


def _scale(T: HermitianTensor) -> float:
    return max(norm(T), np.finfo(float).tiny)


def ordering_report(name: str, lower: Tensor, upper: Tensor, witness_seed: int = 0,
                    tol: Optional[ToleranceConfig] = None, informational: bool = False,
                    constant: Optional[float] = None) -> InequalityReport:
    """Report on lower <= upper with margin lambda_min(upper - lower) / ||upper||."""
    tol = resolve_tolerances(tol)
    lower, upper = _as_hermitian(lower), _as_hermitian(upper)
    if _inverted_orderings.get():
        lower, upper = upper, lower
    margin = lambda_min(upper - lower) / _scale(upper)
    report = InequalityReport(
        name=name,
        holds=bool(margin >= -tol.loewner_tol),
        margin=float(margin),
        witness_seed=int(witness_seed),
        tolerance=tol.loewner_tol,
        informational=informational,
        constant=constant,
    )
    _log_report(report)
    return report


def scalar_report(name: str, lhs: float, rhs: float, witness_seed: int = 0, tolerance: float = 0.0,
                  strict: bool = False, informational: bool = False) -> InequalityReport:
    """Report on lhs <= rhs (lhs < rhs when ``strict``) with margin rhs - lhs."""
    if _inverted_orderings.get():
        lhs, rhs = rhs, lhs
    margin = float(rhs - lhs)
    holds = margin > 0 if strict else margin >= -tolerance
    report = InequalityReport(name, bool(holds), margin, int(witness_seed), float(tolerance),
                              informational=informational, strict=strict)
    _log_report(report)
    return report


def equality_report(name: str, value: Tensor, target: Tensor, witness_seed: int = 0,
                    tolerance: float = 1e-10) -> InequalityReport:
    """Report on value == target with margin -||value - target|| / max(1, ||target||)."""
    value, target = _as_hermitian(value), _as_hermitian(target)
    margin = -norm(value - target) / max(1.0, norm(target))
    report = InequalityReport(name, bool(margin >= -tolerance), float(margin), int(witness_seed),
                              float(tolerance))
    _log_report(report)
    return report


def _log_report(report: InequalityReport) -> None:
    if not report.holds:
        level = logging.INFO if report.informational else logging.WARNING
        _log_event("inequality_violated", level, log=logger, name=report.name, margin=report.margin,
                   witness_seed=report.witness_seed, informational=report.informational)


def spectral_window(tensors: Sequence[Tensor]) -> Tuple[float, float]:
    """(min_i lambda_min(A_i), max_i lambda_max(A_i))."""
    if not tensors:
        raise ValueError("spectral_window needs at least one tensor")
    return (min(lambda_min(A) for A in tensors), max(lambda_max(A) for A in tensors))


def _check_window(tensors: Sequence[HermitianTensor], m: float, M: float, tol: ToleranceConfig) -> None:
    if not 0 < m <= M:
        raise DegenerateConstantError(f"spectral window needs 0 < m <= M, got m={m}, M={M}")
    shape = tensors[0].shape
    low, high = identity(shape) * m, identity(shape) * M
    for i, A in enumerate(tensors):
        if not (loewner_leq(low, A, tol).holds and loewner_leq(A, high, tol).holds):
            a_min, a_max = lambda_min(A), lambda_max(A)
            raise WindowViolationError(
                f"input {i} has spectrum [{a_min:.6g}, {a_max:.6g}] outside the window [{m:.6g}, {M:.6g}]"
            )


def _powers(tensors: Sequence[HermitianTensor], p: float) -> List[HermitianTensor]:
    return [power(A, p) for A in tensors]


def _power_mean(w: Weights, q: float, tensors: List[HermitianTensor], tol: ToleranceConfig) -> HermitianTensor:
    base, sigma = _power_parts(w, q)
    return _deformed(base, sigma, tensors, tol, True)[0]


def _check_exponent(p: float) -> None:
    if not (math.isfinite(p) and p > 0):
        raise ValueError(f"exponent p must be positive, got {p}")


def _pair_from_means(p: float, q: float, X: HermitianTensor, Y: HermitianTensor) -> Tuple[HermitianTensor, HermitianTensor]:
    if q > 0:
        scaled = X * (lambda_min(X) ** (p - 1))
        return (scaled, Y) if p >= 1 else (Y, scaled)
    scaled = X * (lambda_max(X) ** (p - 1))
    return (Y, scaled) if p >= 1 else (scaled, Y)


@positive_definite("tensors")
def ando_hiai_pair(p: float, q: float, w, tensors: Sequence[Tensor],
                   tol: Optional[ToleranceConfig] = None) -> Tuple[HermitianTensor, HermitianTensor]:
    """(lower, upper) of the power-mean Ando-Hiai ordering for the sign of q and the branch of p.

    With X = P_{w,q}(A) and Y = P_{w,q}(A^p):
    q > 0, p >= 1:  lambda_min(X)^{p-1} X <= Y
    q > 0, p <= 1:  Y <= lambda_min(X)^{p-1} X
    q < 0, p >= 1:  Y <= lambda_max(X)^{p-1} X
    q < 0, p <= 1:  lambda_max(X)^{p-1} X <= Y
    """
    _check_exponent(p)
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    X = _power_mean(w, q, tensors, tol)
    Y = X if p == 1 else _power_mean(w, q, _powers(tensors, p), tol)
    return _pair_from_means(p, q, X, Y)


@positive_definite("tensors")
def check_ah_power(p: float, q: float, w, tensors: Sequence[Tensor], tol: Optional[ToleranceConfig] = None,
                   witness_seed: int = 0) -> Tuple[InequalityReport, InequalityReport]:
    """Ando-Hiai orderings for P_{w,q} and P_{w,-q}, q in (0, 1]."""
    _check_exponent(p)
    if not 0 < q <= 1:
        raise ValueError(f"check_ah_power needs q in (0, 1], got {q}")
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    powered = tensors if p == 1 else _powers(tensors, p)

    reports = []
    for signed_q in (q, -q):
        X = _power_mean(w, signed_q, tensors, tol)
        Y = X if p == 1 else _power_mean(w, signed_q, powered, tol)
        lower, upper = _pair_from_means(p, signed_q, X, Y)
        reports.append(ordering_report(f"ah_power[p={p:g},q={signed_q:g}]", lower, upper, witness_seed, tol))
    return reports[0], reports[1]


@positive_definite("tensors")
def check_ah_karcher(p: float, w, tensors: Sequence[Tensor], tol: Optional[ToleranceConfig] = None,
                     witness_seed: int = 0) -> Tuple[InequalityReport, InequalityReport]:
    """Two-sided chain between G(A^p) and the extreme eigenvalues of G = G(A)."""
    _check_exponent(p)
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    G, _ = _karcher(w, tensors, tol, True)
    Gp = G if p == 1 else _karcher(w, _powers(tensors, p), tol, True)[0]

    low_factor, high_factor = lambda_min(G) ** (p - 1), lambda_max(G) ** (p - 1)
    if p < 1:
        low_factor, high_factor = high_factor, low_factor
    return (
        ordering_report(f"ah_karcher_lower[p={p:g}]", G * low_factor, Gp, witness_seed, tol),
        ordering_report(f"ah_karcher_upper[p={p:g}]", Gp, G * high_factor, witness_seed, tol),
    )


def _deformed_value(base: MeanSpec, sigma: RepresentingFunction, tensors: List[HermitianTensor],
                    tol: ToleranceConfig) -> HermitianTensor:
    return _deformed(base, sigma, tensors, tol, True)[0]


@positive_definite("tensors")
def check_ah_deformed(base: MeanSpec, sigma: RepresentingFunction, p: float, tensors: Sequence[Tensor],
                      tol: Optional[ToleranceConfig] = None,
                      witness_seed: int = 0) -> Tuple[InequalityReport, InequalityReport]:
    """Ando-Hiai chain for deformed means.

    For p >= 1, X = M_sigma(A) and Y = M_{sigma_{1/p}}(A^p):
        lambda_min(X)^{p-1} X <= Y <= lambda_max(X)^{p-1} X.
    For p in (0, 1], X = M_{sigma_p}(A) and Y = M_sigma(A^p):
        lambda_max(X)^{p-1} X <= Y <= lambda_min(X)^{p-1} X.
    """
    _check_exponent(p)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, base.arity)
    label = f"{base.describe()},{sigma.describe()},p={p:g}"

    if p == 1:
        X = Y = _deformed_value(base, sigma, tensors, tol)
    elif p > 1:
        X = _deformed_value(base, sigma, tensors, tol)
        Y = _deformed_value(base, sigma.root_deformed(p), _powers(tensors, p), tol)
    else:
        X = _deformed_value(base, sigma.power_deformed(p), tensors, tol)
        Y = _deformed_value(base, sigma, _powers(tensors, p), tol)

    low_factor, high_factor = lambda_min(X) ** (p - 1), lambda_max(X) ** (p - 1)
    if p < 1:
        low_factor, high_factor = high_factor, low_factor
    return (
        ordering_report(f"ah_deformed_lower[{label}]", X * low_factor, Y, witness_seed, tol),
        ordering_report(f"ah_deformed_upper[{label}]", Y, X * high_factor, witness_seed, tol),
    )


@positive_definite("tensors")
def check_reverse_ah_power(p: float, q: float, m: float, M: float, w, tensors: Sequence[Tensor],
                           tol: Optional[ToleranceConfig] = None, witness_seed: int = 0,
                           informational: bool = False) -> InequalityReport:
    """Kantorovich-type reverse of the power-mean Ando-Hiai ordering.

    With X = P_{w,q}(A), K_1 = K(M, m, p):
    q in (0, 1]:  P_{w,q}(A^p) <= lambda_min^{p-1} K_1 K_2^{1/q} X,
                  K_2 = K(M^q / lambda_min^q, m^q / lambda_max^q, p)
    q in [-1, 0): lambda_max^{p-1} K_1^{-1} K_2'^{1/q} X <= P_{w,q}(A^p),
                  K_2' = K(lambda_max^q / m^q, lambda_min^q / M^q, p)
    The multiplying constant is returned in ``report.constant``.
    """
    if not p >= 1:
        raise ValueError(f"check_reverse_ah_power needs p >= 1, got {p}")
    if q == 0 or not -1 <= q <= 1:
        raise ValueError(f"check_reverse_ah_power needs q in [-1, 0) or (0, 1], got {q}")
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    _check_window(tensors, m, M, tol)

    X = _power_mean(w, q, tensors, tol)
    Y = X if p == 1 else _power_mean(w, q, _powers(tensors, p), tol)
    x_min, x_max = lambda_min(X), lambda_max(X)
    k1 = kantorovich(M, m, p)
    name = f"reverse_ah_power[p={p:g},q={q:g}]"

    if q > 0:
        k2 = _kantorovich_unordered(M ** q / x_min ** q, m ** q / x_max ** q, p)
        constant = x_min ** (p - 1) * k1 * k2 ** (1.0 / q)
        return ordering_report(name, Y, X * constant, witness_seed, tol, informational, constant)

    k2 = _kantorovich_unordered(x_max ** q / m ** q, x_min ** q / M ** q, p)
    constant = x_max ** (p - 1) / k1 * k2 ** (1.0 / q)
    return ordering_report(name, X * constant, Y, witness_seed, tol, informational, constant)


@positive_definite("tensors")
def check_reverse_ah_deformed(base: MeanSpec, sigma: RepresentingFunction, p: float, m: float, M: float,
                              tensors: Sequence[Tensor], tol: Optional[ToleranceConfig] = None,
                              witness_seed: int = 0,
                              informational: bool = False) -> Tuple[InequalityReport, InequalityReport]:
    """K(M,m,p)^{-1} lambda_max^{p-1} X <= M_{sigma_{1/p}}(A^p) <= K(M,m,p) lambda_min^{p-1} X, X = M_sigma(A)."""
    if not p >= 1:
        raise ValueError(f"check_reverse_ah_deformed needs p >= 1, got {p}")
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, base.arity)
    _check_window(tensors, m, M, tol)

    X = _deformed_value(base, sigma, tensors, tol)
    Y = X if p == 1 else _deformed_value(base, sigma.root_deformed(p), _powers(tensors, p), tol)
    k1 = kantorovich(M, m, p)
    low = lambda_max(X) ** (p - 1) / k1
    high = lambda_min(X) ** (p - 1) * k1
    label = f"{base.describe()},{sigma.describe()},p={p:g}"
    return (
        ordering_report(f"reverse_ah_deformed_lower[{label}]", X * low, Y, witness_seed, tol, informational, low),
        ordering_report(f"reverse_ah_deformed_upper[{label}]", Y, X * high, witness_seed, tol, informational, high),
    )


def _psd_power(H: HermitianTensor, p: float) -> HermitianTensor:
    return apply_spectral_function(H, lambda x: np.power(np.maximum(x, 0.0), p))


@positive_definite("A")
def check_kantorovich_congruence(A: Tensor, B: Tensor, m: float, M: float, p: float,
                                 tol: Optional[ToleranceConfig] = None, witness_seed: int = 0,
                                 informational: bool = False) -> InequalityReport:
    """B A^p B <= K(M, m, p) (B A B)^p for Hermitian B with B^2 <= I and mI <= A <= MI.

    The ordering is guaranteed when B^2 = I; for strict contractions it can
    fail, and the report says so.
    """
    if not p >= 1:
        raise ValueError(f"check_kantorovich_congruence needs p >= 1, got {p}")
    tol = resolve_tolerances(tol)
    A, B = _as_hermitian(A), _as_hermitian(B)
    _check_window([A], m, M, tol)
    if not loewner_leq(sandwich(B, identity(B.shape)), identity(B.shape), tol).holds:
        raise ValueError("check_kantorovich_congruence needs B^2 <= I")

    k = kantorovich(M, m, p)
    lower = sandwich(B, power(A, p))
    upper = _psd_power(sandwich(B, A), p) * k
    return ordering_report(f"kantorovich_congruence[p={p:g}]", lower, upper, witness_seed, tol,
                           informational, k)


@positive_definite("tensors")
def check_kantorovich_jensen(w, tensors: Sequence[Tensor], m: float, M: float, p: float,
                             tol: Optional[ToleranceConfig] = None, witness_seed: int = 0) -> InequalityReport:
    """sum_i w_i A_i^p <= K(M, m, p) (sum_i w_i A_i)^p for windowed inputs and p >= 1."""
    if not p >= 1:
        raise ValueError(f"check_kantorovich_jensen needs p >= 1, got {p}")
    w = _as_weights(w)
    tol = resolve_tolerances(tol)
    tensors = _prepare(tensors, len(w))
    _check_window(tensors, m, M, tol)

    k = kantorovich(M, m, p)
    mean_of_powers = _weighted_sum(w, _powers(tensors, p))
    power_of_mean = power(_weighted_sum(w, tensors), p) * k
    return ordering_report(f"kantorovich_jensen[p={p:g}]", mean_of_powers, power_of_mean, witness_seed, tol,
                           constant=k)


def _weighted_sum(w: Weights, tensors: Sequence[HermitianTensor]) -> HermitianTensor:
    acc = np.zeros_like(tensors[0].entries)
    for wi, A in zip(w.values, tensors):
        acc = acc + wi * A.entries
    return HermitianTensor._unchecked(tensors[0].shape, acc)


def collect_tail_samples(source: RandomPDSource, statistic: Callable[[List[HermitianTensor]], Tensor],
                         n: int, k: int = 1,
                         event_statistic: Optional[Callable[[List[HermitianTensor]], Tensor]] = None,
                         workers: int = 1,
                         pair: Optional[Callable[[List[HermitianTensor]], Tuple[Tensor, Tensor]]] = None) -> TailSamples:
    """Evaluate the statistic (and event statistic) on n seeded trials.

    ``pair`` may replace both callables with one returning (event, value),
    which lets the two sides share intermediate work.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got n={n}")

    def one_trial(t: int):
        inputs = draw_inputs(source, t, k)
        if pair is not None:
            event, value = pair(inputs)
        else:
            value = statistic(inputs)
            event = value if event_statistic is None else event_statistic(inputs)
        value, event = _as_hermitian(value), _as_hermitian(event)
        require_positive_definite(value, f"statistic sample {t}")
        return value, event

    results = TrialRunner(workers).map(one_trial, n)
    return TailSamples(values=[v for v, _ in results], events=[e for _, e in results])


def tail_bound_from_samples(samples: TailSamples, C: Tensor, r: float = 1.0,
                            tol: Optional[ToleranceConfig] = None, name: str = "markov",
                            informational: Optional[bool] = None, threshold: Optional[float] = None) -> TailBoundReport:
    """Empirical Pr(event not <= C) against Tr(mean(statistic^r) C^{-1}) on the same samples."""
    if not r >= 1:
        raise ValueError(f"tail bound needs r >= 1, got {r}")
    tol = resolve_tolerances(tol)
    C = _as_hermitian(C)
    require_positive_definite(C, "threshold C")
    C_inv = inverse(C)

    n = samples.n
    hits = sum(1 for event in samples.events if not loewner_leq(event, C, tol).holds)
    prob = hits / n
    stderr = math.sqrt(prob * (1.0 - prob) / n)

    acc = np.zeros_like(C.entries)
    for value in samples.values:
        acc = acc + power(value, r).entries
    expectation = HermitianTensor._unchecked(C.shape, acc / n)
    bound = float(np.real(np.trace(expectation.entries @ C_inv.entries)))

    if informational is None:
        informational = r != 1
    report = TailBoundReport(name, float(prob), float(stderr), max(bound, 0.0), n, float(r),
                             None if threshold is None else float(threshold), informational)
    if not report.holds:
        _log_event("tail_bound_violated", logging.INFO if informational else logging.WARNING, log=logger,
                   **report.to_dict())
    return report


def markov_tail_bound(source: RandomPDSource, statistic: Callable[[List[HermitianTensor]], Tensor], C: Tensor,
                      r: float = 1.0, n: int = 1000, k: int = 1,
                      event_statistic: Optional[Callable[[List[HermitianTensor]], Tensor]] = None,
                      tol: Optional[ToleranceConfig] = None, workers: int = 1) -> TailBoundReport:
    """Operator Markov tail bound Pr(S not <= C) <= Tr(E[S^r] C^{-1}) estimated on one sample stream.

    With ``event_statistic`` L (where L <= S holds pointwise) the probability
    side is Pr(L not <= C), which the same trace bounds.
    """
    samples = collect_tail_samples(source, statistic, n, k, event_statistic, workers)
    return tail_bound_from_samples(samples, C, r, tol)
