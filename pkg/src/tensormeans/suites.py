"""Verification suites run by ``tensormeans verify``.

Each suite maps a trial index to a list of ``InequalityReport`` values and the
reports are concatenated in trial order, so output does not depend on the
worker count. Auxiliary randomness inside a trial (perturbations, congruence
factors, reflections) comes from ``trial_rng(seed, trial, stream)``.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .bounds import (
    InequalityReport,
    check_ah_deformed,
    check_ah_karcher,
    check_ah_power,
    check_kantorovich_congruence,
    check_kantorovich_jensen,
    check_reverse_ah_deformed,
    check_reverse_ah_power,
    equality_report,
    kantorovich,
    ordering_report,
    scalar_report,
    spectral_window,
)
from .config import ExperimentConfig
from .core import ToleranceConfig, _log_event
from .errors import ConfigError
from .means import MeanSpec, RepresentingFunction, Weights, evaluate, geometric_power_binary
from .runner import TrialRunner
from .sampling import RandomPDSource, draw_inputs, random_invertible, random_psd, random_reflection, trial_rng
from .tensor_core import HermitianTensor, congruence, identity, thompson_metric

logger = logging.getLogger("tensormeans.suites")

# Streams of trial_rng used for auxiliary draws.
STREAM_PERTURB = 1
STREAM_CONGRUENCE = 2
STREAM_REFLECTION = 3
STREAM_WINDOW = 4

NORMALIZATION_TOL = 1e-10
CONGRUENCE_TOL = 1e-7
NONEXPANSIVE_TOL = 1e-9
CONTRACTION_MIN_DISTANCE = 0.1
CONGRUENCE_COND = 10.0

KANTOROVICH_P_GRID = (1.1, 1.5, 2.0, 3.0)
KANTOROVICH_WINDOWS = ((0.5, 1.0), (1.0, 2.0), (1.0, 10.0))
CLOSED_FORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SuiteContext:
    config: ExperimentConfig
    source: RandomPDSource
    tol: ToleranceConfig
    runner: TrialRunner

    @property
    def weights(self) -> Weights:
        return self.config.weight_values()

    @property
    def dim(self) -> int:
        return self.source.shape.flat_dim

    @property
    def mode_dims(self) -> Tuple[int, ...]:
        return self.source.shape.mode_dims

    def inputs(self, trial: int) -> List[HermitianTensor]:
        return draw_inputs(self.source, trial, self.config.k)

    def rng(self, trial: int, stream: int):
        return trial_rng(self.source.root_seed, trial, stream)

    def positive_q(self) -> List[float]:
        return sorted({abs(q) for q in self.config.q_values})


def _mean_family(w: Weights, q_values: Sequence[float]) -> List[MeanSpec]:
    family = [MeanSpec.arithmetic(w), MeanSpec.harmonic(w), MeanSpec.karcher(w)]
    for q in q_values:
        family.append(MeanSpec.power(w, q))
        family.append(MeanSpec.power(w, -q))
    return family


def _value(spec: MeanSpec, tensors: Sequence[HermitianTensor], tol: ToleranceConfig) -> HermitianTensor:
    return evaluate(spec, tensors, tol)[0]


def _run(ctx: SuiteContext, trial_fn: Callable[[int], List[InequalityReport]]) -> List[InequalityReport]:
    per_trial = ctx.runner.map(trial_fn, ctx.config.trials)
    return [report for reports in per_trial for report in reports]


def axioms_suite(ctx: SuiteContext) -> List[InequalityReport]:
    """Normalization, monotonicity and congruence invariance for every mean in the family."""
    family = _mean_family(ctx.weights, ctx.positive_q())
    k = ctx.config.k

    def trial(t: int) -> List[InequalityReport]:
        A = ctx.inputs(t)
        perturb = ctx.rng(t, STREAM_PERTURB)
        B = [a + random_psd(ctx.dim, perturb, scale=0.5, mode_dims=ctx.mode_dims) for a in A]
        Z = random_invertible(ctx.dim, ctx.rng(t, STREAM_CONGRUENCE), cond=CONGRUENCE_COND, mode_dims=ctx.mode_dims)
        moved = [congruence(a, Z, ctx.tol) for a in A]
        eye = identity(ctx.source.shape)

        reports = []
        for spec in family:
            label = spec.describe()
            value = _value(spec, A, ctx.tol)
            reports.append(equality_report(f"normalization[{label}]", _value(spec, [eye] * k, ctx.tol), eye,
                                           t, NORMALIZATION_TOL))
            reports.append(ordering_report(f"monotonicity[{label}]", value, _value(spec, B, ctx.tol), t, ctx.tol))
            reports.append(equality_report(f"congruence[{label}]", _value(spec, moved, ctx.tol),
                                           congruence(value, Z, ctx.tol), t, CONGRUENCE_TOL))
        return reports

    return _run(ctx, trial)


def contraction_suite(ctx: SuiteContext) -> List[InequalityReport]:
    """Thompson nonexpansiveness of every mean and strict contraction of X -> X #_q A for q in (0, 1)."""
    family = _mean_family(ctx.weights, ctx.positive_q())
    n = ctx.config.trials

    def trial(t: int) -> List[InequalityReport]:
        X = ctx.inputs(t)
        # Partner inputs come from trial indices past every primary trial
        Y = ctx.inputs(n + t)
        spread = max(thompson_metric(x, y) for x, y in zip(X, Y))

        reports = []
        for spec in family:
            distance = thompson_metric(_value(spec, X, ctx.tol), _value(spec, Y, ctx.tol))
            reports.append(scalar_report(f"nonexpansive[{spec.describe()}]", distance, spread, t, NONEXPANSIVE_TOL))

        anchor = X[-1] if len(X) > 1 else Y[-1]
        base_distance = thompson_metric(X[0], Y[0])
        if base_distance >= CONTRACTION_MIN_DISTANCE:
            for q in ctx.positive_q():
                if q >= 1:
                    continue
                moved = thompson_metric(geometric_power_binary(X[0], anchor, q),
                                        geometric_power_binary(Y[0], anchor, q))
                reports.append(scalar_report(f"strict_contraction[q={q:g}]", moved, base_distance, t, strict=True))
        return reports

    return _run(ctx, trial)


def sandwich_suite(ctx: SuiteContext) -> List[InequalityReport]:
    """P_{w,-q} <= G_w <= P_{w,q}."""
    w = ctx.weights

    def trial(t: int) -> List[InequalityReport]:
        A = ctx.inputs(t)
        G = _value(MeanSpec.karcher(w), A, ctx.tol)
        reports = []
        for q in ctx.positive_q():
            lower = _value(MeanSpec.power(w, -q), A, ctx.tol)
            upper = _value(MeanSpec.power(w, q), A, ctx.tol)
            reports.append(ordering_report(f"sandwich_lower[q={q:g}]", lower, G, t, ctx.tol))
            reports.append(ordering_report(f"sandwich_upper[q={q:g}]", G, upper, t, ctx.tol))
        return reports

    return _run(ctx, trial)


def ando_hiai_suite(ctx: SuiteContext) -> List[InequalityReport]:
    """Ando-Hiai chains for power, Karcher and deformed means over the p and q grids."""
    w = ctx.weights
    bases = (MeanSpec.arithmetic(w), MeanSpec.harmonic(w))

    def trial(t: int) -> List[InequalityReport]:
        A = ctx.inputs(t)
        reports: List[InequalityReport] = []
        for p in ctx.config.p_values:
            reports.extend(check_ah_karcher(p, w, A, ctx.tol, witness_seed=t))
            for q in ctx.positive_q():
                reports.extend(check_ah_power(p, q, w, A, ctx.tol, witness_seed=t))
                for base in bases:
                    reports.extend(check_ah_deformed(base, RepresentingFunction.power(q), p, A, ctx.tol,
                                                     witness_seed=t))
        return reports

    return _run(ctx, trial)


def _window(ctx: SuiteContext, A: Sequence[HermitianTensor]) -> Tuple[float, float]:
    window = ctx.source.window()
    return window if window is not None else spectral_window(A)


def reverse_suite(ctx: SuiteContext) -> List[InequalityReport]:
    """Kantorovich-type reverse chains.

    The reverse power and deformed chains are reported as informational; the
    Kantorovich instance checks (Jensen form, congruence by a reflection)
    decide the verdict.
    """
    w = ctx.weights
    p_values = [p for p in ctx.config.p_values if p >= 1]
    if not p_values:
        raise ConfigError(f"reverse suite needs at least one p >= 1 in p_values, got {ctx.config.p_values}")

    def trial(t: int) -> List[InequalityReport]:
        A = ctx.inputs(t)
        m, M = _window(ctx, A)
        B = random_reflection(ctx.dim, ctx.rng(t, STREAM_REFLECTION), mode_dims=ctx.mode_dims)

        reports: List[InequalityReport] = []
        for p in p_values:
            reports.append(check_kantorovich_jensen(w, A, m, M, p, ctx.tol, witness_seed=t))
            reports.append(check_kantorovich_congruence(A[0], B, m, M, p, ctx.tol, witness_seed=t))
            for q in ctx.positive_q():
                for signed_q in (q, -q):
                    reports.append(check_reverse_ah_power(p, signed_q, m, M, w, A, ctx.tol, witness_seed=t,
                                                          informational=True))
                reports.extend(check_reverse_ah_deformed(MeanSpec.arithmetic(w), RepresentingFunction.power(q),
                                                         p, m, M, A, ctx.tol, witness_seed=t, informational=True))
        return reports

    return _run(ctx, trial)


def _closeness(name: str, value: float, target: float, witness_seed: int = 0) -> InequalityReport:
    return scalar_report(name, abs(value - target), CLOSED_FORM_TOL * max(1.0, abs(target)), witness_seed)


def kantorovich_suite(ctx: SuiteContext) -> List[InequalityReport]:
    """K > 1 and the p = 2 closed form on a fixed grid, plus scale invariance on random windows."""
    reports: List[InequalityReport] = []
    for p in KANTOROVICH_P_GRID:
        for m, M in KANTOROVICH_WINDOWS:
            reports.append(scalar_report(f"kantorovich_gt_one[M={M:g},m={m:g},p={p:g}]", 1.0,
                                         kantorovich(M, m, p), strict=True))
    for m, M in KANTOROVICH_WINDOWS:
        reports.append(_closeness(f"kantorovich_closed_form[M={M:g},m={m:g}]", kantorovich(M, m, 2.0),
                                  (M + m) ** 2 / (4.0 * M * m)))
    reports.append(_closeness("kantorovich_value[M=2,m=1,p=2]", kantorovich(2.0, 1.0, 2.0), 1.125))
    reports.append(_closeness("kantorovich_value[M=4,m=1,p=2]", kantorovich(4.0, 1.0, 2.0), 25.0 / 16.0))

    def trial(t: int) -> List[InequalityReport]:
        rng = ctx.rng(t, STREAM_WINDOW)
        m = float(rng.uniform(0.1, 1.0))
        M = m * (1.0 + float(rng.uniform(0.01, 10.0)))
        p = float(rng.uniform(1.05, 4.0))
        scale = float(rng.uniform(0.5, 5.0))
        value = kantorovich(M, m, p)
        return [
            scalar_report(f"kantorovich_gt_one[random,p={p:.3f}]", 1.0, value, t, strict=True),
            scalar_report("kantorovich_scale_invariance", abs(kantorovich(scale * M, scale * m, p) - value),
                          1e-10 * value, t),
        ]

    return reports + _run(ctx, trial)


SUITES: Dict[str, Callable[[SuiteContext], List[InequalityReport]]] = {
    "axioms": axioms_suite,
    "contraction": contraction_suite,
    "sandwich": sandwich_suite,
    "ando-hiai": ando_hiai_suite,
    "reverse": reverse_suite,
    "kantorovich": kantorovich_suite,
}


def run_suite(name: str, config: ExperimentConfig, workers: Optional[int] = None) -> List[InequalityReport]:
    if name not in SUITES:
        raise ValueError(f"unknown suite '{name}'; expected one of {sorted(SUITES)}")
    ctx = SuiteContext(
        config=config,
        source=config.build_source(),
        tol=config.tolerances,
        runner=TrialRunner(workers or config.workers),
    )
    reports = SUITES[name](ctx)
    violations = sum(1 for r in reports if r.violated)
    _log_event("suite_finished", logging.INFO, log=logger, suite=name, reports=len(reports), violations=violations)
    return reports
