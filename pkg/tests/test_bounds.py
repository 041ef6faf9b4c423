import math

import numpy as np
import pytest

from conftest import make_pd
from tensormeans.bounds import (
    KantorovichParams,
    TailBoundReport,
    _kantorovich_unordered,
    ando_hiai_pair,
    check_ah_deformed,
    check_ah_karcher,
    check_ah_power,
    check_kantorovich_congruence,
    check_kantorovich_jensen,
    check_reverse_ah_deformed,
    check_reverse_ah_power,
    collect_tail_samples,
    equality_report,
    inverted_orderings,
    kantorovich,
    kantorovich_f,
    markov_tail_bound,
    ordering_report,
    scalar_report,
    spectral_window,
    tail_bound_from_samples,
)
from tensormeans.errors import DegenerateConstantError, TrialError, WindowViolationError
from tensormeans.means import MeanSpec, RepresentingFunction
from tensormeans.sampling import RandomPDSource, random_reflection, sample
from tensormeans.tensor_core import from_diagonal, identity, inverse, loewner_leq


@pytest.fixture
def windowed():
    source = RandomPDSource.spectral_uniform(4, 1.0, 2.0, root_seed=7)
    return [sample(source, t) for t in range(3)]


@pytest.fixture
def counterexample():
    return [from_diagonal([1.0, 1.0]), from_diagonal([1.0, 2.0])]


class TestKantorovich:
    @pytest.mark.parametrize("M, m, p, expected", [
        (2.0, 1.0, 2.0, 9.0 / 8.0),
        (4.0, 1.0, 2.0, 25.0 / 16.0),
        (2.0, 1.0, -1.0, 9.0 / 8.0),
        (6.0, 3.0, 2.0, 9.0 / 8.0),
    ])
    def test_closed_forms(self, M, m, p, expected):
        assert kantorovich(M, m, p) == pytest.approx(expected, rel=1e-12)

    def test_trivial_cases(self):
        assert kantorovich(3.0, 1.0, 1.0) == 1.0
        assert kantorovich(2.0, 2.0, 5.0) == 1.0

    def test_limit_at_p_one(self):
        assert kantorovich(2.0, 1.0, 1.0 + 1e-7) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("p", [-1.0, 1.5, 2.0, 3.0])
    def test_exceeds_one_outside_unit_interval(self, p):
        assert kantorovich(3.0, 1.0, p) > 1.0

    def test_below_one_inside_unit_interval(self):
        assert 0.0 < kantorovich(3.0, 1.0, 0.5) < 1.0

    def test_scale_invariant_and_symmetric(self):
        assert kantorovich(10.0, 4.0, 2.5) == pytest.approx(kantorovich(5.0, 2.0, 2.5), rel=1e-12)
        assert _kantorovich_unordered(1.0, 2.0, 3.0) == kantorovich(2.0, 1.0, 3.0)

    def test_general_form_agrees_for_powers(self):
        assert kantorovich_f(3.0, 1.0, lambda t: t ** 2.5, 2.5) == kantorovich(3.0, 1.0, 2.5)

    @pytest.mark.parametrize("M, m, p, message", [
        (2.0, 0.0, 2.0, "m > 0"),
        (1.0, 2.0, 2.0, "m < M"),
        (2.0, 1.0, 0.0, "p = 0"),
    ])
    def test_degenerate_arguments(self, M, m, p, message):
        with pytest.raises(DegenerateConstantError, match=message):
            kantorovich(M, m, p)

    def test_identity_function_is_degenerate(self):
        with pytest.raises(DegenerateConstantError, match="degenerate"):
            kantorovich_f(2.0, 1.0, lambda t: t, 2.0)

    def test_general_form_undefined_at_p_one(self):
        with pytest.raises(DegenerateConstantError, match="p = 1"):
            kantorovich_f(2.0, 1.0, math.exp, 1.0)

    def test_params(self):
        assert KantorovichParams(M=2.0, m=1.0, p=2.0).value == pytest.approx(1.125)
        with pytest.raises(DegenerateConstantError):
            KantorovichParams(M=1.0, m=1.0, p=2.0)


class TestReports:
    def test_ordering_margin_is_relative(self):
        report = ordering_report("r", identity(2), identity(2) * 4.0)
        assert report.holds and report.margin == pytest.approx(0.75)
        assert not report.violated

    def test_informational_failures_are_not_violations(self):
        report = ordering_report("r", identity(2) * 2.0, identity(2), informational=True)
        assert not report.holds and not report.violated

    def test_scalar_strict(self):
        assert not scalar_report("s", 1.0, 1.0, strict=True).holds
        assert scalar_report("s", 1.0, 1.0).holds
        assert scalar_report("s", 1.0 + 1e-12, 1.0, tolerance=1e-9).holds

    def test_equality(self):
        assert equality_report("e", identity(2), identity(2)).holds
        assert not equality_report("e", identity(2), identity(2) * 1.1).holds

    def test_inverted_orderings_swaps_sides(self):
        with inverted_orderings():
            assert not ordering_report("r", identity(2), identity(2) * 2.0).holds
            assert not scalar_report("s", 1.0, 2.0).holds
        assert ordering_report("r", identity(2), identity(2) * 2.0).holds

    def test_to_dict(self):
        record = ordering_report("r", identity(2), identity(2), witness_seed=3).to_dict()
        assert record["name"] == "r" and record["witness_seed"] == 3 and record["holds"] is True


class TestAndoHiai:
    @pytest.mark.parametrize("q", [1.0, 0.5])
    def test_p_one_is_an_equality(self, windowed, q):
        for report in check_ah_power(1.0, q, (0.2, 0.3, 0.5), windowed):
            assert report.holds
            assert report.margin == pytest.approx(0.0, abs=1e-15)

    def test_commuting_oracle(self):
        A = [from_diagonal([1.0, 2.0]), from_diagonal([3.0, 1.0])]
        positive, negative = check_ah_power(2.0, 1.0, (0.5, 0.5), A)
        # X = diag(2, 1.5), Y = diag(5, 2.5): 1.5 X <= Y with margin 0.25 / 5
        assert positive.margin == pytest.approx(0.05, rel=1e-12)
        # X = diag(1.5, 4/3), Y = diag(1.8, 1.6): Y <= 1.5 X with margin 0.4 / 2.25
        assert negative.margin == pytest.approx(0.4 / 2.25, rel=1e-12)
        assert positive.holds and negative.holds

    @pytest.mark.parametrize("p", [0.5, 1.5, 2.0, 3.0])
    @pytest.mark.parametrize("q", [0.25, 0.5, 1.0])
    def test_power_means(self, windowed, p, q):
        for report in check_ah_power(p, q, (1 / 3, 1 / 3, 1 / 3), windowed):
            assert report.holds, report

    @pytest.mark.parametrize("p", [0.5, 2.0, 3.0])
    def test_karcher(self, windowed, p):
        lower, upper = check_ah_karcher(p, (0.2, 0.3, 0.5), windowed)
        assert lower.holds and upper.holds

    @pytest.mark.parametrize("base", ["arithmetic", "harmonic"])
    @pytest.mark.parametrize("p", [0.5, 1.5, 2.0, 3.0])
    def test_deformed(self, windowed, base, p):
        w = (0.2, 0.3, 0.5)
        spec = MeanSpec.arithmetic(w) if base == "arithmetic" else MeanSpec.harmonic(w)
        lower, upper = check_ah_deformed(spec, RepresentingFunction.power(0.5), p, windowed)
        assert lower.holds and upper.holds

    @pytest.mark.parametrize("p, q", [(2.0, 0.5), (0.5, 0.5), (2.0, -0.5), (0.5, -0.5)])
    def test_pair_orientation(self, windowed, p, q):
        lower, upper = ando_hiai_pair(p, q, (1 / 3, 1 / 3, 1 / 3), windowed)
        assert loewner_leq(lower, upper).holds

    def test_exponent_must_be_positive(self, windowed):
        with pytest.raises(ValueError, match="positive"):
            check_ah_karcher(0.0, (1 / 3, 1 / 3, 1 / 3), windowed)


class TestReverseAndoHiai:
    def test_power_counterexample_is_reported(self, counterexample):
        report = check_reverse_ah_power(2.0, 1.0, 1.0, 2.0, (0.5, 0.5), counterexample, informational=True)
        assert report.constant == pytest.approx(1.5, rel=1e-12)
        assert not report.holds
        assert not report.violated

    def test_deformed_counterexample_is_reported(self, counterexample):
        lower, upper = check_reverse_ah_deformed(MeanSpec.arithmetic((0.5, 0.5)), RepresentingFunction.power(1.0),
                                                 2.0, 1.0, 2.0, counterexample)
        assert lower.constant == pytest.approx(1.5 / 1.125)
        assert upper.constant == pytest.approx(1.125)
        assert not lower.holds and not upper.holds

    def test_negative_q_mirrors_inverse_inputs(self, counterexample):
        direct = check_reverse_ah_power(2.0, -1.0, 1.0, 2.0, (0.5, 0.5), counterexample)
        mirrored = check_reverse_ah_power(2.0, 1.0, 0.5, 1.0, (0.5, 0.5), [inverse(A) for A in counterexample])
        assert direct.constant * mirrored.constant == pytest.approx(1.0, rel=1e-12)
        assert direct.holds == mirrored.holds

    def test_window_violation(self, windowed):
        with pytest.raises(WindowViolationError, match="outside the window"):
            check_reverse_ah_power(2.0, 0.5, 1.5, 2.0, (1 / 3, 1 / 3, 1 / 3), windowed)

    def test_degenerate_window(self, windowed):
        with pytest.raises(DegenerateConstantError):
            check_reverse_ah_power(2.0, 0.5, 0.0, 2.0, (1 / 3, 1 / 3, 1 / 3), windowed)

    def test_p_below_one_rejected(self, windowed):
        with pytest.raises(ValueError, match="p >= 1"):
            check_reverse_ah_power(0.5, 0.5, 1.0, 2.0, (1 / 3, 1 / 3, 1 / 3), windowed)


class TestKantorovichInstances:
    @pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
    def test_congruence_with_reflection(self, windowed, p):
        B = random_reflection(4, np.random.default_rng(5))
        assert check_kantorovich_congruence(windowed[0], B, 1.0, 2.0, p).holds

    def test_congruence_with_strict_contraction_can_fail(self):
        report = check_kantorovich_congruence(from_diagonal([1.5]), from_diagonal([0.1]), 1.0, 2.0, 2.0,
                                              informational=True)
        # 0.01 * 2.25 against 1.125 * 0.15^2 / 100
        assert not report.holds
        assert report.constant == pytest.approx(1.125)

    def test_congruence_needs_contraction(self):
        with pytest.raises(ValueError, match="B\\^2 <= I"):
            check_kantorovich_congruence(from_diagonal([1.5]), from_diagonal([2.0]), 1.0, 2.0, 2.0)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_jensen(self, windowed, p):
        report = check_kantorovich_jensen((0.2, 0.3, 0.5), windowed, 1.0, 2.0, p)
        assert report.holds
        assert report.constant == kantorovich(2.0, 1.0, p)

    def test_spectral_window(self):
        assert spectral_window([from_diagonal([1.0, 3.0]), from_diagonal([2.0, 5.0])]) == pytest.approx((1.0, 5.0))
        with pytest.raises(ValueError):
            spectral_window([])


def first_input(inputs):
    return inputs[0]


class TestMarkovTailBound:
    def test_never_exceeded(self):
        source = RandomPDSource.two_point(identity(3), identity(3), 0.5)
        report = markov_tail_bound(source, first_input, identity(3) * 2.0, n=20)
        assert report.empirical_prob == 0.0
        assert report.trace_bound == pytest.approx(1.5)
        assert report.holds and not report.informational

    def test_always_exceeded(self):
        source = RandomPDSource.two_point(identity(3) * 2.0, identity(3) * 2.0, 0.5)
        report = markov_tail_bound(source, first_input, identity(3), n=20)
        assert report.empirical_prob == 1.0 and report.mc_stderr == 0.0
        assert report.trace_bound == pytest.approx(6.0)
        assert report.holds

    def test_two_point_scalar_holds_pointwise(self):
        source = RandomPDSource.two_point(from_diagonal([1.0]), from_diagonal([3.0]), 0.5, root_seed=3)
        report = markov_tail_bound(source, first_input, from_diagonal([2.0]), n=200)
        # E[S]/2 - Pr(S > 2) = (n_1 + n_3) / (2n) on any sample
        assert report.trace_bound - report.empirical_prob == pytest.approx(0.5)
        assert 0.3 < report.empirical_prob < 0.7

    def test_higher_moments_are_informational(self):
        source = RandomPDSource.spectral_uniform(2, 1.0, 2.0)
        samples = collect_tail_samples(source, first_input, 50)
        report = tail_bound_from_samples(samples, identity(2) * 1.5, r=2.0)
        assert report.informational and report.r == 2.0
        with pytest.raises(ValueError, match="r >= 1"):
            tail_bound_from_samples(samples, identity(2), r=0.5)

    def test_event_statistic_below_value(self):
        source = RandomPDSource.spectral_uniform(2, 1.0, 2.0, root_seed=1)
        report = markov_tail_bound(source, first_input, identity(2) * 1.5, n=100,
                                   event_statistic=lambda inputs: inputs[0] * 0.5)
        assert report.empirical_prob == 0.0

    def test_worker_count_does_not_change_result(self):
        source = RandomPDSource.spectral_uniform(3, 1.0, 3.0, root_seed=9)
        one = markov_tail_bound(source, first_input, identity(3) * 2.0, n=40, workers=1)
        three = markov_tail_bound(source, first_input, identity(3) * 2.0, n=40, workers=3)
        assert one == three

    def test_non_pd_statistic_fails_the_trial(self):
        source = RandomPDSource.spectral_uniform(2, 1.0, 2.0)
        with pytest.raises(TrialError, match="trial 0") as excinfo:
            collect_tail_samples(source, lambda inputs: inputs[0] * -1.0, 5)
        assert excinfo.value.trial_index == 0

    def test_report_dict_carries_verdict(self):
        report = TailBoundReport("markov", 0.2, 0.01, 0.1, 100, 1.0)
        assert not report.holds and report.violated
        assert report.to_dict()["holds"] is False
