import json
import math

import numpy as np
import pytest

from conftest import make_general, make_hermitian, make_pd
from tensormeans import ToleranceConfig
from tensormeans.errors import (
    NotHermitianError,
    NotPositiveDefiniteError,
    ShapeMismatchError,
    SingularTensorError,
    SpectralDomainError,
)
from tensormeans.tensor_core import (
    GaugeNorm,
    HermitianTensor,
    Tensor,
    TensorShape,
    abs_tensor,
    congruence,
    einstein_product,
    exp,
    from_diagonal,
    hermitian_eig,
    identity,
    inverse,
    lambda_max,
    lambda_min,
    load_tensor,
    log,
    loewner_leq,
    max_ratio,
    norm,
    power,
    save_tensor,
    sqrt,
    tensor_from_dict,
    tensor_to_dict,
    thompson_metric,
    trace,
)


class TestShapes:
    def test_flat_dim_and_order(self):
        shape = TensorShape((2, 3))
        assert shape.flat_dim == 6
        assert shape.order == 4

    def test_rejects_empty_and_nonpositive_modes(self):
        with pytest.raises(ShapeMismatchError, match="non-empty"):
            TensorShape(())
        with pytest.raises(ShapeMismatchError, match="positive"):
            TensorShape((2, 0))

    def test_entries_must_match_shape(self):
        with pytest.raises(ShapeMismatchError, match="do not match"):
            Tensor((2, 2), np.eye(3))

    def test_non_hermitian_rejected(self):
        with pytest.raises(NotHermitianError, match="deviate"):
            HermitianTensor((2,), [[1.0, 2.0], [0.0, 1.0]])

    def test_tiny_asymmetry_is_rehermitized(self):
        H = HermitianTensor((2,), [[1.0, 1e-14], [0.0, 1.0]])
        np.testing.assert_array_equal(H.entries, H.entries.conj().T)

    def test_entries_are_read_only(self):
        H = identity(2)
        with pytest.raises(ValueError):
            H.entries[0, 0] = 5.0

    def test_unfold_matches_row_major_layout(self, rng):
        array = rng.standard_normal((2, 3, 2, 3))
        T = Tensor.from_array(array)
        assert T.shape.mode_dims == (2, 3)
        assert T.entries[1 * 3 + 2, 0 * 3 + 1] == array[1, 2, 0, 1]
        np.testing.assert_array_equal(T.to_array(), array)

    def test_from_array_rejects_odd_order(self):
        with pytest.raises(ShapeMismatchError, match="even-order"):
            Tensor.from_array(np.zeros((2, 2, 2)))


class TestEinsteinProduct:
    def test_matches_contraction_over_mode_pairs(self, rng):
        A = Tensor.from_array(rng.standard_normal((2, 3, 2, 3)) + 1j * rng.standard_normal((2, 3, 2, 3)))
        B = Tensor.from_array(rng.standard_normal((2, 3, 2, 3)))
        expected = np.einsum("ijmn,mnkl->ijkl", A.to_array(), B.to_array())
        np.testing.assert_allclose(einstein_product(A, B).to_array(), expected, atol=1e-12)
        np.testing.assert_allclose((A @ B).entries, A.entries @ B.entries)

    def test_identity_is_neutral(self, rng):
        A = make_general(rng, 4)
        np.testing.assert_allclose((identity(4) @ A).entries, A.entries)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            einstein_product(identity((2, 2)), identity(4))


class TestArithmetic:
    def test_hermitian_closed_under_real_operations(self, rng):
        A, B = make_pd(rng, 3), make_pd(rng, 3)
        assert isinstance(A + B, HermitianTensor)
        assert isinstance(A - B, HermitianTensor)
        assert isinstance(2.5 * A, HermitianTensor)
        assert isinstance(A / 2, HermitianTensor)

    def test_complex_scalar_gives_general_tensor(self):
        result = identity(2) * 1j
        assert type(result) is Tensor


class TestSpectralCalculus:
    def test_eigenvalues_descending_and_cached(self, rng):
        H = make_hermitian(rng, 5)
        spectrum = hermitian_eig(H)
        assert np.all(np.diff(spectrum.eigenvalues) <= 0)
        assert hermitian_eig(H) is spectrum
        np.testing.assert_allclose(spectrum.reconstruct(), H.entries, atol=1e-12)

    def test_diagonal_functions_are_exact(self):
        D = from_diagonal([1.0, 4.0, 16.0])
        np.testing.assert_array_equal(sqrt(D).entries.diagonal().real, [1.0, 2.0, 4.0])
        np.testing.assert_array_equal(inverse(D).entries.diagonal().real, [1.0, 0.25, 0.0625])
        np.testing.assert_allclose(power(D, 1.5).entries.diagonal().real, [1.0, 8.0, 64.0], rtol=1e-15)

    def test_functional_calculus_identities(self, rng):
        H = make_pd(rng, 4)
        root = sqrt(H)
        np.testing.assert_allclose((root @ root).entries, H.entries, atol=1e-12)
        np.testing.assert_allclose(exp(log(H)).entries, H.entries, atol=1e-11)
        np.testing.assert_allclose((H @ inverse(H)).entries, np.eye(4), atol=1e-11)
        np.testing.assert_allclose(power(H, 2).entries, (H @ H).entries, atol=1e-11)

    def test_power_one_returns_input(self, rng):
        H = make_pd(rng, 3)
        assert power(H, 1) is H

    def test_results_are_hermitian(self, rng):
        H = make_pd(rng, 6)
        for result in (sqrt(H), log(H), power(H, 0.3)):
            np.testing.assert_array_equal(result.entries, result.entries.conj().T)

    def test_abs_of_indefinite(self):
        np.testing.assert_array_equal(abs_tensor(from_diagonal([-2.0, 3.0])).entries.diagonal().real, [2.0, 3.0])

    @pytest.mark.parametrize("values", [[1.0, -1.0], [0.0, 2.0]])
    def test_log_outside_domain(self, values):
        with pytest.raises(SpectralDomainError, match="undefined"):
            log(from_diagonal(values))

    def test_lambda_extremes_and_trace(self):
        D = from_diagonal([3.0, -1.0, 2.0])
        assert lambda_max(D) == pytest.approx(3.0)
        assert lambda_min(D) == pytest.approx(-1.0)
        value = trace(D)
        assert isinstance(value, float) and value == 4.0

    def test_trace_of_general_tensor_is_complex(self):
        assert trace(Tensor((2,), [[1.0, 0.0], [0.0, 1j]])) == 1 + 1j


class TestNorms:
    @pytest.mark.parametrize("gauge, expected", [
        (GaugeNorm.SPECTRAL, 4.0),
        ("trace", 7.0),
        (GaugeNorm.FROBENIUS, 5.0),
    ])
    def test_gauges_on_diagonal(self, gauge, expected):
        assert norm(from_diagonal([3.0, -4.0]), gauge) == pytest.approx(expected)

    def test_default_gauge_is_spectral(self, rng):
        H = make_hermitian(rng, 4)
        assert norm(H) == pytest.approx(np.linalg.norm(H.entries, 2))

    def test_unknown_gauge(self):
        with pytest.raises(ValueError):
            norm(identity(2), "nuclear-ish")


class TestLoewner:
    def test_simple_orderings(self):
        result = loewner_leq(identity(2), identity(2) * 2)
        assert result.holds and result.margin == pytest.approx(1.0)
        result = loewner_leq(identity(2) * 2, identity(2))
        assert not result.holds and result.margin == pytest.approx(-1.0)

    def test_tolerance_is_relative(self):
        X = from_diagonal([1.0 + 1e-11, 1.0])
        assert loewner_leq(X, identity(2)).holds
        assert not loewner_leq(X, identity(2), ToleranceConfig(loewner_tol=0.0)).holds

    def test_incomparable(self):
        assert not loewner_leq(from_diagonal([1.0, 3.0]), from_diagonal([2.0, 2.0])).holds


class TestThompson:
    def test_diagonal_value(self):
        X, Y = from_diagonal([1.0, 4.0]), from_diagonal([2.0, 1.0])
        assert thompson_metric(X, Y) == pytest.approx(math.log(4.0))

    def test_max_ratio_form(self, rng):
        X, Y = make_pd(rng, 4), make_pd(rng, 4)
        alpha = max_ratio(X, Y)
        assert loewner_leq(X, Y * alpha).margin == pytest.approx(0.0, abs=1e-10)
        expected = math.log(max(max_ratio(X, Y), max_ratio(Y, X)))
        assert thompson_metric(X, Y) == pytest.approx(expected, rel=1e-10)

    def test_metric_axioms(self, rng):
        X, Y, Z = make_pd(rng, 3), make_pd(rng, 3), make_pd(rng, 3)
        assert thompson_metric(X, X) == 0.0
        assert thompson_metric(X, Y) == pytest.approx(thompson_metric(Y, X), rel=1e-10)
        assert thompson_metric(X, Z) <= thompson_metric(X, Y) + thompson_metric(Y, Z) + 1e-12

    def test_scaling(self, rng):
        X = make_pd(rng, 3)
        assert thompson_metric(X, X * math.e) == pytest.approx(1.0)

    def test_requires_pd(self):
        with pytest.raises(NotPositiveDefiniteError, match="positive-definite"):
            thompson_metric(identity(2), from_diagonal([1.0, -1.0]))


class TestCongruence:
    def test_matches_matrix_formula(self, rng):
        A, Z = make_pd(rng, 3), make_general(rng, 3)
        expected = Z.entries.conj().T @ A.entries @ Z.entries
        np.testing.assert_allclose(congruence(A, Z).entries, expected, atol=1e-12)

    def test_singular_factor(self):
        with pytest.raises(SingularTensorError, match="singular"):
            congruence(identity(2), Tensor((2,), [[1.0, 1.0], [1.0, 1.0]]))


class TestTensorIO:
    def test_save_and_load(self, rng, tmp_path):
        H = make_pd(rng, 4, mode_dims=(2, 2))
        path = save_tensor(H, tmp_path / "h.json")
        loaded = load_tensor(path)
        assert loaded.shape == H.shape
        np.testing.assert_array_equal(loaded.entries, H.entries)

    def test_record_layout(self):
        record = tensor_to_dict(from_diagonal([1.0, 2.0]))
        assert record == {"mode_dims": [2], "re": [1.0, 0.0, 0.0, 2.0], "im": [0.0, 0.0, 0.0, 0.0]}
        assert json.loads(json.dumps(record)) == record

    def test_wrong_entry_count(self):
        with pytest.raises(ShapeMismatchError, match="need 4 entries"):
            tensor_from_dict({"mode_dims": [2], "re": [1.0, 0.0, 1.0], "im": [0.0, 0.0, 0.0]})

    def test_missing_keys(self):
        with pytest.raises(ValueError, match="mode_dims"):
            tensor_from_dict({"re": [1.0]})
