import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pupguard.fusion import (
    FusionScheme,
    fit_scaler,
    fuse_concat,
    fuse_cross,
)

finite_vectors = arrays(
    np.float64,
    st.integers(min_value=1, max_value=16),
    elements=st.floats(min_value=-1e6, max_value=1e6),
)


class TestConcat:
    def test_appends_timing(self):
        fused = fuse_concat(np.array([1.0, 2.0, 3.0]), 0.5, "p1")
        assert fused.values.tolist() == [1.0, 2.0, 3.0, 0.5]
        assert fused.scheme is FusionScheme.CONCAT
        assert fused.source_pair_id == "p1"

    def test_empty_image_edge(self):
        assert fuse_concat(np.array([]), 0.5).values.tolist() == [0.5]

    @given(finite_vectors, st.floats(min_value=-10, max_value=10))
    @settings(max_examples=50)
    def test_shape_and_verbatim_copy(self, img, t):
        fused = fuse_concat(img, t)
        assert fused.values.shape[0] == img.shape[0] + 1
        assert np.array_equal(fused.values[:-1], img)


class TestCross:
    def test_elementwise_multiply(self):
        fused = fuse_cross(np.array([1.0, 2.0, 3.0]), 2.0)
        assert fused.values.tolist() == [2.0, 4.0, 6.0]

    def test_zero_timing_annihilates(self):
        fused = fuse_cross(np.array([5.0, -3.0]), 0.0)
        assert np.all(fused.values == 0.0)

    def test_sign_propagation(self):
        fused = fuse_cross(np.array([1.0, -1.0]), -1.5)
        assert fused.values.tolist() == [-1.5, 1.5]

    def test_unit_timing_identity(self):
        img = np.array([0.25, -7.0, 3.5])
        assert np.array_equal(fuse_cross(img, 1.0, 0.0).values, img)

    def test_offset_shifts_multiplier(self):
        img = np.array([2.0])
        assert fuse_cross(img, 0.0, offset=1.0).values.tolist() == [2.0]

    @given(
        finite_vectors,
        st.floats(min_value=-10, max_value=10),
        st.floats(min_value=-10, max_value=10),
    )
    @settings(max_examples=50)
    def test_bilinear_in_image(self, img, t, alpha):
        a = fuse_cross(alpha * img, t).values
        b = alpha * fuse_cross(img, t).values
        assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


class TestScaler:
    def test_standardizes_training_matrix(self, rng):
        X = rng.normal(5.0, 3.0, size=(50, 4))
        scaler = fit_scaler(X)
        Z = scaler.transform(X)
        assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-9)
        assert np.allclose(Z.std(axis=0), 1.0, atol=1e-9)

    def test_zero_variance_dimension_passes_through(self, rng):
        X = rng.normal(size=(20, 3))
        X[:, 1] = 4.0
        scaler = fit_scaler(X)
        Z = scaler.transform(X)
        assert np.allclose(Z[:, 1], 0.0)

    def test_needs_two_rows(self):
        from pupguard.errors import FitError

        with pytest.raises(FitError):
            fit_scaler(np.ones((1, 3)))
