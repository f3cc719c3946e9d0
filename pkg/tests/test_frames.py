import numpy as np
import pytest

from errors import DegenerateInputError, ParameterError
from frames import FrameFamily, cross_gram, frame_family, make_frame


class TestMakeFrame:

    def test_orthonormalizes_and_keeps_span(self):
        rows = [[1.0, 1.0, 0.0, 0.0], [1.0, 0.0, 1.0, 0.0]]
        frame = make_frame(rows)
        assert frame.orthonormality_residual() < 1e-14
        # 原向量可由标架行线性表示
        A = np.array(rows)
        np.testing.assert_allclose(A @ frame.matrix.T @ frame.matrix, A, atol=1e-14)

    def test_dependent_rows(self):
        with pytest.raises(DegenerateInputError) as info:
            make_frame([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])
        assert info.value.details["row"] == 1

    def test_more_rows_than_dimension(self):
        with pytest.raises(DegenerateInputError):
            make_frame(np.eye(3)[[0, 1, 2, 0]][:, :2])

    def test_projection_shape(self):
        frame = make_frame(np.eye(5)[:2])
        x = np.arange(15, dtype=float).reshape(3, 5)
        np.testing.assert_array_equal(frame.project(x), x[:, :2])

    def test_cross_gram(self):
        U = make_frame(np.eye(4)[:2])
        V = make_frame(np.eye(4)[1:3])
        frobenius, spectral = cross_gram(U, V)
        assert frobenius == pytest.approx(1.0)
        assert spectral == pytest.approx(1.0)
        with pytest.raises(ParameterError):
            cross_gram(U, make_frame(np.eye(5)[:2]))


class TestFrameFamily:

    def test_random_family(self):
        family = frame_family(2, 400, 10, seed=1)
        assert len(family) == 10
        assert family.max_orthonormality_residual < 1e-12
        np.testing.assert_allclose(np.diag(family.cross_frobenius), np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(family.cross_frobenius, family.cross_frobenius.T)
        # 随机标架几乎正交：E‖U Vᵀ‖_F² = m²/n
        assert family.mean_cross_frobenius < 0.3
        assert family.median_cross_frobenius <= family.max_cross_frobenius

    def test_reproducible(self):
        a = frame_family(3, 50, 4, seed=9)
        b = frame_family(3, 50, 4, seed=9)
        for fa, fb in zip(a.frames, b.frames):
            np.testing.assert_array_equal(fa.matrix, fb.matrix)

    def test_ambient_dimension_too_small(self):
        with pytest.raises(ParameterError):
            frame_family(3, 5, 2, seed=0)
        with pytest.raises(ParameterError):
            frame_family(1, 5, 0, seed=0)

    def test_empty_family_statistics(self):
        family = FrameFamily.from_frames([])
        assert family.max_cross_frobenius == 0.0
        assert family.max_orthonormality_residual == 0.0
