import math

import numpy as np
import pytest

from meshmotion.tensorcore import BCE_EPS, bce, gelu, gelu_grad, matmul, row_softmax


class TestMatmul:
    def test_identity(self, rng):
        b = rng.standard_normal((4, 3))
        assert np.array_equal(matmul(np.eye(4), b), b)

    def test_small_fixture(self):
        out = matmul([[1, 2], [3, 4]], [[1], [1]])
        assert np.array_equal(out, [[3], [7]])

    def test_against_triple_loop(self, rng):
        a = rng.standard_normal((7, 5))
        b = rng.standard_normal((5, 3))
        ref = np.zeros((7, 3))
        for i in range(7):
            for j in range(3):
                acc = 0.0
                for k in range(5):
                    acc += a[i, k] * b[k, j]
                ref[i, j] = acc
        assert np.abs(matmul(a, b) - ref).max() < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_algebraic_properties(self, rng):
        a = rng.standard_normal((8, 8))
        b = rng.standard_normal((8, 8))
        c = rng.standard_normal((8, 8))
        assert np.abs(matmul(a, np.eye(8)) - a).max() == 0.0
        left = matmul(a, b + c)
        right = matmul(a, b) + matmul(a, c)
        assert np.abs(left - right).max() < 1e-10


class TestRowSoftmax:
    def test_uniform_on_equal_row(self):
        out = row_softmax(np.full((1, 5), 3.2))
        assert np.allclose(out, 0.2, atol=1e-15)

    def test_analytic_two_entry(self):
        out = row_softmax(np.array([[0.0, math.log(3.0)]]))
        assert np.allclose(out, [[0.25, 0.75]], atol=1e-12)

    def test_shift_invariance(self, rng):
        a = rng.standard_normal((6, 7))
        shifted = a + rng.uniform(-50, 50, (6, 1))
        assert np.abs(row_softmax(a) - row_softmax(shifted)).max() < 1e-12

    def test_rows_sum_to_one_strictly_positive(self, rng):
        out = row_softmax(rng.uniform(-100, 100, (20, 9)))
        assert (out > 0).all()
        assert np.abs(out.sum(axis=1) - 1.0).max() < 1e-12


class TestGelu:
    def test_zero(self):
        assert gelu(0.0) == 0.0

    def test_positive_asymptote(self):
        assert abs(gelu(10.0) - 10.0) < 1e-9

    def test_negative_asymptote(self):
        assert abs(gelu(-10.0)) < 1e-8

    def test_shape_of_the_curve(self):
        # exact GELU dips to a single minimum near -0.7518 and is monotone
        # non-decreasing to the right of it (and non-increasing to the left)
        xs = np.arange(-0.75, 8.0, 1e-3)
        vals = gelu(xs)
        assert (np.diff(vals) >= 0).all()
        xs_left = np.arange(-8.0, -0.76, 1e-3)
        vals_left = gelu(xs_left)
        assert (np.diff(vals_left) <= 1e-15).all()
        assert gelu(-0.7518) == pytest.approx(-0.17, abs=1e-3)

    def test_grad_matches_finite_difference(self, rng):
        xs = rng.uniform(-4, 4, 50)
        num = (gelu(xs + 1e-6) - gelu(xs - 1e-6)) / 2e-6
        assert np.abs(gelu_grad(xs) - num).max() < 1e-7


class TestBce:
    def test_perfect_positive(self):
        assert bce(1.0, 1) == pytest.approx(math.log(1.0 - BCE_EPS), abs=1e-15)
        assert abs(bce(1.0, 1)) < 2e-7

    def test_half_is_log2(self):
        assert bce(0.5, 1) == pytest.approx(-math.log(2.0), abs=1e-12)
        assert bce(0.5, 0) == pytest.approx(-math.log(2.0), abs=1e-12)

    def test_clamped_zero(self):
        assert bce(0.0, 1) == pytest.approx(math.log(BCE_EPS), abs=1e-12)
        assert bce(0.0, 1) == pytest.approx(-16.118, abs=1e-3)

    def test_never_positive(self, rng):
        x = rng.uniform(0, 1, 1000)
        y = rng.integers(0, 2, 1000)
        assert (bce(x, y) <= 0).all()

    def test_maximized_at_target(self):
        xs = np.linspace(0.0, 1.0, 101)
        for y in (0, 1):
            best = bce(float(y), y)
            assert (bce(xs, y) <= best + 1e-15).all()

    def test_elementwise_arrays(self):
        out = bce(np.array([[0.9, 0.1]]), np.array([[1, 0]]))
        assert out.shape == (1, 2)
        assert out[0, 0] == pytest.approx(math.log(0.9), abs=1e-12)
        assert out[0, 1] == pytest.approx(math.log(0.9), abs=1e-12)
