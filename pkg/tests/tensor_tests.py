import unittest

import numpy as np

from polymodal import ops
from polymodal.errors import (DimensionMismatch, DisconnectedLoss, NonDeterministicForward, NonFiniteValue, NonScalarLoss,
        VocabularyOverflow, ZeroSizedTensor)
from polymodal.gradcheck import STENCIL_CENTRAL, grad_check
from polymodal.tensor import Tensor, backward, get_tape, no_grad, precision

def _param(rng, *dims):
    return Tensor(rng.normal(size=dims), requires_grad=True)

class TensorTestCase(unittest.TestCase):
    def test_zero_sized(self):
        self.assertRaises(ZeroSizedTensor, Tensor, np.zeros((0, 3)))

    def test_default_precision(self):
        self.assertEqual(Tensor([1.0]).data.dtype, np.float32)
        with precision(64):
            self.assertEqual(Tensor([1.0]).data.dtype, np.float64)
        self.assertEqual(Tensor([1.0]).data.dtype, np.float32)

    def test_matmul_dims(self):
        a = Tensor(np.ones((2, 3)))
        b = Tensor(np.ones((2, 3)))
        self.assertRaises(DimensionMismatch, ops.matmul, a, b)
        self.assertEqual(ops.matmul(a, ops.transpose(b)).dims, [2, 2])

    def test_matmul_triple_loop(self):
        rng = np.random.RandomState(1)
        a = rng.normal(size=(3, 4))
        b = rng.normal(size=(4, 2))
        expected = np.zeros((3, 2))
        for i in range(3):
            for j in range(2):
                for k in range(4):
                    expected[i, j] += a[i, k] * b[k, j]
        with precision(64):
            y = ops.matmul(Tensor(a), Tensor(b))
        self.assertEqual(y.dims, [3, 2])
        self.assertTrue(np.all(np.abs(y.data - expected) < 1e-6))

    def test_conv1d_sliding_window(self):
        signal = np.array([1.0, 4.0, -2.0, 0.5, 3.0])
        with precision(64):
            y = ops.conv1d(Tensor(signal.reshape(1, 5)), Tensor(np.full((1, 1, 3), 1.0 / 3)), stride=1, pad=0)
        expected = [sum(signal[i:i + 3]) / 3.0 for i in range(3)]
        self.assertEqual(y.dims, [1, 3])
        np.testing.assert_allclose(y.data[0], expected, rtol=0, atol=1e-12)

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.RandomState(0)
        with precision(64):
            y = ops.softmax_rows(Tensor(rng.normal(scale=50.0, size=(5, 7))))
        np.testing.assert_allclose(np.sum(y.data, axis=1), np.ones(5), rtol=0, atol=1e-12)

    def test_softmax_stabilized(self):
        y = ops.softmax_rows(Tensor([[1000.0, 0.0]]))
        self.assertTrue(np.all(np.isfinite(y.data)))
        self.assertAlmostEqual(float(y.data[0, 0]), 1.0, places=6)
        self.assertAlmostEqual(float(y.data[0, 1]), 0.0, places=6)
        y = ops.softmax_rows(Tensor(np.zeros((1, 4))))
        np.testing.assert_allclose(y.data, np.full((1, 4), 0.25), rtol=0, atol=1e-7)

    def test_softmax_row_sums_all_shapes(self):
        rng = np.random.RandomState(2)
        with precision(64):
            with no_grad():
                for m in range(1, 65):
                    for n in range(1, 65):
                        y = ops.softmax_rows(Tensor(rng.normal(scale=10.0, size=(m, n))))
                        self.assertTrue(np.all(np.abs(np.sum(y.data, axis=1) - 1.0) < 1e-6), (m, n))

    def test_softmax_mask(self):
        with precision(64):
            mask = np.array([[True, False], [True, True]])
            y = ops.softmax_rows(Tensor([[3.0, 100.0], [0.0, 0.0]]), mask)
        self.assertEqual(y.data[0, 0], 1.0)
        self.assertEqual(y.data[0, 1], 0.0)
        self.assertEqual(y.data[1, 0], 0.5)

    def test_non_finite(self):
        self.assertRaises(NonFiniteValue, ops.softmax_rows, Tensor([[np.inf, 0.0]]))

    def test_large_inputs_stay_finite(self):
        with precision(64):
            x = Tensor(np.linspace(-1e3, 1e3, 12).reshape(3, 4))
            for y in (ops.softmax_rows(x), ops.layer_norm(x), ops.gelu(x), ops.tanh(x)):
                self.assertTrue(np.all(np.isfinite(y.data)))
            self.assertTrue(np.isfinite(ops.cross_entropy(x, [0, 1, 3]).item()))

    def test_layer_norm_constant_row(self):
        with precision(64):
            y = ops.layer_norm(Tensor([[2.0, 2.0, 2.0]]))
        np.testing.assert_array_equal(y.data, np.zeros((1, 3)))

    def test_embedding_overflow(self):
        table = Tensor(np.ones((4, 2)))
        self.assertRaises(VocabularyOverflow, ops.embedding_lookup, table, [1, 4])

    def test_backward_matmul(self):
        with precision(64):
            a = Tensor([[1.0, 2.0]], requires_grad=True)
            b = Tensor([[3.0], [4.0]], requires_grad=True)
            backward(ops.sum_all(ops.matmul(a, b)))
        np.testing.assert_array_equal(a.grad, [[3.0, 4.0]])
        np.testing.assert_array_equal(b.grad, [[1.0], [2.0]])
        self.assertEqual(len(get_tape()), 0)

    def test_gradients_accumulate(self):
        with precision(64):
            a = Tensor([2.0], requires_grad=True)
            backward(ops.sum_all(ops.mul(a, 3.0)))
            backward(ops.sum_all(ops.mul(a, 3.0)))
        np.testing.assert_array_equal(a.grad, [6.0])
        a.zero_grad()
        np.testing.assert_array_equal(a.grad, [0.0])

    def test_backward_errors(self):
        a = Tensor(np.ones((2, 2)), requires_grad=True)
        self.assertRaises(NonScalarLoss, backward, ops.mul(a, 2.0))
        get_tape().clear()
        self.assertRaises(DisconnectedLoss, backward, ops.sum_all(Tensor(np.ones(3))))

    def test_no_grad(self):
        a = Tensor([1.0], requires_grad=True)
        with no_grad():
            y = ops.mul(a, 2.0)
        self.assertFalse(y.tracked)
        self.assertEqual(len(get_tape()), 0)

class PrimitiveGradientTestCase(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.RandomState(3)

    def _check(self, forward, params, tolerance=1e-6):
        report = grad_check(forward, params, samples=60, tolerance=tolerance)
        self.assertTrue(report.passed, report.serialize())

    def test_pure_linear(self):
        def dyadic(*dims):
            return Tensor(self.rng.randint(-8, 9, size=dims) / 8.0, requires_grad=True)

        with precision(64):
            x, W, b = dyadic(3, 4), dyadic(4, 2), dyadic(2)
            # dyadic values and step keep every perturbed evaluation exact
            report = grad_check(lambda: ops.sum_all(ops.linear(x, W, b)), [x, W, b], samples=22,
                    epsilon=2.0 ** -10, tolerance=1e-10)
        self.assertEqual(report.stencil, STENCIL_CENTRAL)
        self.assertEqual(report.samples, 22)
        self.assertTrue(report.max_rel_err < 1e-10, report.serialize())

    def test_non_deterministic_forward(self):
        calls = []
        with precision(64):
            x = _param(self.rng, 2, 2)

            def forward():
                calls.append(None)
                return ops.sum_all(ops.mul(x, float(len(calls))))

            self.assertRaises(NonDeterministicForward, grad_check, forward, [x])

    def test_linear_gelu_layer_norm(self):
        with precision(64):
            x = _param(self.rng, 3, 4)
            W = _param(self.rng, 4, 5)
            b = _param(self.rng, 5)
            g = _param(self.rng, 5)
            beta = _param(self.rng, 5)
            self._check(lambda: ops.mean_all(ops.square(ops.layer_norm(ops.gelu(ops.linear(x, W, b)), g, beta))), [x, W, b, g, beta], tolerance=1e-4)

    def test_softmax_cross_entropy(self):
        with precision(64):
            x = _param(self.rng, 4, 6)
            self._check(lambda: ops.cross_entropy(ops.tanh(x), [0, 5, 2, 2]), [x])
            self._check(lambda: ops.sum_all(ops.mul(ops.softmax_rows(x), Tensor(np.arange(24.0).reshape(4, 6)))), [x])

    def test_shape_ops(self):
        with precision(64):
            x = _param(self.rng, 4, 6)
            y = _param(self.rng, 2, 6)
            self._check(lambda: ops.mse(ops.mean_pool(ops.reshape(ops.concat([x, y], axis=0), (3, 2, 6)), axis=1),
                np.ones((3, 6))), [x, y])
            self._check(lambda: ops.sum_all(ops.square(ops.slice_cols(ops.take_rows(x, [3, 0, 3]), 1, 4))), [x])
            self._check(lambda: ops.sum_all(ops.square(ops.slice_rows(x, 1, 3))), [x])

    def test_convolutions(self):
        with precision(64):
            x1 = _param(self.rng, 2, 9)
            k1 = _param(self.rng, 3, 2, 3)
            b1 = _param(self.rng, 3)
            self._check(lambda: ops.sum_all(ops.square(ops.conv1d(x1, k1, stride=2, pad=1, bias=b1))), [x1, k1, b1])
            x2 = _param(self.rng, 2, 6, 5)
            k2 = _param(self.rng, 3, 2, 3, 3)
            b2 = _param(self.rng, 3)
            self._check(lambda: ops.sum_all(ops.square(ops.conv2d(x2, k2, stride=2, pad=1, bias=b2))), [x2, k2, b2])

    def test_embedding(self):
        with precision(64):
            table = _param(self.rng, 5, 3)
            self._check(lambda: ops.sum_all(ops.square(ops.embedding_lookup(table, [4, 1, 4]))), [table])

if __name__ == '__main__':
    unittest.main()
