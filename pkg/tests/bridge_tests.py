import math
import unittest

import numpy as np

from polymodal import modality as mod
from polymodal import ops
from polymodal.errors import InvalidConfig, LayerOutOfRange, TokenWidthMismatch, UnknownModality
from polymodal.gradcheck import STENCIL_FIVE_POINT, grad_check
from polymodal.model.bridge import BridgeConfig, BridgeParams, attention_weights, bridge_forward
from polymodal.model.params import ParameterStore
from polymodal.modality import TokenSequence
from polymodal.tensor import Tensor, no_grad, precision

def _gelu(x):
    return 0.5 * x * (1.0 + np.tanh(math.sqrt(2.0 / math.pi) * (x + 0.044715 * x ** 3)))

def _softmax(x):
    e = np.exp(x - np.max(x, axis=1, keepdims=True))
    return e / np.sum(e, axis=1, keepdims=True)

class BridgeTestCase(unittest.TestCase):
    def setUp(self):
        self.cfg = BridgeConfig(queries=8, width=64, hidden=32, layers=2)
        self.params = BridgeParams(self.cfg, ParameterStore(3), { mod.SAR: 16, mod.TEXT: 24 })

    def _tokens(self, n, d, tag, seed=0):
        return TokenSequence(Tensor(np.random.RandomState(seed).normal(size=(n, d))), tag)

    def test_output_dims_independent_of_length(self):
        with no_grad():
            for n in (1, 7, 33, 256):
                out = bridge_forward(self.params, self._tokens(n, 16, mod.SAR))
                self.assertEqual(out.tokens.shape, (8, 64))
                self.assertEqual(out.modality, mod.SAR)
                out = bridge_forward(self.params, self._tokens(n, 24, mod.TEXT))
                self.assertEqual(out.tokens.shape, (8, 64))

    def test_attention_rows_sum_to_one(self):
        with no_grad():
            for layer in (0, 1):
                w = attention_weights(self.params, self._tokens(11, 16, mod.SAR), layer)
                self.assertEqual(w.shape, (8, 11))
                self.assertTrue(np.allclose(np.sum(w.data, axis=1), 1.0, atol=1e-5))
                self.assertTrue(np.all(w.data >= 0.0))

    def test_errors(self):
        with no_grad():
            self.assertRaises(TokenWidthMismatch, bridge_forward, self.params, self._tokens(4, 17, mod.SAR))
            self.assertRaises(UnknownModality, bridge_forward, self.params, self._tokens(4, 16, mod.RGB))
            self.assertRaises(LayerOutOfRange, attention_weights, self.params, self._tokens(4, 16, mod.SAR), 2)
            self.assertRaises(LayerOutOfRange, attention_weights, self.params, self._tokens(4, 16, mod.SAR), -1)
        self.assertRaises(InvalidConfig, BridgeConfig, queries=0)
        self.assertRaises(InvalidConfig, BridgeConfig, depth=2)

    def test_single_layer_oracle(self):
        rng = np.random.RandomState(5)
        with precision(64):
            store = ParameterStore(0)
            params = BridgeParams(BridgeConfig(queries=1, width=2, hidden=2, layers=1, expansion=1), store, { mod.TABLE: 3 })
            values = {
                    'bridge.queries': rng.normal(size=(1, 2)),
                    'bridge.0.W_q': rng.normal(size=(2, 2)),
                    'bridge.0.table.W_k': rng.normal(size=(3, 2)),
                    'bridge.0.table.W_v': rng.normal(size=(3, 2)),
                    'bridge.0.ffn.fc1.weight': rng.normal(size=(2, 2)),
                    'bridge.0.ffn.fc1.bias': rng.normal(size=(2,)),
                    'bridge.0.ffn.fc2.weight': rng.normal(size=(2, 2)),
                    'bridge.0.ffn.fc2.bias': rng.normal(size=(2,)),
            }
            for name, value in values.items():
                store[name].data = value
            tokens = rng.normal(size=(5, 3))
            with no_grad():
                out = bridge_forward(params, TokenSequence(Tensor(tokens), mod.TABLE)).tokens.data

        q = np.dot(values['bridge.queries'], values['bridge.0.W_q'])
        k = np.dot(tokens, values['bridge.0.table.W_k'])
        v = np.dot(tokens, values['bridge.0.table.W_v'])
        attended = np.dot(_softmax(np.dot(q, k.T) / math.sqrt(2.0)), v)
        hidden = _gelu(np.dot(attended, values['bridge.0.ffn.fc1.weight']) + values['bridge.0.ffn.fc1.bias'])
        expected = np.dot(hidden, values['bridge.0.ffn.fc2.weight']) + values['bridge.0.ffn.fc2.bias']
        self.assertEqual(out.shape, (1, 2))
        self.assertTrue(np.allclose(out, expected, rtol=0.0, atol=1e-12))

    def test_single_key_weights(self):
        with no_grad():
            for layer in (0, 1):
                w = attention_weights(self.params, self._tokens(1, 16, mod.SAR), layer)
                self.assertEqual(w.shape, (8, 1))
                np.testing.assert_array_equal(w.data, np.ones((8, 1)))

    def test_duplicate_keys_uniform(self):
        row = np.random.RandomState(4).normal(size=(1, 16))
        t = TokenSequence(Tensor(np.repeat(row, 6, axis=0)), mod.SAR)
        with no_grad():
            for layer in (0, 1):
                w = attention_weights(self.params, t, layer)
                np.testing.assert_allclose(w.data, np.full((8, 6), 1.0 / 6), rtol=0, atol=1e-6)

    def test_key_order_invariance(self):
        rng = np.random.RandomState(6)
        with precision(64):
            params = BridgeParams(self.cfg, ParameterStore(3), { mod.SAR: 16 })
            tokens = rng.normal(size=(13, 16))
            with no_grad():
                out = bridge_forward(params, TokenSequence(Tensor(tokens), mod.SAR)).tokens.data
                for i in range(5):
                    perm = rng.permutation(13)
                    shuffled = bridge_forward(params, TokenSequence(Tensor(tokens[perm]), mod.SAR)).tokens.data
                    np.testing.assert_allclose(shuffled, out, rtol=0, atol=1e-6)

    def test_gradients(self):
        rng = np.random.RandomState(7)
        with precision(64):
            store = ParameterStore(8)
            params = BridgeParams(BridgeConfig(queries=4, width=16, hidden=8, layers=2), store, { mod.GRAPH: 6 })
            tokens = Tensor(rng.normal(size=(5, 6)), requires_grad=True, name='tokens')

            def forward():
                return ops.mean_all(ops.square(bridge_forward(params, TokenSequence(tokens, mod.GRAPH)).tokens))

            named = dict(store.trainable())
            named['tokens'] = tokens
            report = grad_check(forward, named, samples=150, stencil=STENCIL_FIVE_POINT)
        self.assertEqual(report.samples, 150)
        self.assertTrue(report.passed, report.serialize())
        self.assertTrue(report.max_rel_err < 1e-6)

if __name__ == '__main__':
    unittest.main()
