import unittest

import numpy as np

from polymodal import modality as mod
from polymodal import ops
from polymodal.errors import ContextOverflow, InvalidConfig
from polymodal.gradcheck import STENCIL_FIVE_POINT, grad_check
from polymodal.model import backbone as bb
from polymodal.model import layers
from polymodal.model.bridge import BridgedTokens
from polymodal.model.params import ParameterStore
from polymodal.tensor import Tensor, no_grad, precision
from polymodal.tokenizer import EOS, VOCAB_SIZE

class BackboneTestCase(unittest.TestCase):
    def setUp(self):
        self.cfg = bb.BackboneConfig(width=16, blocks=2, heads=2, context=24, adapter_rank=4)
        self.store = ParameterStore(11)
        self.params = bb.BackboneParams(self.cfg, self.store)
        self.rng = np.random.RandomState(0)

    def _bridged(self, n=4):
        return BridgedTokens(Tensor(self.rng.normal(size=(n, 16))), mod.RGB)

    def test_groups(self):
        self.assertTrue(self.store.is_frozen('backbone.embedding'))
        self.assertTrue(self.store.is_frozen('backbone.0.attn.q.weight'))
        self.assertTrue(self.store.is_frozen('backbone.norm.gamma'))
        self.assertFalse(self.store.is_frozen('backbone.1.adapter.up.weight'))
        self.assertFalse(self.store.is_frozen('backbone.1.adapter.down.weight'))

    def test_zero_adapter_contributes_nothing(self):
        with no_grad():
            x = Tensor(self.rng.normal(size=(5, 16)))
            out = bb.adapter(self.store, 'backbone.0.adapter', x)
            self.assertTrue(np.all(out.data == 0.0))

            seq = bb.assemble(self.params, self._bridged(), [1, 2, 3])
            hidden = bb.backbone_forward(self.params, seq)
            mask = bb.attention_mask(self.cfg, len(seq), seq.boundary)
            base = layers.stack(self.store, 'backbone', seq.embeddings, self.cfg.blocks, self.cfg.heads, mask)
            self.assertEqual(hidden.data.tobytes(), base.data.tobytes())

    def test_assemble(self):
        s = self._bridged(4)
        seq = bb.assemble(self.params, s, [72, 105])
        self.assertEqual(len(seq), 6)
        self.assertEqual(seq.boundary, 4)
        self.assertEqual(seq.prompt_ids, [72, 105])
        self.assertEqual(seq.embeddings.data[:4].tobytes(), s.tokens.data.tobytes())

        empty = bb.assemble(self.params, s, [])
        self.assertEqual(len(empty), 4)
        self.assertEqual(empty.boundary, 4)

        longer = bb.extend(self.params, seq, 33)
        self.assertEqual(len(longer), 7)
        self.assertEqual(longer.prompt_ids, [72, 105, 33])

    def test_context_overflow(self):
        with no_grad():
            seq = bb.assemble(self.params, self._bridged(4), list(range(20)))
            self.assertEqual(bb.backbone_forward(self.params, seq).shape, (24, 16))
            seq = bb.assemble(self.params, self._bridged(4), list(range(21)))
            self.assertRaises(ContextOverflow, bb.backbone_forward, self.params, seq)

    def test_causality(self):
        with precision(64):
            store = ParameterStore(2)
            params = bb.BackboneParams(self.cfg, store)
            for name in store.in_group(bb.ADAPTER_GROUP):
                store[name].data = self.rng.normal(size=store[name].shape)
            with no_grad():
                s = BridgedTokens(Tensor(self.rng.normal(size=(4, 16))), mod.RGB)
                a = bb.backbone_forward(params, bb.assemble(params, s, [10, 20, 30])).data
                b = bb.backbone_forward(params, bb.assemble(params, s, [10, 20, 31])).data
                self.assertTrue(np.allclose(a[:6], b[:6], rtol=0.0, atol=1e-12))
                self.assertFalse(np.allclose(a[6], b[6]))

                # with a bidirectional prefix the modal rows see each other
                params.cfg = bb.BackboneConfig(width=16, blocks=2, heads=2, context=24, adapter_rank=4, causal_prefix=False)
                t = s.tokens.data.copy()
                t[3] += 1.0
                c = bb.backbone_forward(params, bb.assemble(params, s, [10])).data
                d = bb.backbone_forward(params, bb.assemble(params, BridgedTokens(Tensor(t), mod.RGB), [10])).data
                self.assertFalse(np.allclose(c[0], d[0]))

    def test_attention_mask(self):
        mask = bb.attention_mask(self.cfg, 5, 3)
        self.assertTrue(np.array_equal(mask, np.tril(np.ones((5, 5), dtype=bool))))
        cfg = bb.BackboneConfig(width=16, heads=2, causal_prefix=False)
        mask = bb.attention_mask(cfg, 5, 3)
        self.assertTrue(mask[0, 2])
        self.assertFalse(mask[3, 4])

    def test_decode(self):
        seq = bb.assemble(self.params, self._bridged(4), [1])
        lm_weight = Tensor(np.zeros((16, VOCAB_SIZE)))
        bias = np.zeros(VOCAB_SIZE)
        bias[EOS] = 1.0
        self.assertEqual(bb.decode_text(self.params, seq, 5, lm_weight, Tensor(bias)), [])

        bias[:] = 0.0
        bias[65] = 1.0
        self.assertEqual(bb.decode_text(self.params, seq, 5, lm_weight, Tensor(bias)), [65] * 5)
        # ties resolve to the lowest id
        self.assertEqual(bb.decode_text(self.params, seq, 3, lm_weight), [0, 0, 0])
        # stops when the context is full
        self.assertEqual(len(bb.decode_text(self.params, seq, 100, lm_weight, Tensor(bias))), 24 - 5)

    def test_config(self):
        self.assertRaises(InvalidConfig, bb.BackboneConfig, width=10, heads=4)
        self.assertRaises(InvalidConfig, bb.BackboneConfig, context=0)
        self.assertRaises(InvalidConfig, bb.BackboneConfig, layers=2)
        cfg = bb.BackboneConfig(context=64)
        self.assertEqual(bb.BackboneConfig.deserialize(cfg.serialize()).serialize(), cfg.serialize())

    def test_no_blocks_is_identity(self):
        cfg = bb.BackboneConfig(width=16, blocks=0, heads=2, context=24, adapter_rank=4)
        params = bb.BackboneParams(cfg, ParameterStore(4))
        with no_grad():
            seq = bb.assemble(params, self._bridged(4), [5, 6, 7])
            hidden = bb.backbone_forward(params, seq)
        self.assertEqual(hidden.shape, (7, 16))
        self.assertEqual(hidden.data.tobytes(), seq.embeddings.data.tobytes())

    def test_adapter_gradients(self):
        with precision(64):
            store = ParameterStore(9)
            params = bb.BackboneParams(self.cfg, store)
            for name in store.in_group(bb.ADAPTER_GROUP):
                if '.up.' in name:
                    store[name].data = 0.1 * self.rng.normal(size=store[name].shape)
            s = BridgedTokens(Tensor(self.rng.normal(size=(4, 16))), mod.RGB)

            def forward():
                seq = bb.assemble(params, s, [40, 41, 42])
                return ops.mean_all(ops.square(bb.output_norm(params, bb.backbone_forward(params, seq))))

            trainable = store.trainable()
            self.assertEqual(sorted(trainable), sorted(store.in_group(bb.ADAPTER_GROUP)))
            report = grad_check(forward, trainable, samples=120, stencil=STENCIL_FIVE_POINT)
        self.assertEqual(report.samples, 120)
        self.assertTrue(report.passed, report.serialize())
        self.assertTrue(report.max_rel_err < 1e-6)

if __name__ == '__main__':
    unittest.main()
