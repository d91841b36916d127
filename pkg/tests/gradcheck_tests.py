import unittest

from polymodal import modality as mod
from polymodal import training
from polymodal.gradcheck import STENCIL_FIVE_POINT
from polymodal.tensor import set_precision

class PipelineGradientTestCase(unittest.TestCase):
    '''Encoder, bridge, adapters, head and loss of the desk model, checked
    end to end in 64-bit mode.'''

    def tearDown(self):
        set_precision(32)

    def _check(self, modality):
        run = training.RunConfig(modality=modality, precision=64)
        report = training.check_pipeline_gradients(run, samples=100)
        self.assertEqual(report.stencil, STENCIL_FIVE_POINT)
        self.assertEqual(report.samples, 100)
        self.assertTrue(report.scalars >= 100, report.scalars)
        self.assertTrue(report.max_rel_err < 1e-6, '%s: %s' % (modality, report.serialize()))
        self.assertTrue(report.passed)

def _make_test(modality):
    def test(self):
        self._check(modality)
    test.__name__ = str('test_%s' % modality)
    return test

for _m in mod.MODALITIES:
    setattr(PipelineGradientTestCase, 'test_%s' % _m, _make_test(_m))

if __name__ == '__main__':
    unittest.main()
