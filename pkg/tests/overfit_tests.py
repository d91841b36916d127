import unittest

import numpy as np

from polymodal import modality as mod
from polymodal import synthetic
from polymodal import training
from polymodal.dataset import Dataset
from polymodal.evaluation import evaluate
from polymodal.prompts import EVAL, get_prompt_registry, select_prompt
from polymodal.tensor import set_precision

STEPS_SCHEDULE = { 'max_lr': 3e-3, 'max_epochs': 30, 'warmup_epochs': 1, 'steps_per_epoch': 10 }

def overfit(modality, samples=8):
    set_precision(32)
    data = Dataset.generate(synthetic.SyntheticTaskSpec(modality, samples=samples))
    run = training.RunConfig(modality=modality, batch_size=samples, weight_decay=0.0, schedule=STEPS_SCHEDULE)
    return data, training.train(run, data)

class OverfitTestCase(unittest.TestCase):
    '''300 full-batch steps of the desk model on 8 samples.'''

    def _check(self, modality):
        data, result = overfit(modality)
        losses = result.losses
        self.assertEqual(len(losses), 300)
        self.assertTrue(losses[-1] < 0.1 * losses[0], '%s: %r -> %r' % (modality, losses[0], losses[-1]))
        if data.task == synthetic.CLASSIFY:
            self.assertEqual(evaluate(result.model, data)['accuracy'], 1.0)

def _make_test(modality):
    def test(self):
        self._check(modality)
    test.__name__ = str('test_%s' % modality)
    return test

for _m in mod.MODALITIES:
    setattr(OverfitTestCase, 'test_%s' % _m, _make_test(_m))

class MemorizeTestCase(unittest.TestCase):
    def test_single_code_target_reproduced(self):
        data, result = overfit(mod.CODE, samples=1)
        prompt = select_prompt(get_prompt_registry(), mod.CODE, EVAL)
        sample, target = data.samples[0], data.targets[0]
        self.assertEqual(result.model.predict(sample, prompt), target)

if __name__ == '__main__':
    unittest.main()
