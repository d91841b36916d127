import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from polymodal import modality as mod
from polymodal import prompts
from polymodal.errors import InvalidConfig, MalformedRecord, MissingFile, UnknownModality

SHARED_PROMPTS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'share', 'prompts', 'prompts.tsv')

class PromptRegistryTestCase(unittest.TestCase):
    def setUp(self):
        self.registry = prompts.PromptRegistry.from_string(prompts.PROMPTS_STR_DEFAULT)

    def test_shipped_file_matches_builtin(self):
        shipped = prompts.PromptRegistry.from_file(SHARED_PROMPTS)
        self.assertEqual(shipped.serialize(), self.registry.serialize())

    def test_every_modality_but_code_has_prompts(self):
        for m in mod.MODALITIES:
            if m == mod.CODE:
                self.assertEqual(self.registry.prompts(m), [])
            else:
                self.assertTrue(self.registry.prompts(m))
        self.assertEqual(len(self.registry.prompts(mod.RGB)), 4)

    def test_eval_mode_is_first_prompt(self):
        for m in mod.MODALITIES:
            expected = (self.registry.prompts(m) or [''])[0]
            for i in range(3):
                self.assertEqual(prompts.select_prompt(self.registry, m, prompts.EVAL), expected)

    def test_train_mode_draws_every_prompt(self):
        rng = np.random.RandomState(0)
        seen = set(prompts.select_prompt(self.registry, mod.HSI, prompts.TRAIN, rng) for i in range(200))
        self.assertEqual(seen, set(self.registry.prompts(mod.HSI)))
        self.assertEqual(prompts.select_prompt(self.registry, mod.CODE, prompts.TRAIN, rng), '')

    def test_train_mode_is_uniform(self):
        rng = np.random.RandomState(11)
        choices = self.registry.prompts(mod.HSI)
        self.assertEqual(len(choices), 3)
        draws = [prompts.select_prompt(self.registry, mod.HSI, prompts.TRAIN, rng) for i in range(3000)]
        sigma = math.sqrt(3000 * (1.0 / 3) * (2.0 / 3))
        for p in choices:
            self.assertTrue(abs(draws.count(p) - 1000) < 3 * sigma, '%d draws of %r' % (draws.count(p), p))

    def test_train_mode_is_seeded(self):
        a = [prompts.select_prompt(self.registry, mod.RGB, prompts.TRAIN, np.random.RandomState(7)) for i in range(5)]
        b = [prompts.select_prompt(self.registry, mod.RGB, prompts.TRAIN, np.random.RandomState(7)) for i in range(5)]
        self.assertEqual(a, b)

    def test_bad_arguments(self):
        self.assertRaises(UnknownModality, prompts.select_prompt, self.registry, 'lidar', prompts.EVAL)
        self.assertRaises(InvalidConfig, prompts.select_prompt, self.registry, mod.RGB, 'test')

    def test_malformed_records(self):
        self.assertRaises(MalformedRecord, prompts.PromptRegistry.from_string, 'rgb\t1\n')
        self.assertRaises(MalformedRecord, prompts.PromptRegistry.from_string, 'lidar\t1\tscan this\n')
        self.assertRaises(MalformedRecord, prompts.PromptRegistry.from_string, 'rgb\tone\tdescribe\n')
        # every modality but code must have at least one prompt
        self.assertRaises(MalformedRecord, prompts.PromptRegistry.from_string, 'rgb\t1\tdescribe\n')

    def test_comments_and_blank_lines(self):
        s = '# local prompts\n\n' + prompts.PROMPTS_STR_DEFAULT.replace('rgb\t1\t', 'rgb\t1\tLocal: ')
        registry = prompts.PromptRegistry.from_string(s)
        self.assertTrue(registry.prompts(mod.RGB)[0].startswith('Local: '))

class PromptFileTestCase(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix='polymodal-prompts-')

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_custom_file(self):
        path = os.path.join(self.tmpdir, 'prompts.tsv')
        with open(path, 'w') as fh:
            fh.write(prompts.PROMPTS_STR_DEFAULT.replace('pointcloud\t1\tClassify', 'pointcloud\t1\tLabel'))
        registry = prompts.get_prompt_registry(path)
        self.assertTrue(registry.prompts(mod.POINTCLOUD)[0].startswith('Label'))

    def test_missing_file(self):
        self.assertRaises(MissingFile, prompts.get_prompt_registry, os.path.join(self.tmpdir, 'absent.tsv'))

    def test_default_registry(self):
        self.assertEqual(prompts.get_prompt_registry().serialize(), prompts.PromptRegistry.from_string(prompts.PROMPTS_STR_DEFAULT).serialize())

if __name__ == '__main__':
    unittest.main()
