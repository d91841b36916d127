import os
import shutil
import tempfile
import unittest

import numpy as np

from polymodal import dataset
from polymodal import modality as mod
from polymodal import synthetic
from polymodal.errors import HashMismatch, InvalidConfig, MalformedRecord, MissingFile
from polymodal.util import read_json, write_json

def _tree(path):
    files = {}
    for root, dirs, names in os.walk(path):
        for name in names:
            full = os.path.join(root, name)
            with open(full, 'rb') as fh:
                files[os.path.relpath(full, path)] = fh.read()
    return files

def _payload_array(sample):
    if sample.tag in mod.TEXTUAL:
        return sample.payload
    if sample.tag == mod.GRAPH:
        return sample.payload.features
    return sample.payload

class SyntheticTestCase(unittest.TestCase):
    def test_deterministic(self):
        for m in mod.MODALITIES:
            spec = synthetic.SyntheticTaskSpec(m, samples=6, seed=3)
            a, ta = synthetic.generate_samples(spec)
            b, tb = synthetic.generate_samples(spec)
            for x, y in zip(a, b):
                self.assertTrue(np.array_equal(_payload_array(x), _payload_array(y)) if m not in mod.TEXTUAL else x.payload == y.payload)
            for x, y in zip(ta, tb):
                self.assertTrue(np.array_equal(x, y) if not isinstance(x, str) else x == y)

    def test_planted_rules_match_labels(self):
        for m in mod.MODALITIES:
            spec = synthetic.SyntheticTaskSpec(m, samples=12, seed=1)
            samples, targets = synthetic.generate_samples(spec)
            for sample, target in zip(samples, targets):
                planted = synthetic.planted_target(spec, sample)
                if spec.task in (synthetic.CLASSIFY, synthetic.TEXT_GENERATE):
                    self.assertEqual(planted, target, m)
                else:
                    # uniform target noise is bounded by the noise level
                    self.assertTrue(np.all(np.abs(np.asarray(planted) - np.asarray(target)) <= spec.noise * 3), m)

    def test_noise_free_regression_is_exact(self):
        for m in (mod.TABLE, mod.TRAJECTORY, mod.GRAPH, mod.OBLIQUE):
            spec = synthetic.SyntheticTaskSpec(m, samples=5, noise=0.0)
            samples, targets = synthetic.generate_samples(spec)
            for sample, target in zip(samples, targets):
                self.assertTrue(np.allclose(synthetic.planted_target(spec, sample), target, rtol=0.0, atol=1e-12), m)

    def test_balanced_labels(self):
        spec = synthetic.SyntheticTaskSpec(mod.RGB, samples=8)
        samples, targets = synthetic.generate_samples(spec)
        self.assertEqual(sorted(targets), [0, 0, 1, 1, 2, 2, 3, 3])

    def test_sphere_radius(self):
        spec = synthetic.SyntheticTaskSpec(mod.POINTCLOUD, samples=6, noise=0.0)
        samples, targets = synthetic.generate_samples(spec)
        for sample, target in zip(samples, targets):
            if target == synthetic.SPHERE:
                radii = np.sqrt(np.sum(sample.payload ** 2, axis=1))
                self.assertTrue(np.allclose(radii, 1.0, rtol=0.0, atol=1e-12))
            elif target == synthetic.PLANE:
                self.assertTrue(np.all(sample.payload[:, 2] == 0.0))

    def test_shapes(self):
        self.assertEqual(synthetic.generate_samples(synthetic.SyntheticTaskSpec(mod.RGB, samples=1))[0][0].payload.shape, (32, 32, 3))
        spec = synthetic.SyntheticTaskSpec(mod.MSI, samples=1, shape={ 'channels': 6 })
        self.assertEqual(synthetic.generate_samples(spec)[0][0].payload.shape, (16, 16, 6))
        spec = synthetic.SyntheticTaskSpec(mod.TRAJECTORY, samples=1)
        past, future = [x[0] for x in synthetic.generate_samples(spec)]
        self.assertEqual((past.payload.shape, future.shape), ((8, 2), (8,)))

    def test_invalid_specs(self):
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.RGB, task=synthetic.REGRESS)
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.RGB, num_classes=5)
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.RGB, samples=0)
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.RGB, noise=-0.1)
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.RGB, shape={ 'depth': 3 })
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.MSI, shape={ 'channels': 3 })
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.OBLIQUE, shape={ 'views': 1 })
        self.assertRaises(InvalidConfig, synthetic.SyntheticTaskSpec, mod.OBLIQUE, shape={ 'grid': [3, 4] })

class DatasetDirectoryTestCase(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix='polymodal-data-')

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def _path(self, *parts):
        return os.path.join(self.tmpdir, *parts)

    def test_byte_identical_regeneration(self):
        for m in mod.MODALITIES:
            spec = synthetic.SyntheticTaskSpec(m, samples=3, seed=5)
            dataset.write_dataset(self._path(m, 'a'), dataset.Dataset.generate(spec))
            dataset.write_dataset(self._path(m, 'b'), dataset.Dataset.generate(spec))
            self.assertEqual(_tree(self._path(m, 'a')), _tree(self._path(m, 'b')), m)

    def test_round_trip(self):
        for m in mod.MODALITIES:
            data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(m, samples=4, seed=2))
            dataset.write_dataset(self._path(m), data)
            for workers in (1, 3):
                read = dataset.read_dataset(self._path(m), workers=workers)
                self.assertEqual(read.spec.serialize(), data.spec.serialize())
                self.assertEqual(len(read), len(data))
                for a, b in zip(read.samples, data.samples):
                    self.assertEqual(a.tag, b.tag)
                    if m in mod.TEXTUAL:
                        self.assertEqual(a.payload, b.payload)
                    else:
                        self.assertTrue(np.array_equal(_payload_array(a), _payload_array(b)), m)
                    if m == mod.GRAPH:
                        self.assertEqual(a.payload.timestep, b.payload.timestep)
                for a, b in zip(read.targets, data.targets):
                    if isinstance(b, np.ndarray):
                        self.assertTrue(np.array_equal(a, b), m)
                    else:
                        self.assertEqual(a, b)

    def test_manifest(self):
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.GRAPH, samples=2))
        dataset.write_dataset(self.tmpdir, data)
        manifest = read_json(self._path(dataset.MANIFEST_NAME))
        self.assertEqual(list(manifest), ['format', 'spec', 'labels', 'samples'])
        self.assertEqual(manifest['samples'][0]['file'], 'samples/0000.stt')
        self.assertEqual(manifest['samples'][0]['dims'], [8, 2])
        self.assertIn('timestep', manifest['samples'][0])
        with open(self._path(dataset.LABELS_NAME)) as fh:
            self.assertEqual(fh.readline().strip(), 'sample,' + ','.join('y%d' % j for j in range(8)))

    def test_corrupted_sample(self):
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.SAR, samples=2))
        dataset.write_dataset(self.tmpdir, data)
        path = self._path('samples', '0001.stt')
        with open(path, 'rb') as fh:
            raw = bytearray(fh.read())
        raw[-1] ^= 0xff
        with open(path, 'wb') as fh:
            fh.write(bytes(raw))
        self.assertRaises(HashMismatch, dataset.read_dataset, self.tmpdir)

    def test_corrupted_labels(self):
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.TEXT, samples=2))
        dataset.write_dataset(self.tmpdir, data)
        with open(self._path(dataset.LABELS_NAME), 'a') as fh:
            fh.write('0002,1\n')
        self.assertRaises(HashMismatch, dataset.read_dataset, self.tmpdir)

    def test_missing(self):
        self.assertRaises(MissingFile, dataset.read_dataset, self._path('absent'))
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.HSI, samples=2))
        dataset.write_dataset(self.tmpdir, data)
        os.remove(self._path('samples', '0000.stt'))
        self.assertRaises(MissingFile, dataset.read_dataset, self.tmpdir)

    def test_malformed_manifest(self):
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.HSI, samples=2))
        dataset.write_dataset(self.tmpdir, data)
        manifest = read_json(self._path(dataset.MANIFEST_NAME))
        manifest['samples'] = manifest['samples'][:1]
        write_json(self._path(dataset.MANIFEST_NAME), manifest)
        self.assertRaises(MalformedRecord, dataset.read_dataset, self.tmpdir)

class HeadSpecTestCase(unittest.TestCase):
    def test_heads(self):
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.OBLIQUE, samples=4))
        spec = data.head_spec()
        self.assertEqual((spec.kind, spec.grid, spec.output_dim), ('depth', [4, 4], 16))
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.CODE, samples=4))
        self.assertEqual(data.head_spec().max_len, max(len(t) for t in data.targets))
        data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(mod.VIDEO, samples=4))
        self.assertEqual(data.head_spec().num_classes, 2)

if __name__ == '__main__':
    unittest.main()
