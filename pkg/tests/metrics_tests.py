import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from polymodal import metrics
from polymodal.errors import EmptyInput, ItemNotRanked, LabelOutOfRange, LengthMismatch, ZeroTargetVariance
from polymodal.util import read_csv, read_json

def _brute_classification(preds, labels, k):
    m = len(labels)
    correct = sum(1 for p, l in zip(preds, labels) if p == l)
    oa = correct / float(m)
    recalls = []
    for c in range(k):
        idx = [i for i in range(m) if labels[i] == c]
        if idx:
            recalls.append(sum(1 for i in idx if preds[i] == c) / float(len(idx)))
    p_e = 0.0
    for c in range(k):
        p_e += (labels.count(c) / float(m)) * (preds.count(c) / float(m))
    kappa = 0.0 if p_e >= 1.0 else (oa - p_e) / (1.0 - p_e)
    return oa, sum(recalls) / len(recalls), kappa

class MetricTestCase(unittest.TestCase):
    def test_hand_examples(self):
        self.assertEqual(metrics.metric_ade_fde([[0, 0], [3, 4]], [[0, 0], [0, 0]]), (2.5, 5.0))
        self.assertEqual(metrics.metric_pag([0.6, 0.61, -0.6, 1.0], 6), 50.0)
        self.assertEqual(metrics.metric_pag([0.6, 0.61, -0.6, 1.0], 10), 100.0)
        self.assertEqual(metrics.metric_classification([0, 1, 1, 2], [0, 1, 1, 2], 3), (1.0, 1.0, 1.0, 1.0))
        rmse, mae, r2 = metrics.metric_regression([1.0, 2.0, 3.0], [1.0, 2.0, 5.0])
        self.assertAlmostEqual(rmse, 2.0 / math.sqrt(3.0))
        self.assertAlmostEqual(mae, 2.0 / 3.0)
        self.assertAlmostEqual(r2, 1.0 - 4.0 / (78.0 / 9.0))
        self.assertEqual(metrics.metric_mrr([1, 1]), 1.0)

    def test_kappa_degenerate(self):
        # one class only: chance agreement is 1
        self.assertEqual(metrics.metric_classification([1, 1, 1], [1, 1, 1], 3), (1.0, 1.0, 1.0, 0.0))

    def test_absent_classes_excluded_from_aa(self):
        oa, top1, aa, kappa = metrics.metric_classification([0, 0, 1, 3], [0, 0, 1, 1], 4)
        self.assertEqual(aa, 0.75)

    def test_randomized_against_brute_force(self):
        rng = np.random.RandomState(0)
        for trial in range(1000):
            k = rng.randint(2, 6)
            m = rng.randint(1, 30)
            labels = [int(v) for v in rng.randint(k, size=m)]
            preds = [int(v) for v in rng.randint(k, size=m)]
            top1, oa, aa, kappa = metrics.metric_classification(preds, labels, k)
            e_oa, e_aa, e_kappa = _brute_classification(preds, labels, k)
            self.assertEqual(top1, oa)
            self.assertAlmostEqual(oa, e_oa, places=12)
            self.assertAlmostEqual(aa, e_aa, places=12)
            self.assertAlmostEqual(kappa, e_kappa, places=12)

            l = rng.randint(1, 10)
            pred = rng.normal(size=(l, 2))
            gt = rng.normal(size=(l, 2))
            dists = [math.hypot(pred[i, 0] - gt[i, 0], pred[i, 1] - gt[i, 1]) for i in range(l)]
            ade, fde = metrics.metric_ade_fde(pred, gt)
            self.assertAlmostEqual(ade, sum(dists) / l, places=12)
            self.assertAlmostEqual(fde, dists[-1], places=12)

            errors = rng.uniform(-2, 2, size=m)
            for a in metrics.PAG_THRESHOLDS:
                expected = 100.0 * sum(1 for e in errors if abs(e) <= a / 10.0) / m
                self.assertAlmostEqual(metrics.metric_pag(errors, a), expected, places=10)

            ranks = [int(r) for r in rng.randint(1, 10, size=m)]
            self.assertAlmostEqual(metrics.metric_mrr(ranks), sum(1.0 / r for r in ranks) / m, places=12)

    def test_regression_bounds(self):
        rng = np.random.RandomState(1)
        for trial in range(100):
            preds = rng.normal(size=12)
            targets = rng.normal(size=12)
            rmse, mae, r2 = metrics.metric_regression(preds, targets)
            self.assertTrue(mae <= rmse + 1e-12)
            self.assertTrue(r2 <= 1.0)
            self.assertEqual((rmse, mae), metrics.regression_errors(preds, targets))
        self.assertEqual(metrics.metric_regression(targets, targets)[2], 1.0)

    def test_ranking(self):
        ranked = metrics.rank_by_score(['a', 'b', 'c', 'd'], [0.1, 0.5, 0.5, -1.0])
        self.assertEqual(ranked, ['b', 'c', 'a', 'd'])
        self.assertEqual(metrics.rank_of('a', ranked), 3)
        self.assertRaises(ItemNotRanked, metrics.rank_of, 'e', ranked)
        self.assertRaises(ItemNotRanked, metrics.metric_mrr, [1, 0])

    def test_errors(self):
        self.assertRaises(LengthMismatch, metrics.metric_ade_fde, [[0, 0]], [[0, 0], [1, 1]])
        self.assertRaises(EmptyInput, metrics.metric_regression, [], [])
        self.assertRaises(EmptyInput, metrics.metric_pag, [], 6)
        self.assertRaises(EmptyInput, metrics.metric_mrr, [])
        self.assertRaises(LabelOutOfRange, metrics.metric_classification, [0, 3], [0, 1], 3)
        self.assertRaises(LabelOutOfRange, metrics.metric_classification, [0, 1], [-1, 1], 3)
        self.assertRaises(ZeroTargetVariance, metrics.metric_regression, [1.0, 2.0], [3.0, 3.0])

class MetricReportTestCase(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix='polymodal-metrics-')

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_write(self):
        report = metrics.MetricReport('classify', 'rgb', 8)
        report.set('accuracy', 0.875)
        report.set('kappa', 0.8)
        json_path = os.path.join(self.tmpdir, 'metrics.json')
        csv_path = os.path.join(self.tmpdir, 'metrics.csv')
        report.write(json_path, csv_path)

        d = read_json(json_path)
        self.assertEqual(list(d), ['modality', 'task', 'samples', 'metrics'])
        self.assertEqual(metrics.MetricReport.deserialize(d).serialize(), report.serialize())

        frame = read_csv(csv_path)
        self.assertEqual(list(frame.columns), ['modality', 'task', 'samples', 'accuracy', 'kappa'])
        self.assertEqual(frame['accuracy'][0], 0.875)
        self.assertEqual(frame['kappa'][0], 0.8)

if __name__ == '__main__':
    unittest.main()
