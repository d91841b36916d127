#
# This file is a part of polymodal, a desk-scale tool suite for aligning
# heterogeneous spatio-temporal modalities to a language token space.
#
# polymodal is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# polymodal is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along
# with polymodal.  If not, see <http://www.gnu.org/licenses/>.
#

from __future__ import unicode_literals

import logging

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np
import pandas as pd

from .errors import EmptyInput, ItemNotRanked, LabelOutOfRange, LengthMismatch, ZeroTargetVariance
from .util import csv_text, dumps_json, atomic_write

_logger = logging.getLogger(__name__)

PAG_THRESHOLDS = (6, 10)

def _as_array(x):
    if hasattr(x, 'data') and not isinstance(x, np.ndarray):
        x = x.data
    return np.asarray(x, dtype=np.float64)

def _check_lengths(metric, a, b):
    if len(a) != len(b):
        raise LengthMismatch(metric=metric, length_a=len(a), length_b=len(b))
    if len(a) < 1:
        raise EmptyInput(metric=metric)

#################
# Trajectories
def metric_ade_fde(pred, gt):
    '''Average and final displacement error of a predicted trajectory.

    >>> metric_ade_fde([[0, 1], [1, 1]], [[0, 0], [1, 0]])
    (1.0, 1.0)
    '''

    pred = _as_array(pred).reshape(-1, 2)
    gt = _as_array(gt).reshape(-1, 2)
    _check_lengths('ade_fde', pred, gt)
    dist = np.sqrt(np.sum((pred - gt) ** 2, axis=1))
    return float(np.mean(dist)), float(dist[-1])

#################
# Depth grids
def metric_pag(errors, a):
    '''Percentage of grid cells whose absolute depth error is within a/10
    metres.

    >>> metric_pag([0.0, 0.5, 0.7, 1.2], 6)
    50.0
    '''

    errors = np.abs(_as_array(errors).reshape(-1))
    if errors.size < 1:
        raise EmptyInput(metric='pag_%d' % a)
    threshold = a / 10.0
    return 100.0 * np.count_nonzero(errors <= threshold) / float(errors.size)

#################
# Classification
def confusion_matrix(preds, labels, num_classes):
    '''Counts indexed [label, prediction].'''

    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    _check_lengths('classification', preds, labels)
    for v in np.concatenate([preds, labels]):
        if v < 0 or v >= num_classes:
            raise LabelOutOfRange(label=int(v), num_classes=num_classes)
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm

def metric_classification(preds, labels, num_classes):
    '''Top-1 accuracy, overall accuracy, average per-class recall (classes
    absent from labels excluded) and Cohen's kappa.  Kappa is 0 when the
    chance agreement is 1.

    >>> metric_classification([0, 0, 0, 0], [0, 1, 0, 1], 2)
    (0.5, 0.5, 0.5, 0.0)
    '''

    cm = confusion_matrix(preds, labels, num_classes).astype(np.float64)
    m = cm.sum()
    oa = np.trace(cm) / m
    support = cm.sum(axis=1)
    present = support > 0
    aa = float(np.mean(np.diag(cm)[present] / support[present]))
    p_e = float(np.sum(support * cm.sum(axis=0)) / (m * m))
    if p_e >= 1.0:
        kappa = 0.0
    else:
        kappa = float((oa - p_e) / (1.0 - p_e))
    oa = float(oa)
    return oa, oa, aa, kappa

#################
# Regression
def metric_regression(preds, targets):
    '''Root mean squared error, mean absolute error and coefficient of
    determination.'''

    preds = _as_array(preds).reshape(-1)
    targets = _as_array(targets).reshape(-1)
    _check_lengths('regression', preds, targets)
    diff = preds - targets
    rmse = float(np.sqrt(np.mean(diff * diff)))
    mae = float(np.mean(np.abs(diff)))
    ss_tot = float(np.sum((targets - np.mean(targets)) ** 2))
    if ss_tot == 0.0:
        raise ZeroTargetVariance()
    r2 = 1.0 - float(np.sum(diff * diff)) / ss_tot
    return rmse, mae, r2

def regression_errors(preds, targets):
    '''rmse and mae only, for targets that may have zero variance.'''

    preds = _as_array(preds).reshape(-1)
    targets = _as_array(targets).reshape(-1)
    _check_lengths('regression', preds, targets)
    diff = preds - targets
    return float(np.sqrt(np.mean(diff * diff))), float(np.mean(np.abs(diff)))

#################
# Retrieval
def rank_of(item, ranked):
    '''1-based rank of item in a ranked list of candidates.'''

    for i, candidate in enumerate(ranked):
        if candidate == item:
            return i + 1
    raise ItemNotRanked(item=item)

def rank_by_score(candidates, scores):
    '''Candidates ordered by descending score; equal scores keep their input
    order.'''

    order = sorted(range(len(candidates)), key=lambda i: -scores[i])
    return [candidates[i] for i in order]

def metric_mrr(ranks):
    '''Mean reciprocal rank from 1-based ranks of the correct item.

    >>> round(metric_mrr([1, 2, 4]), 6)
    0.583333
    '''

    ranks = list(ranks)
    if not ranks:
        raise EmptyInput(metric='mrr')
    for r in ranks:
        if r < 1:
            raise ItemNotRanked(item=r)
    return float(np.mean([1.0 / r for r in ranks]))

#################
# Reports
class MetricReport(object):
    '''Named metric values of one evaluation run and the number of samples
    they were computed from.'''

    def __init__(self, task, modality, samples, values=None):
        self.task = task
        self.modality = modality
        self.samples = samples
        self.values = OrderedDict(values or ())

    def __getitem__(self, name):
        return self.values[name]

    def __contains__(self, name):
        return name in self.values

    def set(self, name, value):
        self.values[name] = float(value)

    def serialize(self):
        d = OrderedDict()
        d['modality'] = self.modality
        d['task'] = self.task
        d['samples'] = self.samples
        d['metrics'] = OrderedDict(self.values)
        return d

    @classmethod
    def deserialize(cls, d):
        return cls(d['task'], d['modality'], d['samples'], d['metrics'])

    def to_frame(self):
        row = OrderedDict()
        row['modality'] = [self.modality]
        row['task'] = [self.task]
        row['samples'] = [self.samples]
        for name, value in self.values.items():
            row[name] = [value]
        return pd.DataFrame(row)

    def write(self, json_path, csv_path):
        atomic_write(json_path, dumps_json(self.serialize()))
        atomic_write(csv_path, csv_text(self.to_frame()))
        _logger.info('Wrote metric report for %d sample(s) to %s' % (self.samples, json_path))
