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

import numpy as np

from . import metrics
from . import synthetic
from .errors import ZeroTargetVariance
from .metrics import MetricReport
from .prompts import EVAL, get_prompt_registry, select_prompt
from .tensor import no_grad

_logger = logging.getLogger(__name__)

def _predictions(model, data, prompt):
    with no_grad():
        return [model.predict(sample, prompt) for sample in data.samples]

def _regression_metrics(report, preds, targets, with_r2=True):
    preds = np.concatenate([np.reshape(p, -1) for p in preds])
    targets = np.concatenate([np.reshape(t, -1) for t in targets])
    rmse, mae = metrics.regression_errors(preds, targets)
    report.set('rmse', rmse)
    report.set('mae', mae)
    if with_r2:
        try:
            report.set('r2', metrics.metric_regression(preds, targets)[2])
        except ZeroTargetVariance:
            _logger.warning('Targets have zero variance; r2 omitted')

def evaluate(model, data, registry=None):
    '''Metrics of model on data with the first prompt of the modality.'''

    if registry is None:
        registry = get_prompt_registry()
    prompt = select_prompt(registry, data.modality, EVAL)
    task = data.task
    report = MetricReport(task, data.modality, len(data))
    _logger.info('Evaluating %d %s sample(s)...' % (len(data), data.modality))

    if task == synthetic.TEXT_GENERATE:
        candidates = data.candidates()
        exact = 0
        ranks = []
        for sample, target in data:
            with no_grad():
                if model.predict(sample, prompt) == target:
                    exact += 1
                scores = [model.text_log_likelihood(sample, c, prompt) for c in candidates]
            ranks.append(metrics.rank_of(target, metrics.rank_by_score(candidates, scores)))
        report.set('accuracy', exact / float(len(data)))
        report.set('mrr', metrics.metric_mrr(ranks))
        return report

    preds = _predictions(model, data, prompt)
    if task == synthetic.CLASSIFY:
        top1, oa, aa, kappa = metrics.metric_classification(preds, data.targets, data.spec.num_classes)
        report.set('accuracy', top1)
        report.set('oa', oa)
        report.set('aa', aa)
        report.set('kappa', kappa)
    elif task == synthetic.TRAJECTORY:
        pairs = [metrics.metric_ade_fde(p, t) for p, t in zip(preds, data.targets)]
        report.set('ade', np.mean([a for a, f in pairs]))
        report.set('fde', np.mean([f for a, f in pairs]))
        _regression_metrics(report, preds, data.targets, with_r2=False)
    elif task == synthetic.DEPTH:
        errors = np.concatenate([np.reshape(p, -1) - np.reshape(t, -1) for p, t in zip(preds, data.targets)])
        for a in metrics.PAG_THRESHOLDS:
            report.set('pag_%d' % a, metrics.metric_pag(errors, a))
        _regression_metrics(report, preds, data.targets, with_r2=False)
    else:
        _regression_metrics(report, preds, data.targets)
    return report
