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

import copy
import logging
import math
import os
import time

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np
import pandas as pd

from . import format as fmt
from . import modality as mod
from . import ops
from . import synthetic
from .dataset import Dataset
from .errors import InvalidConfig, NonFiniteGradient, NonFiniteLoss, NonFiniteValue, StepOutOfRange
from .gradcheck import STENCIL_FIVE_POINT, grad_check
from .model import encoders as enc
from .model import heads
from .model.pipeline import PRESETS, DESK, Model, ModelConfig
from .prompts import EVAL, TRAIN, get_prompt_registry, select_prompt
from .tensor import backward, get_tape, set_precision
from .util import read_json, write_csv, write_json

_logger = logging.getLogger(__name__)

RUN_NAME = 'run.json'
LOSS_CURVE_NAME = 'loss.csv'
CHECKPOINT_DIR = 'checkpoint'
EPOCH_CHECKPOINT_DIR = 'checkpoints'

DESK_STEPS_PER_EPOCH = 10

# modality -> (max_lr, max_epochs, warmup_epochs); learning rates are read
# with negative exponents
SCHEDULE_REGIMES = OrderedDict((
        (mod.TEXT, (9e-6, 5, 1)),
        (mod.CODE, (1e-5, 4, 1)),
        (mod.RGB, (5e-5, 50, 5)),
        (mod.MSI, (2e-5, 50, 5)),
        (mod.HSI, (1e-4, 30, 3)),
        (mod.INFRARED, (5e-5, 50, 5)),
        (mod.SAR, (9e-6, 30, 3)),
        (mod.OBLIQUE, (5e-5, 30, 3)),
        (mod.TABLE, (2e-5, 30, 3)),
        (mod.TRAJECTORY, (1e-5, 30, 5)),
        (mod.GRAPH, (8e-5, 10, 2)),
        (mod.POINTCLOUD, (3e-5, 100, 10)),
        (mod.VIDEO, (1e-5, 3, 1)),
))

#################
# Learning-rate schedule
class ScheduleSpec(object):
    def __init__(self, max_lr, max_epochs, warmup_epochs, steps_per_epoch=DESK_STEPS_PER_EPOCH):
        if not max_lr > 0:
            raise InvalidConfig(field='schedule.max_lr', value=max_lr, reason='must be positive')
        if max_epochs < 1:
            raise InvalidConfig(field='schedule.max_epochs', value=max_epochs, reason='must be positive')
        if not (0 <= warmup_epochs < max_epochs):
            raise InvalidConfig(field='schedule.warmup_epochs', value=warmup_epochs,
                    reason='must be less than max_epochs (%d)' % max_epochs)
        if steps_per_epoch < 1:
            raise InvalidConfig(field='schedule.steps_per_epoch', value=steps_per_epoch, reason='must be positive')
        self.max_lr = float(max_lr)
        self.max_epochs = int(max_epochs)
        self.warmup_epochs = int(warmup_epochs)
        self.steps_per_epoch = int(steps_per_epoch)

    @classmethod
    def for_modality(cls, modality, steps_per_epoch=DESK_STEPS_PER_EPOCH):
        max_lr, max_epochs, warmup_epochs = SCHEDULE_REGIMES[mod.check_modality(modality)]
        return cls(max_lr, max_epochs, warmup_epochs, steps_per_epoch)

    @property
    def total_steps(self):
        return self.max_epochs * self.steps_per_epoch

    @property
    def warmup_steps(self):
        return self.warmup_epochs * self.steps_per_epoch

    def serialize(self):
        d = OrderedDict()
        d['max_lr'] = self.max_lr
        d['max_epochs'] = self.max_epochs
        d['warmup_epochs'] = self.warmup_epochs
        d['steps_per_epoch'] = self.steps_per_epoch
        return d

    @classmethod
    def deserialize(cls, d):
        d = dict(d)
        unknown = set(d) - set(['max_lr', 'max_epochs', 'warmup_epochs', 'steps_per_epoch'])
        if unknown:
            field = sorted(unknown)[0]
            raise InvalidConfig(field='schedule.%s' % field, value=d[field], reason='unknown field')
        for name in ('max_lr', 'max_epochs', 'warmup_epochs'):
            if name not in d:
                raise InvalidConfig(field='schedule.%s' % name, value=None, reason='required')
        return cls(**d)

def lr_at(spec, step):
    '''Linear warmup from 0 to max_lr, then cosine annealing to 0 at the
    final step.'''

    total = spec.total_steps
    if not (0 <= step < total):
        raise StepOutOfRange(step=step, total_steps=total)
    W = spec.warmup_steps
    if step < W:
        return spec.max_lr * step / float(W)
    span = total - 1 - W
    if span <= 0:
        return spec.max_lr
    progress = (step - W) / float(span)
    return spec.max_lr * (1.0 + math.cos(math.pi * progress)) / 2.0

#################
# Optimizer
class AdamState(object):
    '''First and second moments per parameter name, and the step count.'''

    def __init__(self):
        self.m = OrderedDict()
        self.v = OrderedDict()
        self.t = 0

    def __contains__(self, name):
        return name in self.m

    def names(self):
        return list(self.m)

def optimizer_step(params, grads, state, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01, groups=None):
    '''One AdamW update of params (name -> Tensor) from grads (name ->
    array).  Weight decay scales the parameter before the adaptive step.'''

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(group=groups[name] if groups is not None else name)

    b1, b2 = betas
    state.t += 1
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for name, p in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        m = state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        v = state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        data = p.data * (1.0 - lr * weight_decay)
        p.data = (data - lr * (m / c1) / (np.sqrt(v / c2) + eps)).astype(p.data.dtype)

def global_norm(grads):
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))

def clip_grad_norm(grads, max_norm):
    '''Scale grads in place so their global L2 norm is at most max_norm.
    Returns the norm before clipping.'''

    norm = global_norm(grads)
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm

#################
# Freezing
class FreezePolicy(object):
    '''Frozen flag of every parameter group.'''

    def __init__(self, flags):
        self.flags = OrderedDict(flags)

    @classmethod
    def default(cls, encoder_cfg, overrides=None):
        flags = OrderedDict()
        for m in mod.MODALITIES:
            flags['encoder.%s' % m] = m in encoder_cfg.frozen
        flags['bridge'] = False
        flags['backbone.base'] = True
        flags['backbone.adapter'] = False
        flags[heads.GROUP] = False
        for group, frozen in (overrides or {}).items():
            if group not in flags:
                raise InvalidConfig(field='freeze.%s' % group, value=frozen, reason='unknown parameter group')
            if not isinstance(frozen, bool):
                raise InvalidConfig(field='freeze.%s' % group, value=frozen, reason='must be true or false')
            flags[group] = frozen
        return cls(flags)

    def is_frozen(self, group):
        return self.flags[group]

    def frozen_groups(self):
        return [g for g, f in self.flags.items() if f]

    def apply(self, store):
        for group in store.group_names():
            if group not in self.flags:
                raise InvalidConfig(field='freeze.%s' % group, value=None, reason='group has no freeze flag')
            store.set_frozen(group, self.flags[group])

    def serialize(self):
        return OrderedDict(self.flags)

#################
# Run configuration
class RunConfig(object):
    FIELDS = (
            ('modality', None, (str, type(None))),
            ('task', None, (str, type(None))),
            ('preset', DESK, (str,)),
            ('seed', 0, (int,)),
            ('schedule', None, (dict, type(None))),
            ('batch_size', 4, (int,)),
            ('betas', [0.9, 0.999], (list,)),
            ('eps', 1e-8, (float,)),
            ('weight_decay', 0.01, (float, int)),
            ('clip_norm', 1.0, (float, int, type(None))),
            ('freeze', {}, (dict,)),
            ('data', None, (str, type(None))),
            ('output', None, (str, type(None))),
            ('checkpoint_every', 0, (int,)),
            ('prompts', None, (str, type(None))),
            ('precision', 32, (int,)),
            ('workers', 1, (int,)),
            ('model', {}, (dict,)),
            ('pooling', heads.LAST_TOKEN, (str,)),
    )

    def __init__(self, **kwargs):
        for name, default, types in self.FIELDS:
            value = kwargs.pop(name, copy.deepcopy(default))
            if float in types and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if isinstance(value, bool) or not isinstance(value, types):
                raise InvalidConfig(field=name, value=value, reason='has the wrong type')
            setattr(self, name, value)
        if kwargs:
            name = sorted(kwargs)[0]
            raise InvalidConfig(field=name, value=kwargs[name], reason='unknown field')
        self.validate()

    def validate(self):
        if self.modality is None:
            raise InvalidConfig(field='modality', value=None, reason='required')
        mod.check_modality(self.modality)
        if self.preset not in PRESETS:
            raise InvalidConfig(field='preset', value=self.preset, reason='must be desk or paper')
        if self.batch_size < 1:
            raise InvalidConfig(field='batch_size', value=self.batch_size, reason='must be positive')
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise InvalidConfig(field='betas', value=self.betas, reason='must be two values in [0, 1)')
        if self.eps <= 0 or self.weight_decay < 0:
            raise InvalidConfig(field='eps', value=self.eps, reason='eps must be positive and weight_decay not negative')
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise InvalidConfig(field='clip_norm', value=self.clip_norm, reason='must be positive or null')
        if self.precision not in (32, 64):
            raise InvalidConfig(field='precision', value=self.precision, reason='must be 32 or 64')
        if self.workers < 1:
            raise InvalidConfig(field='workers', value=self.workers, reason='must be positive')
        if self.checkpoint_every < 0:
            raise InvalidConfig(field='checkpoint_every', value=self.checkpoint_every, reason='must not be negative')
        if self.pooling not in heads.POOLINGS:
            raise InvalidConfig(field='pooling', value=self.pooling, reason='must be one of %s' % ', '.join(heads.POOLINGS))
        self.schedule_spec()
        self.model_config()

    def schedule_spec(self):
        if self.schedule is None:
            return ScheduleSpec.for_modality(self.modality)
        return ScheduleSpec.deserialize(self.schedule)

    def model_config(self):
        return ModelConfig.preset(self.preset, self.model)

    def serialize(self):
        return OrderedDict((name, getattr(self, name)) for name, default, types in self.FIELDS)

    @classmethod
    def deserialize(cls, d):
        return cls(**dict(d))

    @classmethod
    def from_file(cls, path, **overrides):
        '''A RunConfig from a JSON file; keyword arguments replace values
        from the file.'''

        d = read_json(path)
        if not isinstance(d, dict):
            raise InvalidConfig(field='config', value=path, reason='must hold a JSON object')
        d = dict(d)
        d.update(overrides)
        return cls(**d)

#################
# Training
class TrainResult(object):
    def __init__(self, model, curve, checkpoint=None):
        self.model = model
        self.curve = curve
        self.checkpoint = checkpoint

    @property
    def losses(self):
        return list(self.curve['loss'])

def build_model(run, head_spec):
    set_precision(run.precision)
    model = Model(run.model_config(), run.modality, head_spec, seed=run.seed)
    FreezePolicy.default(model.cfg.encoder, run.freeze).apply(model.store)
    return model

def _batches(rng, n, batch_size):
    '''Endless stream of batches drawn from a fresh permutation of the n
    sample indices each time the previous one runs out.'''

    order = []
    while True:
        batch = []
        while len(batch) < batch_size:
            if not order:
                order = list(rng.permutation(n))
            batch.append(int(order.pop(0)))
        yield batch

def save_checkpoint(path, run, model):
    model.store.save(path)
    d = OrderedDict()
    d['run'] = run.serialize()
    d['model'] = model.cfg.serialize()
    d['head'] = model.head_spec.serialize()
    write_json(os.path.join(path, RUN_NAME), d)

def load_checkpoint(path):
    '''The RunConfig and Model stored in a checkpoint directory.'''

    d = read_json(os.path.join(path, RUN_NAME))
    run = RunConfig.deserialize(d['run'])
    set_precision(run.precision)
    model = Model(ModelConfig.deserialize(d['model']), run.modality, heads.HeadSpec.deserialize(d['head']), seed=run.seed)
    FreezePolicy.default(model.cfg.encoder, run.freeze).apply(model.store)
    model.store.load(path)
    return run, model

def sample_loss(model, sample, target, prompt, step):
    try:
        loss = model.loss(sample, target, prompt)
    except NonFiniteValue:
        get_tape().clear()
        raise NonFiniteLoss(step=step, modality=model.modality)
    if not math.isfinite(loss.item()):
        get_tape().clear()
        raise NonFiniteLoss(step=step, modality=model.modality)
    return loss

def train(run, data, output=None):
    '''Fit the trainable groups of a fresh model to data.  Writes the loss
    curve and checkpoints below output (or run.output) when one is given.'''

    if output is None:
        output = run.output
    spec = run.schedule_spec()
    model = build_model(run, data.head_spec(pooling=run.pooling))
    store = model.store
    if run.modality == mod.TABLE:
        enc.fit_table_bins(store, model.cfg.encoder, data.table_rows())
    registry = get_prompt_registry(run.prompts)

    prompt_rng = np.random.RandomState(run.seed)
    batches = _batches(np.random.RandomState(run.seed + 1), len(data), run.batch_size)
    params = store.trainable()
    state = AdamState()
    samples, targets = data.samples, data.targets

    _logger.info('Training %s for %d step(s) (%d trainable tensor(s), batch size %d)...' %
            (run.modality, spec.total_steps, len(params), run.batch_size))
    start = time.time()
    rows = []
    for step in range(spec.total_steps):
        lr = lr_at(spec, step)
        batch = next(batches)
        store.zero_grad()
        total = 0.0
        for i in batch:
            prompt = select_prompt(registry, run.modality, TRAIN, prompt_rng)
            loss = sample_loss(model, samples[i], targets[i], prompt, step)
            total += loss.item() / len(batch)
            backward(ops.mul(loss, 1.0 / len(batch)))
        grads = OrderedDict((name, p.grad) for name, p in params.items())
        store.check_grads()
        clip_grad_norm(grads, run.clip_norm)
        optimizer_step(params, grads, state, lr, tuple(run.betas), run.eps, run.weight_decay, store.groups)
        rows.append((step, lr, total))

        if (step + 1) % spec.steps_per_epoch == 0:
            epoch = (step + 1) // spec.steps_per_epoch
            _logger.info('step %d/%d lr=%s loss=%s' % (step + 1, spec.total_steps, fmt.format_lr(lr), fmt.format_float(total)))
            if output is not None and run.checkpoint_every and epoch % run.checkpoint_every == 0 and epoch < spec.max_epochs:
                save_checkpoint(os.path.join(output, EPOCH_CHECKPOINT_DIR, 'epoch-%04d' % epoch), run, model)

    _logger.info('Trained %d step(s) in %s' % (spec.total_steps, fmt.humanize_time(time.time() - start)))
    curve = pd.DataFrame(rows, columns=['step', 'lr', 'loss'])
    checkpoint = None
    if output is not None:
        write_csv(os.path.join(output, LOSS_CURVE_NAME), curve)
        checkpoint = os.path.join(output, CHECKPOINT_DIR)
        save_checkpoint(checkpoint, run, model)
    return TrainResult(model, curve, checkpoint)

#################
# Gradient checks
GRADCHECK_TOLERANCES = { 32: 1e-4, 64: 1e-6 }
GRADCHECK_EPSILONS = { 32: 1e-2, 64: 1e-4 }

def check_pipeline_gradients(run, samples=100, epsilon=None, stencil=STENCIL_FIVE_POINT):
    '''Finite-difference check of one synthetic sample's loss through the
    whole pipeline of run.modality (encoder, bridge, adapters and head),
    over `samples` randomly chosen trainable scalars.'''

    if epsilon is None:
        epsilon = GRADCHECK_EPSILONS[run.precision]
    data = Dataset.generate(synthetic.SyntheticTaskSpec(run.modality, samples=2, seed=run.seed))
    model = build_model(run, data.head_spec(pooling=run.pooling))
    if run.modality == mod.TABLE:
        enc.fit_table_bins(model.store, model.cfg.encoder, data.table_rows())
    prompt = select_prompt(get_prompt_registry(run.prompts), run.modality, EVAL)
    sample, target = data.samples[0], data.targets[0]

    _logger.info('Checking %s pipeline gradients on %d scalar(s)...' % (run.modality, samples))
    return grad_check(lambda: model.loss(sample, target, prompt), model.store.trainable(), samples=samples,
            epsilon=epsilon, tolerance=GRADCHECK_TOLERANCES[run.precision], seed=run.seed, stencil=stencil)
