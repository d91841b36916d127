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
import os

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np

from polymodal import stt
from polymodal.errors import DimensionMismatch, HashMismatch, MalformedRecord, NonFiniteGradient
from polymodal.tensor import Tensor, default_dtype
from polymodal.util import read_json, sha256_file, write_json

_logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'

class ParameterStore(object):
    '''All tensors of a model, keyed by dotted name.  Each tensor belongs to
    a group (e.g. "encoder.rgb", "bridge", "backbone.base"); a group is
    either frozen or trainable as a whole.'''

    def __init__(self, seed=0):
        self.tensors = OrderedDict()
        self.groups = OrderedDict()
        self.frozen_groups = set()
        self.constants = set()
        self.rng = np.random.RandomState(seed)

    def __contains__(self, name):
        return name in self.tensors

    def __getitem__(self, name):
        return self.tensors[name]

    def __len__(self):
        return len(self.tensors)

    def get(self, name, default=None):
        return self.tensors.get(name, default)

    def names(self):
        return list(self.tensors)

    def add(self, name, data, group, frozen=False):
        if name in self.tensors:
            raise ValueError('Parameter already exists: %s' % name)
        if frozen:
            self.frozen_groups.add(group)
        trainable = group not in self.frozen_groups
        t = Tensor(data, requires_grad=trainable, name=name, dtype=default_dtype())
        self.tensors[name] = t
        self.groups[name] = group
        return t

    def constant(self, name, data, group):
        '''A tensor that is stored and checkpointed but never trained.'''

        if name in self.tensors:
            raise ValueError('Parameter already exists: %s' % name)
        t = Tensor(data, requires_grad=False, name=name, dtype=default_dtype())
        self.tensors[name] = t
        self.constants.add(name)
        self.groups[name] = group
        return t

    #################
    # Initialisation
    def normal(self, name, dims, group, std=None, frozen=False):
        '''Gaussian init; std defaults to 1/sqrt(fan_in) for matrices.'''

        if std is None:
            std = 1.0 / np.sqrt(dims[0])
        return self.add(name, self.rng.normal(0.0, std, size=dims), group, frozen)

    def zeros(self, name, dims, group, frozen=False):
        return self.add(name, np.zeros(dims), group, frozen)

    def ones(self, name, dims, group, frozen=False):
        return self.add(name, np.ones(dims), group, frozen)

    #################
    # Groups and freezing
    def group_names(self):
        seen = OrderedDict()
        for g in self.groups.values():
            seen[g] = None
        return list(seen)

    def in_group(self, group):
        '''Tensors of the named group, or of every group below it.'''

        return OrderedDict((n, t) for n, t in self.tensors.items()
                if self.groups[n] == group or self.groups[n].startswith(group + '.'))

    def is_frozen(self, name):
        return self.groups[name] in self.frozen_groups

    def set_frozen(self, group, frozen):
        for name, t in self.in_group(group).items():
            if frozen:
                self.frozen_groups.add(self.groups[name])
            else:
                self.frozen_groups.discard(self.groups[name])
            if name in self.constants:
                continue
            t.requires_grad = not frozen
            if frozen:
                t.grad = None
            elif t.grad is None:
                t.grad = np.zeros_like(t.data)

    def trainable(self):
        return OrderedDict((n, t) for n, t in self.tensors.items() if t.requires_grad)

    def frozen(self):
        return OrderedDict((n, t) for n, t in self.tensors.items() if not t.requires_grad)

    def zero_grad(self):
        for t in self.tensors.values():
            t.zero_grad()

    def check_grads(self):
        for name, t in self.trainable().items():
            if not np.all(np.isfinite(t.grad)):
                raise NonFiniteGradient(group=self.groups[name])

    def astype(self, dtype):
        for t in self.tensors.values():
            t.data = t.data.astype(dtype)
            if t.grad is not None:
                t.grad = np.zeros_like(t.data)

    def num_scalars(self, trainable_only=False):
        if trainable_only:
            return sum(t.data.size for t in self.trainable().values())
        return sum(t.data.size for t in self.tensors.values())

    #################
    # Checkpoints
    def save(self, path):
        '''Write every tensor as an STT1 file plus a JSON manifest mapping
        name to file, dims, group, frozen flag and content hash.'''

        if not os.path.isdir(path):
            os.makedirs(path)
        manifest = OrderedDict()
        for i, (name, t) in enumerate(self.tensors.items()):
            filename = '%04d.stt' % i
            filepath = os.path.join(path, filename)
            stt.write(filepath, t.data)
            entry = OrderedDict()
            entry['file'] = filename
            entry['dims'] = t.dims
            entry['group'] = self.groups[name]
            entry['frozen'] = not t.requires_grad
            entry['sha256'] = sha256_file(filepath)
            manifest[name] = entry
        write_json(os.path.join(path, MANIFEST_NAME), manifest)
        _logger.info('Saved %d tensor(s) to %s' % (len(manifest), path))

    def load(self, path):
        '''Replace tensor values with those of a checkpoint written by save().
        The checkpoint must contain every tensor of this store with
        identical dims.'''

        manifest_path = os.path.join(path, MANIFEST_NAME)
        manifest = read_json(manifest_path)
        for name, t in self.tensors.items():
            if name not in manifest:
                raise MalformedRecord(path=manifest_path, line=0, reason='no entry for %s' % name)
            entry = manifest[name]
            filepath = os.path.join(path, entry['file'])
            actual = sha256_file(filepath)
            if actual != entry['sha256']:
                raise HashMismatch(path=filepath, expected=entry['sha256'], actual=actual)
            data = stt.read(filepath)
            if list(data.shape) != t.dims:
                raise DimensionMismatch(op='load %s' % name, dims_a=t.dims, dims_b=list(data.shape))
            t.data = data.astype(t.data.dtype)
            if t.grad is not None:
                t.grad = np.zeros_like(t.data)
        _logger.info('Loaded %d tensor(s) from %s' % (len(self.tensors), path))
