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

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np

from polymodal import ops
from polymodal.errors import HeadShapeMismatch, InvalidConfig
from polymodal.tensor import Tensor, default_dtype
from polymodal.tokenizer import VOCAB_SIZE

CLASSIFY = 'classify'
REGRESS = 'regress'
TEXT_DECODE = 'text'
DEPTH = 'depth'
HEAD_KINDS = (CLASSIFY, REGRESS, TEXT_DECODE, DEPTH)

LAST_TOKEN = 'last'
MEAN_OVER_MODAL = 'mean-modal'
POOLINGS = (LAST_TOKEN, MEAN_OVER_MODAL)

GROUP = 'head'

class HeadSpec(object):
    '''Kind and shape of a task head.  Regress and Depth heads de-normalise
    their output with the fixed target_mean and target_std.'''

    def __init__(self, kind, num_classes=None, outputs=1, grid=None, target_mean=0.0, target_std=1.0,
            pooling=LAST_TOKEN, max_len=32):
        if kind not in HEAD_KINDS:
            raise InvalidConfig(field='head.kind', value=kind, reason='must be one of %s' % ', '.join(HEAD_KINDS))
        if pooling not in POOLINGS:
            raise InvalidConfig(field='head.pooling', value=pooling, reason='must be one of %s' % ', '.join(POOLINGS))
        if kind == CLASSIFY and (num_classes is None or num_classes < 2):
            raise InvalidConfig(field='head.num_classes', value=num_classes, reason='must be at least 2')
        if kind == DEPTH:
            if grid is None or len(grid) != 2 or min(grid) < 1:
                raise InvalidConfig(field='head.grid', value=grid, reason='must be [H_out, W_out]')
            grid = [int(grid[0]), int(grid[1])]
            outputs = grid[0] * grid[1]
        self.kind = kind
        self.num_classes = num_classes
        self.outputs = outputs
        self.grid = grid
        self.pooling = pooling
        self.max_len = max_len

        self.target_mean = np.broadcast_to(np.asarray(target_mean, dtype=np.float64), (self.output_dim,)).copy()
        self.target_std = np.broadcast_to(np.asarray(target_std, dtype=np.float64), (self.output_dim,)).copy()
        if kind in (REGRESS, DEPTH) and not np.all(self.target_std > 0):
            raise InvalidConfig(field='head.target_std', value=self.target_std.tolist(), reason='must be positive')

    @property
    def output_dim(self):
        if self.kind == CLASSIFY:
            return self.num_classes
        if self.kind == TEXT_DECODE:
            return VOCAB_SIZE
        return self.outputs

    def serialize(self):
        d = OrderedDict()
        d['kind'] = self.kind
        d['num_classes'] = self.num_classes
        d['outputs'] = self.outputs
        d['grid'] = self.grid
        d['target_mean'] = self.target_mean.tolist()
        d['target_std'] = self.target_std.tolist()
        d['pooling'] = self.pooling
        d['max_len'] = self.max_len
        return d

    @classmethod
    def deserialize(cls, d):
        return cls(**d)

def init_head(store, spec, width):
    store.normal('head.weight', (width, spec.output_dim), GROUP)
    store.zeros('head.bias', (spec.output_dim,), GROUP)

def pool(spec, hidden, boundary):
    n = hidden.shape[0]
    if not (1 <= boundary <= n):
        raise HeadShapeMismatch(kind=spec.kind, expected='boundary in [1, %d]' % n, actual=boundary)
    if spec.pooling == LAST_TOKEN:
        return ops.slice_rows(hidden, n - 1, n)
    return ops.mean_pool(ops.slice_rows(hidden, 0, boundary), axis=0, keepdims=True)

def head_logits(spec, hidden, W_h, b_h, boundary):
    '''The raw 1 x output_dim output of the single linear layer.'''

    expected = [hidden.shape[1], spec.output_dim]
    if W_h.dims != expected or b_h.dims != [spec.output_dim]:
        raise HeadShapeMismatch(kind=spec.kind, expected=expected, actual=W_h.dims)
    return ops.linear(pool(spec, hidden, boundary), W_h, b_h)

def unscale(spec, z):
    '''Parameter-free inverse of the target normalisation.'''

    dtype = default_dtype()
    std = Tensor(spec.target_std[None, :], dtype=dtype)
    mean = Tensor(spec.target_mean[None, :], dtype=dtype)
    return ops.add(ops.mul(z, std), mean)

def normalize_target(spec, y):
    return (np.asarray(y, dtype=np.float64).reshape(1, -1) - spec.target_mean) / spec.target_std

def head_forward(spec, hidden, W_h, b_h, boundary=None):
    '''Pool the hidden states and apply the task head: logits for Classify
    and TextDecode, de-normalised values for Regress and Depth.'''

    if boundary is None:
        boundary = hidden.shape[0]
    z = head_logits(spec, hidden, W_h, b_h, boundary)
    if spec.kind in (REGRESS, DEPTH):
        return unscale(spec, z)
    return z

def predict(spec, output):
    '''Turn a head_forward output into a plain prediction.'''

    values = np.asarray(output.data, dtype=np.float64).reshape(-1)
    if spec.kind in (CLASSIFY, TEXT_DECODE):
        # lowest index wins ties
        return int(np.argmax(values))
    if spec.kind == DEPTH:
        return values.reshape(spec.grid)
    return values
