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

#
# Building blocks shared by encoders, bridge and backbone.  Parameters live
# in a ParameterStore under a dotted prefix; the init_* functions create
# them and the matching functions without the prefix apply them.
#

from __future__ import unicode_literals

import math

import numpy as np

from polymodal import ops
from polymodal.tensor import Tensor, default_dtype

#################
# Linear and normalisation
def init_linear(store, name, n_in, n_out, group, bias=True, frozen=False):
    store.normal(name + '.weight', (n_in, n_out), group, frozen=frozen)
    if bias:
        store.zeros(name + '.bias', (n_out,), group, frozen=frozen)

def linear(store, name, x):
    return ops.linear(x, store[name + '.weight'], store.get(name + '.bias'))

def init_layer_norm(store, name, width, group, frozen=False):
    store.ones(name + '.gamma', (width,), group, frozen=frozen)
    store.zeros(name + '.beta', (width,), group, frozen=frozen)

def layer_norm(store, name, x):
    return ops.layer_norm(x, store[name + '.gamma'], store[name + '.beta'])

#################
# Feed-forward
def init_ffn(store, name, n_in, hidden, n_out, group, frozen=False):
    init_linear(store, name + '.fc1', n_in, hidden, group, frozen=frozen)
    init_linear(store, name + '.fc2', hidden, n_out, group, frozen=frozen)

def ffn(store, name, x):
    '''Two linear layers with a gelu in between.'''

    return linear(store, name + '.fc2', ops.gelu(linear(store, name + '.fc1', x)))

#################
# Self-attention
def init_self_attention(store, name, width, group, frozen=False):
    for proj in ('q', 'k', 'v', 'o'):
        init_linear(store, '%s.%s' % (name, proj), width, width, group, bias=False, frozen=frozen)

def self_attention(store, name, x, heads, mask=None):
    '''Multi-head scaled dot-product self-attention over the rows of x.
    mask, when given, is an n x n boolean array; False entries are not
    attended to.'''

    n, width = x.shape
    if width % heads:
        raise ValueError('Width %d is not divisible into %d heads' % (width, heads))
    dh = width // heads
    scale = 1.0 / math.sqrt(dh)
    q = linear(store, name + '.q', x)
    k = linear(store, name + '.k', x)
    v = linear(store, name + '.v', x)
    outputs = []
    for h in range(heads):
        qh = ops.slice_cols(q, h * dh, (h + 1) * dh)
        kh = ops.slice_cols(k, h * dh, (h + 1) * dh)
        vh = ops.slice_cols(v, h * dh, (h + 1) * dh)
        scores = ops.mul(ops.matmul(qh, ops.transpose(kh)), scale)
        outputs.append(ops.matmul(ops.softmax_rows(scores, mask), vh))
    if heads == 1:
        out = outputs[0]
    else:
        out = ops.concat(outputs, axis=1)
    return linear(store, name + '.o', out)

#################
# Pre-norm transformer blocks
def init_block(store, name, width, expansion, group, frozen=False):
    init_layer_norm(store, name + '.ln1', width, group, frozen=frozen)
    init_self_attention(store, name + '.attn', width, group, frozen=frozen)
    init_layer_norm(store, name + '.ln2', width, group, frozen=frozen)
    init_ffn(store, name + '.ffn', width, expansion * width, width, group, frozen=frozen)

def block(store, name, x, heads, mask=None):
    x = ops.add(x, self_attention(store, name + '.attn', layer_norm(store, name + '.ln1', x), heads, mask))
    return ops.add(x, ffn(store, name + '.ffn', layer_norm(store, name + '.ln2', x)))

def init_stack(store, name, width, depth, expansion, group, frozen=False):
    for i in range(depth):
        init_block(store, '%s.%d' % (name, i), width, expansion, group, frozen=frozen)

def stack(store, name, x, depth, heads, mask=None):
    for i in range(depth):
        x = block(store, '%s.%d' % (name, i), x, heads, mask)
    return x

#################
# Positions
def sinusoid_positions(n, width, offset=0):
    '''Fixed sinusoidal position table of n rows starting at position
    offset.'''

    pos = np.arange(offset, offset + n, dtype=np.float64)[:, None]
    i = np.arange(width, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / width)
    table = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return Tensor(table, dtype=default_dtype())

def add_positions(x, offset=0):
    return ops.add(x, sinusoid_positions(x.shape[0], x.shape[1], offset))

def causal_mask(n):
    return np.tril(np.ones((n, n), dtype=bool))
