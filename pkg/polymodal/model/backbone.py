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

from polymodal import ops
from polymodal.errors import ContextOverflow, EmptyTokenSequence, InvalidConfig
from polymodal.tensor import no_grad
from polymodal.tokenizer import EOS, VOCAB_SIZE

from . import layers

_logger = logging.getLogger(__name__)

BASE_GROUP = 'backbone.base'
ADAPTER_GROUP = 'backbone.adapter'

class BackboneConfig(object):
    FIELDS = (
            ('width', 64),
            ('blocks', 2),
            ('heads', 4),
            ('context', 128),
            ('adapter_rank', 16),
            ('expansion', 4),
            ('causal_prefix', True),
    )

    def __init__(self, **kwargs):
        for name, default in self.FIELDS:
            setattr(self, name, kwargs.pop(name, default))
        if kwargs:
            name = sorted(kwargs)[0]
            raise InvalidConfig(field='backbone.%s' % name, value=kwargs[name], reason='unknown field')
        if self.blocks < 0:
            raise InvalidConfig(field='backbone.blocks', value=self.blocks, reason='must not be negative')
        if self.width % self.heads:
            raise InvalidConfig(field='backbone.heads', value=self.heads, reason='must divide the width %d' % self.width)
        if self.context < 1 or self.adapter_rank < 1:
            raise InvalidConfig(field='backbone.context', value=self.context, reason='context and adapter rank must be positive')

    def serialize(self):
        return OrderedDict((name, getattr(self, name)) for name, default in self.FIELDS)

    @classmethod
    def deserialize(cls, d):
        return cls(**d)

class AssembledSequence(object):
    '''Bridged modal tokens followed by prompt token embeddings.  Rows
    before boundary are modal tokens.'''

    def __init__(self, embeddings, boundary, prompt_ids):
        self.embeddings = embeddings
        self.boundary = boundary
        self.prompt_ids = list(prompt_ids)

    def __len__(self):
        return self.embeddings.shape[0]

    def __repr__(self):
        return '<AssembledSequence length=%d boundary=%d>' % (len(self), self.boundary)

class BackboneParams(object):
    '''A small decoder-only transformer.  The token embedding, the blocks
    and the output norm form the frozen base; every block is followed by a
    trainable bottleneck adapter whose up-projection starts at zero.'''

    def __init__(self, cfg, store):
        self.cfg = cfg
        self.store = store
        D = cfg.width
        store.normal('backbone.embedding', (VOCAB_SIZE, D), BASE_GROUP, std=1.0, frozen=True)
        for i in range(cfg.blocks):
            p = 'backbone.%d' % i
            layers.init_block(store, p, D, cfg.expansion, BASE_GROUP, frozen=True)
            layers.init_linear(store, p + '.adapter.down', D, cfg.adapter_rank, ADAPTER_GROUP)
            store.zeros(p + '.adapter.up.weight', (cfg.adapter_rank, D), ADAPTER_GROUP)
            store.zeros(p + '.adapter.up.bias', (D,), ADAPTER_GROUP)
        layers.init_layer_norm(store, 'backbone.norm', D, BASE_GROUP, frozen=True)

    @property
    def embedding(self):
        return self.store['backbone.embedding']

def assemble(params, s, prompt_ids):
    '''Concatenate the bridged tokens and the embedded prompt ids.  Prompt
    embeddings carry sinusoidal positions counted from the end of the modal
    prefix; the modal rows are left untouched.'''

    N = s.tokens.shape[0]
    prompt_ids = list(prompt_ids)
    if not prompt_ids:
        return AssembledSequence(s.tokens, N, [])
    prompt = ops.embedding_lookup(params.embedding, prompt_ids)
    prompt = layers.add_positions(prompt, offset=N)
    return AssembledSequence(ops.concat([s.tokens, prompt], axis=0), N, prompt_ids)

def extend(params, seq, token_id):
    '''The sequence with one more token appended.'''

    row = ops.embedding_lookup(params.embedding, [token_id])
    row = layers.add_positions(row, offset=len(seq))
    return AssembledSequence(ops.concat([seq.embeddings, row], axis=0), seq.boundary, seq.prompt_ids + [token_id])

def attention_mask(cfg, length, boundary):
    mask = layers.causal_mask(length)
    if not cfg.causal_prefix:
        mask[:boundary, :boundary] = True
    return mask

def adapter(store, name, x):
    h = ops.gelu(layers.linear(store, name + '.down', x))
    return layers.linear(store, name + '.up', h)

def backbone_forward(params, seq):
    '''Hidden states of every position after the last block (before the
    output norm).'''

    cfg = params.cfg
    n = len(seq)
    if n < 1:
        raise EmptyTokenSequence(modality='assembled')
    if n > cfg.context:
        raise ContextOverflow(length=n, context=cfg.context)
    mask = attention_mask(cfg, n, seq.boundary)
    x = seq.embeddings
    for i in range(cfg.blocks):
        p = 'backbone.%d' % i
        x = layers.block(params.store, p, x, cfg.heads, mask)
        x = ops.add(x, adapter(params.store, p + '.adapter', x))
    return x

def output_norm(params, hidden):
    return layers.layer_norm(params.store, 'backbone.norm', hidden)

def decode_text(params, seq, max_len, lm_weight, lm_bias=None):
    '''Greedy continuation of seq: repeatedly append the most likely next
    token (lowest id on ties) until EOS, max_len tokens, or the context is
    full.'''

    out = []
    with no_grad():
        while len(out) < max_len and len(seq) < params.cfg.context:
            hidden = output_norm(params, backbone_forward(params, seq))
            last = ops.slice_rows(hidden, len(seq) - 1, len(seq))
            logits = ops.linear(last, lm_weight, lm_bias)
            token = int(np.argmax(logits.data[0]))
            if token == EOS:
                break
            out.append(token)
            seq = extend(params, seq, token)
    _logger.debug('Decoded %d token(s)' % len(out))
    return out
