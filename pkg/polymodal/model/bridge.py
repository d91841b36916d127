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
import math

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

from polymodal import ops
from polymodal.errors import EmptyTokenSequence, InvalidConfig, LayerOutOfRange, \
        TokenWidthMismatch, UnknownModality

from . import layers

_logger = logging.getLogger(__name__)

FULL_WIDTH = 4096

class BridgeConfig(object):
    FIELDS = (
            ('queries', 8),
            ('width', 64),
            ('hidden', 32),
            ('layers', 2),
            ('expansion', 4),
    )

    def __init__(self, **kwargs):
        for name, default in self.FIELDS:
            setattr(self, name, kwargs.pop(name, default))
        if kwargs:
            name = sorted(kwargs)[0]
            raise InvalidConfig(field='bridge.%s' % name, value=kwargs[name], reason='unknown field')
        for name, default in self.FIELDS:
            if getattr(self, name) < 1:
                raise InvalidConfig(field='bridge.%s' % name, value=getattr(self, name), reason='must be positive')

    def serialize(self):
        return OrderedDict((name, getattr(self, name)) for name, default in self.FIELDS)

    @classmethod
    def deserialize(cls, d):
        return cls(**d)

class BridgedTokens(object):
    def __init__(self, tokens, modality):
        self.tokens = tokens
        self.modality = modality

    def __repr__(self):
        return '<BridgedTokens %s %dx%d>' % (self.modality, self.tokens.shape[0], self.tokens.shape[1])

class BridgeParams(object):
    '''Learnable queries shared by every modality, a shared query
    projection per layer and per-modality key/value projections per layer.

    Layer 0 is the plain cross-attention of the queries over the tokens
    followed by the feed-forward network.  Later layers take the previous
    output as queries and wrap attention and feed-forward in pre-norm
    residual connections.'''

    group = 'bridge'

    def __init__(self, cfg, store, widths):
        self.cfg = cfg
        self.store = store
        self.widths = OrderedDict()

        N, D, h, e = cfg.queries, cfg.width, cfg.hidden, cfg.expansion
        store.normal('bridge.queries', (N, D), self.group, std=1.0)
        for l in range(cfg.layers):
            p = 'bridge.%d' % l
            store.normal(p + '.W_q', (D, h), self.group)
            if l == 0:
                layers.init_ffn(store, p + '.ffn', h, e * D, D, self.group)
            else:
                layers.init_layer_norm(store, p + '.ln_q', D, self.group)
                store.normal(p + '.W_o', (h, D), self.group)
                layers.init_layer_norm(store, p + '.ln_ffn', D, self.group)
                layers.init_ffn(store, p + '.ffn', D, e * D, D, self.group)
        for modality, d in widths.items():
            self.add_modality(modality, d)

    def add_modality(self, modality, d):
        for l in range(self.cfg.layers):
            p = 'bridge.%d.%s' % (l, modality)
            self.store.normal(p + '.W_k', (d, self.cfg.hidden), self.group)
            self.store.normal(p + '.W_v', (d, self.cfg.hidden), self.group)
        self.widths[modality] = d

    @property
    def queries(self):
        return self.store['bridge.queries']

    def _check(self, t):
        if t.modality not in self.widths:
            raise UnknownModality(modality=t.modality)
        if t.n < 1:
            raise EmptyTokenSequence(modality=t.modality)
        if t.d != self.widths[t.modality]:
            raise TokenWidthMismatch(modality=t.modality, expected=self.widths[t.modality], actual=t.d)

    def _forward(self, t, capture=None, stop=None):
        self._check(t)
        store = self.store
        scale = 1.0 / math.sqrt(self.cfg.width)
        x = self.queries
        for l in range(self.cfg.layers):
            p = 'bridge.%d' % l
            k = ops.matmul(t.tokens, store['%s.%s.W_k' % (p, t.modality)])
            v = ops.matmul(t.tokens, store['%s.%s.W_v' % (p, t.modality)])
            if l == 0:
                q = ops.matmul(x, store[p + '.W_q'])
            else:
                q = ops.matmul(layers.layer_norm(store, p + '.ln_q', x), store[p + '.W_q'])
            weights = ops.softmax_rows(ops.mul(ops.matmul(q, ops.transpose(k)), scale))
            if capture is not None:
                capture.append(weights)
            if stop is not None and l == stop:
                return None
            attended = ops.matmul(weights, v)
            if l == 0:
                x = layers.ffn(store, p + '.ffn', attended)
            else:
                x = ops.add(x, ops.matmul(attended, store[p + '.W_o']))
                x = ops.add(x, layers.ffn(store, p + '.ffn', layers.layer_norm(store, p + '.ln_ffn', x)))
        return x

def bridge_forward(params, t):
    '''Project a token sequence of any length n onto N x D tokens in the
    language width.'''

    _logger.debug('Bridging %s tokens (%dx%d)...' % (t.modality, t.n, t.d))
    return BridgedTokens(params._forward(t), t.modality)

def attention_weights(params, t, layer):
    '''The N x n softmax matrix of the given bridge layer.'''

    if layer < 0 or layer >= params.cfg.layers:
        raise LayerOutOfRange(layer=layer, layers=params.cfg.layers)
    captured = []
    params._forward(t, capture=captured, stop=layer)
    return captured[layer]
