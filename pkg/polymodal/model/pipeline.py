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

import codecs
import logging

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

from polymodal import modality as mod
from polymodal import ops
from polymodal import format as fmt
from polymodal.errors import InvalidConfig
from polymodal.tensor import no_grad
from polymodal.tokenizer import BOS, EOS, detokenize, tokenize_text

from . import backbone as bb
from . import bridge as br
from . import encoders as enc
from . import heads
from .params import ParameterStore

_logger = logging.getLogger(__name__)

DESK = 'desk'
PAPER = 'paper'
PRESETS = (DESK, PAPER)

class ModelConfig(object):
    def __init__(self, encoder, bridge, backbone):
        if bridge.width != backbone.width:
            raise InvalidConfig(field='bridge.width', value=bridge.width,
                    reason='must equal the backbone width %d' % backbone.width)
        self.encoder = encoder
        self.bridge = bridge
        self.backbone = backbone

    @classmethod
    def preset(cls, name, overrides=None):
        '''The desk or paper preset, with optional per-part overrides:
        {"encoder": {...}, "bridge": {...}, "backbone": {...}}.'''

        overrides = dict(overrides or {})
        unknown = set(overrides) - set(['encoder', 'bridge', 'backbone'])
        if unknown:
            field = sorted(unknown)[0]
            raise InvalidConfig(field='model.%s' % field, value=overrides[field], reason='unknown field')
        enc_kw = dict(overrides.get('encoder', {}))
        if 'tube' in enc_kw and isinstance(enc_kw['tube'], dict):
            enc_kw['tube'] = enc.TubeSpec.deserialize(enc_kw['tube'])
        bridge_kw = dict(overrides.get('bridge', {}))
        backbone_kw = dict(overrides.get('backbone', {}))
        if name == DESK:
            encoder = enc.EncoderConfig.desk(**enc_kw)
        elif name == PAPER:
            encoder = enc.EncoderConfig.paper(**enc_kw)
            for k, v in (('queries', 32), ('width', br.FULL_WIDTH), ('hidden', 1024), ('layers', 2)):
                bridge_kw.setdefault(k, v)
            for k, v in (('width', br.FULL_WIDTH), ('blocks', 32), ('heads', 32), ('context', 2048), ('adapter_rank', 64)):
                backbone_kw.setdefault(k, v)
        else:
            raise InvalidConfig(field='preset', value=name, reason='must be desk or paper')
        return cls(encoder, br.BridgeConfig(**bridge_kw), bb.BackboneConfig(**backbone_kw))

    def serialize(self):
        d = OrderedDict()
        d['encoder'] = self.encoder.serialize()
        d['bridge'] = self.bridge.serialize()
        d['backbone'] = self.backbone.serialize()
        return d

    @classmethod
    def deserialize(cls, d):
        return cls(enc.EncoderConfig.deserialize(d['encoder']), br.BridgeConfig.deserialize(d['bridge']),
                bb.BackboneConfig.deserialize(d['backbone']))

class Model(object):
    '''Encoder, bridge, backbone and head of one task, all drawing their
    tensors from one ParameterStore.'''

    def __init__(self, cfg, modality, head_spec, seed=0):
        self.cfg = cfg
        self.modality = mod.check_modality(modality)
        self.head_spec = head_spec
        self.store = ParameterStore(seed)

        enc.init_encoder(self.store, cfg.encoder, modality)
        self.bridge = br.BridgeParams(cfg.bridge, self.store, { modality: cfg.encoder.width(modality) })
        self.backbone = bb.BackboneParams(cfg.backbone, self.store)
        heads.init_head(self.store, head_spec, cfg.backbone.width)
        self._prompt_cache = {}

        _logger.info('Built %s model: %d tensor(s), %d trainable scalar(s)' %
                (modality, len(self.store), self.store.num_scalars(trainable_only=True)))

    @property
    def W_h(self):
        return self.store['head.weight']

    @property
    def b_h(self):
        return self.store['head.bias']

    #################
    # Prompts
    def prompt_budget(self):
        budget = self.cfg.backbone.context - self.cfg.bridge.queries
        if self.head_spec.kind == heads.TEXT_DECODE:
            budget -= 1 + self.head_spec.max_len
        return max(budget, 0)

    def prompt_ids(self, prompt):
        '''Token ids of a prompt, truncated to fit the context.  Results are
        cached per prompt text.'''

        if prompt not in self._prompt_cache:
            ids = tokenize_text(prompt)
            budget = self.prompt_budget()
            if len(ids) > budget:
                _logger.warning('Prompt of %d tokens truncated to %d to fit the context of %d' %
                        (len(ids), budget, self.cfg.backbone.context))
                ids = ids[:budget]
            self._prompt_cache[prompt] = ids
        return list(self._prompt_cache[prompt])

    #################
    # Forward stages
    def encode(self, sample):
        return enc.encode(sample, self.cfg.encoder, self.store)

    def bridged(self, sample):
        return br.bridge_forward(self.bridge, self.encode(sample))

    def assemble(self, sample, prompt, extra_ids=()):
        return bb.assemble(self.backbone, self.bridged(sample), self.prompt_ids(prompt) + list(extra_ids))

    def hidden(self, seq):
        return bb.output_norm(self.backbone, bb.backbone_forward(self.backbone, seq))

    def forward(self, sample, prompt):
        seq = self.assemble(sample, prompt)
        return heads.head_forward(self.head_spec, self.hidden(seq), self.W_h, self.b_h, seq.boundary)

    #################
    # Losses
    def _target_ids(self, target):
        return tokenize_text(target)[:self.head_spec.max_len]

    def _text_logits(self, sample, prompt, target_ids):
        seq = self.assemble(sample, prompt, [BOS] + target_ids)
        start = seq.boundary + len(seq.prompt_ids) - len(target_ids) - 1
        h = ops.slice_rows(self.hidden(seq), start, start + len(target_ids) + 1)
        return ops.linear(h, self.W_h, self.b_h)

    def loss(self, sample, target, prompt):
        '''Scalar training loss of one sample: cross-entropy for
        classification and text, mean squared error on the normalised
        target for regression.'''

        spec = self.head_spec
        if spec.kind == heads.TEXT_DECODE:
            target_ids = self._target_ids(target)
            logits = self._text_logits(sample, prompt, target_ids)
            return ops.cross_entropy(logits, target_ids + [EOS])
        seq = self.assemble(sample, prompt)
        z = heads.head_logits(spec, self.hidden(seq), self.W_h, self.b_h, seq.boundary)
        if spec.kind == heads.CLASSIFY:
            return ops.cross_entropy(z, [int(target)])
        return ops.mse(z, heads.normalize_target(spec, target))

    def text_log_likelihood(self, sample, target, prompt):
        '''Total log-probability of target (followed by EOS) under the
        model.'''

        m = len(self._target_ids(target)) + 1
        with no_grad():
            nll = self.loss(sample, target, prompt).item()
        return -float(nll) * m

    #################
    # Predictions
    def predict(self, sample, prompt):
        spec = self.head_spec
        if spec.kind == heads.TEXT_DECODE:
            seq = self.assemble(sample, prompt, [BOS])
            W = self.W_h
            ids = bb.decode_text(self.backbone, seq, spec.max_len, W, self.b_h)
            return codecs.decode(detokenize(ids), 'utf-8', 'replace')
        return heads.predict(spec, self.forward(sample, prompt))

    def inspect(self, sample, prompt):
        '''Dims at every stage of the pipeline for one sample.'''

        d = OrderedDict()
        d['modality'] = sample.tag
        d['payload'] = fmt.humanize_dims(sample.payload_dims())
        t = self.encode(sample)
        d['tokens'] = fmt.humanize_dims([t.n, t.d])
        d['expected_tokens'] = enc.expected_tokens(self.cfg.encoder, sample)
        s = br.bridge_forward(self.bridge, t)
        d['bridged'] = fmt.humanize_dims(s.tokens.dims)
        ids = self.prompt_ids(prompt)
        d['prompt_tokens'] = len(ids)
        seq = bb.assemble(self.backbone, s, ids)
        d['assembled'] = len(seq)
        d['boundary'] = seq.boundary
        hidden = self.hidden(seq)
        d['hidden'] = fmt.humanize_dims(hidden.dims)
        out = heads.head_forward(self.head_spec, hidden, self.W_h, self.b_h, seq.boundary)
        d['head'] = self.head_spec.kind
        d['head_output'] = fmt.humanize_dims(out.dims)
        return d

def describe_shapes(cfg, sample, head_spec, prompt):
    '''The dims Model.inspect() would report, computed from the
    configuration alone.  Usable with presets too large to instantiate.'''

    d = OrderedDict()
    d['modality'] = sample.tag
    d['payload'] = fmt.humanize_dims(sample.payload_dims())
    n = enc.expected_tokens(cfg.encoder, sample)
    d['tokens'] = fmt.humanize_dims([n, cfg.encoder.width(sample.tag)])
    d['expected_tokens'] = n
    N, D = cfg.bridge.queries, cfg.backbone.width
    d['bridged'] = fmt.humanize_dims([N, D])
    budget = cfg.backbone.context - N
    if head_spec.kind == heads.TEXT_DECODE:
        budget -= 1 + head_spec.max_len
    n_p = min(len(tokenize_text(prompt)), max(budget, 0))
    d['prompt_tokens'] = n_p
    d['assembled'] = N + n_p
    d['boundary'] = N
    d['hidden'] = fmt.humanize_dims([N + n_p, D])
    d['head'] = head_spec.kind
    d['head_output'] = fmt.humanize_dims([1, head_spec.output_dim])
    return d
