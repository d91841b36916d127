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

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np

from polymodal import modality as mod
from polymodal import ops
from polymodal.errors import EmptyTokenSequence, InsufficientPoints, InvalidConfig, \
        PayloadShapeMismatch, TubeExceedsVideo
from polymodal.modality import TokenSequence, validate_payload
from polymodal.tensor import Tensor, default_dtype
from polymodal.tokenizer import VOCAB_SIZE, tokenize_text

from . import layers

_logger = logging.getLogger(__name__)

TRANSFORMER_MODALITIES = (mod.TEXT, mod.CODE, mod.RGB, mod.MSI, mod.HSI, mod.TABLE,
        mod.TRAJECTORY, mod.OBLIQUE, mod.VIDEO, mod.POINTCLOUD)

DESK_DEPTHS = dict((m, 2) for m in TRANSFORMER_MODALITIES)
DESK_DEPTHS[mod.TABLE] = 1

class TubeSpec(object):
    '''A regular grid of space-time tubes: extent, stride and origin offset
    along (time, height, width).'''

    def __init__(self, extent, stride=None, offset=(0, 0, 0)):
        self.extent = tuple(int(x) for x in extent)
        if stride is None:
            stride = self.extent
        self.stride = tuple(int(x) for x in stride)
        self.offset = tuple(int(x) for x in offset)

    def serialize(self):
        return OrderedDict((('extent', list(self.extent)), ('stride', list(self.stride)), ('offset', list(self.offset))))

    @classmethod
    def deserialize(cls, d):
        return cls(d['extent'], d['stride'], d['offset'])

class EncoderConfig(object):
    '''Widths, depths and shape parameters of the thirteen encoders.'''

    # (attribute, default); desk values
    FIELDS = (
            ('widths', dict((m, 16) for m in mod.MODALITIES)),
            ('depths', DESK_DEPTHS),
            ('heads', 2),
            ('expansion', 2),
            ('patch', 8),
            ('msi_channels', 13),
            ('hsi_channels', 103),
            ('table_columns', [4, 3, 0, 0, 0, 0]),
            ('table_bins', 16),
            ('conv_channels', [8, 16]),
            ('conv_kernel', 3),
            ('conv_stride', 2),
            ('conv_pad', 1),
            ('graph_nodes', 8),
            ('graph_features', 2),
            ('graph_timesteps', 24),
            ('oblique_max_views', 8),
            ('video_channels', 3),
            ('tube', TubeSpec((2, 4, 4))),
            ('pointcloud_groups', 8),
            ('pointcloud_group_size', 16),
            ('pointcloud_features', 0),
            ('pointcloud_channels', [16]),
            ('frozen', [mod.RGB]),
    )

    def __init__(self, **kwargs):
        for name, default in self.FIELDS:
            setattr(self, name, copy.deepcopy(kwargs.pop(name, default)))
        if kwargs:
            name = sorted(kwargs)[0]
            raise InvalidConfig(field='encoder.%s' % name, value=kwargs[name], reason='unknown field')
        self.validate()

    @classmethod
    def desk(cls, **kwargs):
        return cls(**kwargs)

    @classmethod
    def paper(cls, **kwargs):
        '''Depths stated for the full-size encoders; for shape checks.'''

        widths = dict((m, 768) for m in mod.MODALITIES)
        widths[mod.RGB] = 1408
        depths = dict((m, 12) for m in TRANSFORMER_MODALITIES)
        depths.update({ mod.RGB: 40, mod.MSI: 40, mod.TRAJECTORY: 2, mod.TABLE: 1, mod.VIDEO: 6 })
        kwargs.setdefault('widths', widths)
        kwargs.setdefault('depths', depths)
        kwargs.setdefault('heads', 16)
        kwargs.setdefault('expansion', 4)
        kwargs.setdefault('patch', 14)
        kwargs.setdefault('conv_channels', [64, 256])
        kwargs.setdefault('pointcloud_groups', 64)
        kwargs.setdefault('pointcloud_group_size', 32)
        kwargs.setdefault('pointcloud_channels', [128, 256])
        return cls(**kwargs)

    def validate(self):
        for m in mod.MODALITIES:
            if self.widths.get(m, 0) < 1:
                raise InvalidConfig(field='encoder.widths.%s' % m, value=self.widths.get(m), reason='must be positive')
        for m in TRANSFORMER_MODALITIES:
            if self.depths.get(m, 0) < 1:
                raise InvalidConfig(field='encoder.depths.%s' % m, value=self.depths.get(m), reason='must be at least 1')
            if self.widths[m] % self.heads:
                raise InvalidConfig(field='encoder.heads', value=self.heads, reason='must divide the %s width %d' % (m, self.widths[m]))
        if self.msi_channels <= 3:
            raise InvalidConfig(field='encoder.msi_channels', value=self.msi_channels, reason='must exceed 3')
        if self.table_bins < 2:
            raise InvalidConfig(field='encoder.table_bins', value=self.table_bins, reason='must be at least 2')
        for m in self.frozen:
            mod.check_modality(m)

    def width(self, modality):
        return self.widths[modality]

    def serialize(self):
        d = OrderedDict()
        for name, default in self.FIELDS:
            value = getattr(self, name)
            if isinstance(value, TubeSpec):
                value = value.serialize()
            elif isinstance(value, dict):
                value = OrderedDict((k, value[k]) for k in mod.MODALITIES if k in value)
            d[name] = value
        return d

    @classmethod
    def deserialize(cls, d):
        d = dict(d)
        if 'tube' in d and not isinstance(d['tube'], TubeSpec):
            d['tube'] = TubeSpec.deserialize(d['tube'])
        return cls(**d)

def _const(arr):
    return Tensor(np.ascontiguousarray(arr), dtype=default_dtype())

def _prefix(modality):
    return 'encoder.%s' % modality

#################
# Point-cloud grouping
def _canonical_groups(cloud, G, N_pts):
    cloud = np.asarray(cloud)
    K = cloud.shape[0]
    if K < G or K < N_pts:
        raise InsufficientPoints(points=K, required=max(G, N_pts))
    # lexicographic order over all columns, first column most significant
    order = np.lexsort(tuple(cloud[:, j] for j in reversed(range(cloud.shape[1]))))
    pts = cloud[order]
    xyz = pts[:, :3]

    centroids = [0]
    dist = np.sum((xyz - xyz[0]) ** 2, axis=1)
    for g in range(1, G):
        nxt = int(np.argmax(dist))
        centroids.append(nxt)
        dist = np.minimum(dist, np.sum((xyz - xyz[nxt]) ** 2, axis=1))

    neighbors = []
    for c in centroids:
        d2 = np.sum((xyz - xyz[c]) ** 2, axis=1)
        neighbors.append(np.argsort(d2, kind='stable')[:N_pts])
    return pts, np.array(centroids), np.array(neighbors)

def group_points(cloud, G, N_pts):
    '''Canonicalize the cloud by lexicographic sort, pick G centroids by
    farthest-point sampling from the smallest point, and gather the N_pts
    nearest neighbours of each centroid re-centred on it.  Returns a
    G x N_pts x 3 array.'''

    pts, centroids, neighbors = _canonical_groups(cloud, G, N_pts)
    xyz = pts[:, :3]
    return xyz[neighbors] - xyz[centroids][:, None, :]

#################
# Video tubes
def tube_counts(video_dims, spec):
    '''Number of tubes along (time, height, width).'''

    T, C, H, W = video_dims
    counts = []
    for axis, size, extent, stride, offset in zip(('time', 'height', 'width'), (T, H, W), spec.extent, spec.stride, spec.offset):
        if extent < 1 or stride < 1 or offset < 0:
            raise InvalidConfig(field='encoder.tube', value=spec.serialize(), reason='extents and strides must be positive')
        if offset + extent > size:
            raise TubeExceedsVideo(axis=axis, extent=offset + extent, size=size)
        counts.append((size - offset - extent) // stride + 1)
    return counts

def sparse_tubes(video, spec):
    '''Cut a T x C x H x W video into the tube grid of spec; each tube is
    flattened into one row.'''

    video = np.asarray(video)
    counts = tube_counts(video.shape, spec)
    et, eh, ew = spec.extent
    rows = []
    for i in range(counts[0]):
        t0 = spec.offset[0] + i * spec.stride[0]
        for j in range(counts[1]):
            h0 = spec.offset[1] + j * spec.stride[1]
            for k in range(counts[2]):
                w0 = spec.offset[2] + k * spec.stride[2]
                rows.append(video[t0:t0 + et, :, h0:h0 + eh, w0:w0 + ew].reshape(-1))
    return _const(np.stack(rows))

#################
# Images
def patchify(modality, image, p):
    H, W, C = image.shape
    if H % p or W % p:
        raise PayloadShapeMismatch(modality=modality, expected='HxWxC with H and W multiples of %d' % p, actual=list(image.shape))
    arr = np.asarray(image).reshape(H // p, p, W // p, p, C).transpose(0, 2, 1, 3, 4)
    return arr.reshape((H // p) * (W // p), p * p * C)

def _conv_plan(cfg, c_in, modality):
    return [c_in] + list(cfg.conv_channels) + [cfg.width(modality)]

def _init_conv(store, name, plan, k, group, frozen):
    for i in range(len(plan) - 1):
        store.normal('%s.%d.kernels' % (name, i), (plan[i + 1], plan[i], k, k), group,
                std=1.0 / np.sqrt(plan[i] * k * k), frozen=frozen)
        store.zeros('%s.%d.bias' % (name, i), (plan[i + 1],), group, frozen=frozen)

def _conv_tokens(cfg, store, name, image, layers_count):
    '''Run a stack of strided conv2d layers over an H x W x C image and
    return the final feature map cells as tokens.'''

    x = _const(np.transpose(image, (2, 0, 1)))
    for i in range(layers_count):
        x = ops.conv2d(x, store['%s.%d.kernels' % (name, i)], stride=cfg.conv_stride,
                pad=cfg.conv_pad, bias=store['%s.%d.bias' % (name, i)])
        if i < layers_count - 1:
            x = ops.gelu(x)
    c, h, w = x.shape
    return ops.transpose(ops.reshape(x, (c, h * w)))

def conv_output_size(cfg, size, layers_count):
    for i in range(layers_count):
        size = (size + 2 * cfg.conv_pad - cfg.conv_kernel) // cfg.conv_stride + 1
    return size

#################
# Parameter initialisation
def init_encoder(store, cfg, modality):
    mod.check_modality(modality)
    p = _prefix(modality)
    group = p
    frozen = modality in cfg.frozen
    d = cfg.width(modality)

    if modality in (mod.TEXT, mod.CODE):
        store.normal(p + '.embedding', (VOCAB_SIZE, d), group, std=1.0, frozen=frozen)
    elif modality in (mod.RGB, mod.MSI, mod.OBLIQUE):
        channels = cfg.msi_channels if modality == mod.MSI else 3
        layers.init_linear(store, p + '.patch', cfg.patch * cfg.patch * channels, d, group, frozen=frozen)
        if modality == mod.OBLIQUE:
            store.normal(p + '.views', (cfg.oblique_max_views, d), group, std=1.0, frozen=frozen)
    elif modality == mod.HSI:
        layers.init_linear(store, p + '.spectrum', cfg.hsi_channels, d, group, frozen=frozen)
    elif modality == mod.TABLE:
        continuous = [j for j, v in enumerate(cfg.table_columns) if v == 0]
        for j, vocab in enumerate(cfg.table_columns):
            store.normal('%s.col%d' % (p, j), (vocab or cfg.table_bins, d), group, std=1.0, frozen=frozen)
        store.normal(p + '.columns', (len(cfg.table_columns), d), group, std=1.0, frozen=frozen)
        if continuous:
            # placeholder edges until fit_table_bins() sees training data
            edges = np.tile(np.linspace(-2.0, 2.0, cfg.table_bins - 1), (len(continuous), 1))
            store.constant(p + '.edges', edges, group)
    elif modality == mod.TRAJECTORY:
        layers.init_linear(store, p + '.point', 2, d, group, frozen=frozen)
    elif modality == mod.SAR:
        _init_conv(store, p + '.conv', _conv_plan(cfg, 2, modality), cfg.conv_kernel, group, frozen)
    elif modality == mod.INFRARED:
        for branch in ('visible', 'thermal'):
            _init_conv(store, '%s.%s' % (p, branch), _conv_plan(cfg, 3, modality), cfg.conv_kernel, group, frozen)
    elif modality == mod.GRAPH:
        layers.init_linear(store, p + '.node', cfg.graph_features, d, group, frozen=frozen)
        store.normal(p + '.spatial', (cfg.graph_nodes, d), group, std=1.0, frozen=frozen)
        store.normal(p + '.temporal', (cfg.graph_timesteps, d), group, std=1.0, frozen=frozen)
    elif modality == mod.VIDEO:
        et, eh, ew = cfg.tube.extent
        layers.init_linear(store, p + '.tube', et * eh * ew * cfg.video_channels, d, group, frozen=frozen)
    elif modality == mod.POINTCLOUD:
        plan = [3 + cfg.pointcloud_features] + list(cfg.pointcloud_channels) + [d]
        for i in range(len(plan) - 1):
            store.normal('%s.point.%d.kernels' % (p, i), (plan[i + 1], plan[i], 1), group,
                    std=1.0 / np.sqrt(plan[i]), frozen=frozen)
            store.zeros('%s.point.%d.bias' % (p, i), (plan[i + 1],), group, frozen=frozen)
        layers.init_linear(store, p + '.centroid', 3, d, group, frozen=frozen)

    if modality in TRANSFORMER_MODALITIES:
        layers.init_stack(store, p + '.blocks', d, cfg.depths[modality], cfg.expansion, group, frozen=frozen)
    layers.init_layer_norm(store, p + '.norm', d, group, frozen=frozen)

def fit_table_bins(store, cfg, rows):
    '''Set the quantile bin edges of the continuous table columns from
    training rows (m x columns).'''

    rows = np.asarray(rows, dtype=np.float64)
    continuous = [j for j, v in enumerate(cfg.table_columns) if v == 0]
    if not continuous:
        return
    qs = np.arange(1, cfg.table_bins) / float(cfg.table_bins)
    edges = np.stack([np.quantile(rows[:, j], qs) for j in continuous])
    store[_prefix(mod.TABLE) + '.edges'].data = edges.astype(default_dtype())
    _logger.debug('Fitted %d-bin edges for %d continuous column(s)' % (cfg.table_bins, len(continuous)))

def table_indices(store, cfg, row):
    '''Embedding row index of every table cell.'''

    row = np.asarray(row, dtype=np.float64)
    edges = store.get(_prefix(mod.TABLE) + '.edges')
    indices = []
    c = 0
    for j, vocab in enumerate(cfg.table_columns):
        if vocab:
            indices.append(int(row[j]))
        else:
            indices.append(int(np.searchsorted(edges.data[c], row[j], side='right')))
            c += 1
    return indices

#################
# Forward passes
def _finish(cfg, store, modality, x, positions=True):
    p = _prefix(modality)
    if positions:
        x = layers.add_positions(x)
    if modality in TRANSFORMER_MODALITIES:
        x = layers.stack(store, p + '.blocks', x, cfg.depths[modality], cfg.heads)
    return layers.layer_norm(store, p + '.norm', x)

def _encode_text(cfg, store, modality, payload):
    ids = tokenize_text(payload)
    if not ids:
        raise EmptyTokenSequence(modality=modality)
    x = ops.embedding_lookup(store[_prefix(modality) + '.embedding'], ids)
    return _finish(cfg, store, modality, x)

def _encode_image(cfg, store, modality, payload):
    channels = payload.shape[2]
    expected = cfg.msi_channels if modality == mod.MSI else 3
    if channels != expected:
        raise PayloadShapeMismatch(modality=modality, expected='HxWx%d' % expected, actual=list(payload.shape))
    x = layers.linear(store, _prefix(modality) + '.patch', _const(patchify(modality, payload, cfg.patch)))
    return _finish(cfg, store, modality, x)

def _encode_hsi(cfg, store, modality, payload):
    if payload.shape[2] != cfg.hsi_channels:
        raise PayloadShapeMismatch(modality=modality, expected='1x1x%d' % cfg.hsi_channels, actual=list(payload.shape))
    x = layers.linear(store, _prefix(modality) + '.spectrum', _const(np.reshape(payload, (1, -1))))
    return _finish(cfg, store, modality, x, positions=False)

def _encode_table(cfg, store, modality, payload):
    if len(payload) != len(cfg.table_columns):
        raise PayloadShapeMismatch(modality=modality, expected='%d columns' % len(cfg.table_columns), actual=list(np.shape(payload)))
    p = _prefix(modality)
    cells = [ops.embedding_lookup(store['%s.col%d' % (p, j)], [i])
            for j, i in enumerate(table_indices(store, cfg, payload))]
    x = ops.add(ops.concat(cells, axis=0), store[p + '.columns'])
    return _finish(cfg, store, modality, x, positions=False)

def _encode_trajectory(cfg, store, modality, payload):
    x = layers.linear(store, _prefix(modality) + '.point', _const(payload))
    return _finish(cfg, store, modality, x)

def _encode_sar(cfg, store, modality, payload):
    x = _conv_tokens(cfg, store, _prefix(modality) + '.conv', payload, len(cfg.conv_channels) + 1)
    return _finish(cfg, store, modality, x, positions=False)

def _encode_infrared(cfg, store, modality, payload):
    p = _prefix(modality)
    n_layers = len(cfg.conv_channels) + 1
    visible = _conv_tokens(cfg, store, p + '.visible', payload[0], n_layers)
    thermal = _conv_tokens(cfg, store, p + '.thermal', payload[1], n_layers)
    return _finish(cfg, store, modality, ops.concat([visible, thermal], axis=0), positions=False)

def _encode_graph(cfg, store, modality, payload):
    p = _prefix(modality)
    K, F = payload.features.shape
    if K > cfg.graph_nodes or F != cfg.graph_features:
        raise PayloadShapeMismatch(modality=modality, expected='at most %d nodes x %d features' % (cfg.graph_nodes, cfg.graph_features),
                actual=[K, F])
    nodes = layers.linear(store, p + '.node', _const(payload.features))
    spatial = ops.embedding_lookup(store[p + '.spatial'], np.arange(K))
    temporal = ops.embedding_lookup(store[p + '.temporal'], [payload.timestep] * K)
    return _finish(cfg, store, modality, ops.concat([nodes, spatial, temporal], axis=0), positions=False)

def _encode_oblique(cfg, store, modality, payload):
    p = _prefix(modality)
    views = []
    for v in range(payload.shape[0]):
        x = layers.linear(store, p + '.patch', _const(patchify(modality, payload[v], cfg.patch)))
        x = layers.add_positions(x)
        x = ops.add(x, ops.embedding_lookup(store[p + '.views'], [v] * x.shape[0]))
        views.append(layers.stack(store, p + '.blocks', x, cfg.depths[modality], cfg.heads))
    return layers.layer_norm(store, p + '.norm', ops.concat(views, axis=0))

def _encode_video(cfg, store, modality, payload):
    if payload.shape[1] != cfg.video_channels:
        raise PayloadShapeMismatch(modality=modality, expected='TxCxHxW with C=%d' % cfg.video_channels, actual=list(payload.shape))
    x = layers.linear(store, _prefix(modality) + '.tube', sparse_tubes(payload, cfg.tube))
    return _finish(cfg, store, modality, x)

def _encode_pointcloud(cfg, store, modality, payload):
    p = _prefix(modality)
    G, N_pts = cfg.pointcloud_groups, cfg.pointcloud_group_size
    if payload.shape[1] != 3 + cfg.pointcloud_features:
        raise PayloadShapeMismatch(modality=modality, expected='Kx%d' % (3 + cfg.pointcloud_features), actual=list(payload.shape))
    pts, centroids, neighbors = _canonical_groups(payload, G, N_pts)
    grouped = pts[neighbors].copy()
    grouped[:, :, :3] -= pts[centroids][:, None, :3]

    # kernel-1 convolutions over all grouped points, then mean over each group
    x = _const(grouped.reshape(G * N_pts, -1).T)
    n_layers = len(cfg.pointcloud_channels) + 1
    for i in range(n_layers):
        x = ops.conv1d(x, store['%s.point.%d.kernels' % (p, i)], bias=store['%s.point.%d.bias' % (p, i)])
        if i < n_layers - 1:
            x = ops.gelu(x)
    x = ops.reshape(ops.transpose(x), (G, N_pts, cfg.width(modality)))
    x = ops.mean_pool(x, axis=1)
    x = ops.add(x, layers.linear(store, p + '.centroid', _const(pts[centroids][:, :3])))
    return _finish(cfg, store, modality, x, positions=False)

_ENCODERS = {
        mod.TEXT: _encode_text,
        mod.CODE: _encode_text,
        mod.RGB: _encode_image,
        mod.MSI: _encode_image,
        mod.HSI: _encode_hsi,
        mod.TABLE: _encode_table,
        mod.TRAJECTORY: _encode_trajectory,
        mod.SAR: _encode_sar,
        mod.INFRARED: _encode_infrared,
        mod.GRAPH: _encode_graph,
        mod.OBLIQUE: _encode_oblique,
        mod.VIDEO: _encode_video,
        mod.POINTCLOUD: _encode_pointcloud,
}

def encode(sample, cfg, store):
    '''Map one raw sample to its token sequence.

    Text and code payloads are tokenized per UTF-8 byte, so their token
    count n is the byte count of the payload rather than a word count.'''

    validate_payload(sample.tag, sample.payload)
    _logger.debug('Encoding %s sample (%s)...' % (sample.tag, sample.payload_dims_str()))
    tokens = _ENCODERS[sample.tag](cfg, store, sample.tag, sample.payload)
    return TokenSequence(tokens, sample.tag)

def expected_tokens(cfg, sample):
    '''Token count n the encoder of sample.tag produces for its payload.'''

    tag = sample.tag
    if tag in (mod.TEXT, mod.CODE):
        return len(sample.payload)
    if tag in (mod.RGB, mod.MSI):
        H, W = np.shape(sample.payload)[:2]
        return (H // cfg.patch) * (W // cfg.patch)
    if tag in (mod.HSI,):
        return 1
    if tag == mod.TABLE:
        return len(cfg.table_columns)
    if tag == mod.TRAJECTORY:
        return np.shape(sample.payload)[0]
    n_layers = len(cfg.conv_channels) + 1
    if tag == mod.SAR:
        H, W = np.shape(sample.payload)[:2]
        return conv_output_size(cfg, H, n_layers) * conv_output_size(cfg, W, n_layers)
    if tag == mod.INFRARED:
        H, W = np.shape(sample.payload)[1:3]
        return 2 * conv_output_size(cfg, H, n_layers) * conv_output_size(cfg, W, n_layers)
    if tag == mod.GRAPH:
        return 3 * sample.payload.features.shape[0]
    if tag == mod.OBLIQUE:
        V, H, W = np.shape(sample.payload)[:3]
        return V * (H // cfg.patch) * (W // cfg.patch)
    if tag == mod.VIDEO:
        return int(np.prod(tube_counts(np.shape(sample.payload), cfg.tube)))
    if tag == mod.POINTCLOUD:
        return cfg.pointcloud_groups
