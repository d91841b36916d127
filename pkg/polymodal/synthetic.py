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
import copy
import logging
import re

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np

from . import modality as mod
from .errors import InvalidConfig
from .model import heads

_logger = logging.getLogger(__name__)

CLASSIFY = 'classify'
REGRESS = 'regress'
TRAJECTORY = 'trajectory'
TEXT_GENERATE = 'text-generate'
DEPTH = 'depth'
TASKS = (CLASSIFY, REGRESS, TRAJECTORY, TEXT_GENERATE, DEPTH)

DEFAULT_TASKS = {
        mod.TEXT: CLASSIFY,
        mod.CODE: TEXT_GENERATE,
        mod.RGB: CLASSIFY,
        mod.MSI: CLASSIFY,
        mod.HSI: CLASSIFY,
        mod.TABLE: REGRESS,
        mod.TRAJECTORY: TRAJECTORY,
        mod.SAR: CLASSIFY,
        mod.INFRARED: CLASSIFY,
        mod.GRAPH: REGRESS,
        mod.OBLIQUE: DEPTH,
        mod.VIDEO: CLASSIFY,
        mod.POINTCLOUD: CLASSIFY,
}

# most classes a planted rule can tell apart
MAX_CLASSES = {
        mod.TEXT: 2,
        mod.RGB: 4,
        mod.MSI: 4,
        mod.SAR: 4,
        mod.HSI: 3,
        mod.INFRARED: 3,
        mod.VIDEO: 2,
        mod.POINTCLOUD: 3,
}

DEFAULT_SHAPES = {
        mod.TEXT: {},
        mod.CODE: {},
        mod.RGB: { 'height': 32, 'width': 32 },
        mod.MSI: { 'height': 16, 'width': 16, 'channels': 13 },
        mod.HSI: { 'channels': 103 },
        mod.TABLE: {},
        mod.TRAJECTORY: { 'past': 8, 'future': 4 },
        mod.SAR: { 'height': 32, 'width': 32 },
        mod.INFRARED: { 'height': 32, 'width': 32 },
        mod.GRAPH: { 'nodes': 8, 'timesteps': 24 },
        mod.OBLIQUE: { 'views': 5, 'height': 16, 'width': 16, 'grid': [4, 4] },
        mod.VIDEO: { 'frames': 4, 'height': 8, 'width': 8 },
        mod.POINTCLOUD: { 'points': 128 },
}

DEFAULT_NOISE = 0.01

# table columns: two categorical (4 and 3 values) and four continuous
TABLE_COLUMNS = [4, 3, 0, 0, 0, 0]
TABLE_WEIGHTS = np.array([2.0, -1.0, 1.5, -1.0, 0.5, 0.0])

POSITIVE_WORDS = ['good', 'great', 'calm', 'clear', 'lovely', 'bright']
NEGATIVE_WORDS = ['bad', 'awful', 'grim', 'dull', 'noisy', 'dark']
NEUTRAL_WORDS = ['river', 'street', 'field', 'harbour', 'market', 'bridge']

CODE_OPERATIONS = [('+', 'add'), ('-', 'subtract'), ('*', 'multiply'), ('/', 'divide')]
CODE_NAMES = ['a', 'b', 'x', 'y', 'n', 'm']
_CODE_RE = re.compile(r'^def f\((\w+), (\w+)\): return (\w+) ([-+*/]) (\w+)$')

HSI_PEAKS = [20, 50, 80]
IDENTITY_CHANNELS = 3

SPHERE = 0
CUBE = 1
PLANE = 2
SHAPE_FAMILIES = ('sphere', 'cube', 'plane')

class SyntheticTaskSpec(object):
    '''What to generate: modality, task, sample count, seed, payload noise
    and per-modality shape parameters.'''

    def __init__(self, modality, task=None, num_classes=None, samples=8, seed=0, noise=DEFAULT_NOISE, shape=None):
        self.modality = mod.check_modality(modality)
        self.task = task if task is not None else DEFAULT_TASKS[modality]
        if self.task != DEFAULT_TASKS[modality]:
            raise InvalidConfig(field='task', value=self.task,
                    reason='%s data supports the %s task only' % (modality, DEFAULT_TASKS[modality]))
        if self.task == CLASSIFY:
            if num_classes is None:
                num_classes = MAX_CLASSES[modality]
            if not (2 <= num_classes <= MAX_CLASSES[modality]):
                raise InvalidConfig(field='num_classes', value=num_classes,
                        reason='must be between 2 and %d for %s' % (MAX_CLASSES[modality], modality))
        else:
            num_classes = None
        if samples < 1:
            raise InvalidConfig(field='samples', value=samples, reason='must be positive')
        if noise < 0:
            raise InvalidConfig(field='noise', value=noise, reason='must not be negative')

        self.num_classes = num_classes
        self.samples = int(samples)
        self.seed = int(seed)
        self.noise = float(noise)
        self.shape = copy.deepcopy(DEFAULT_SHAPES[modality])
        for name, value in (shape or {}).items():
            if name not in self.shape:
                raise InvalidConfig(field='shape.%s' % name, value=value, reason='unknown shape parameter for %s' % modality)
            self.shape[name] = value
        self._validate_shape()

    def _validate_shape(self):
        s = self.shape
        for name, value in s.items():
            if name == 'grid':
                ok = len(value) == 2 and min(value) >= 1
            else:
                ok = value >= 1
            if not ok:
                raise InvalidConfig(field='shape.%s' % name, value=value, reason='must be positive')
        if self.modality == mod.MSI and s['channels'] <= 3:
            raise InvalidConfig(field='shape.channels', value=s['channels'], reason='multispectral data needs more than 3 channels')
        if self.modality == mod.HSI and s['channels'] <= max(HSI_PEAKS):
            raise InvalidConfig(field='shape.channels', value=s['channels'], reason='must exceed %d' % max(HSI_PEAKS))
        if self.modality == mod.TRAJECTORY and s['past'] < 2:
            raise InvalidConfig(field='shape.past', value=s['past'], reason='must be at least 2')
        if self.modality == mod.OBLIQUE:
            if s['views'] < 2:
                raise InvalidConfig(field='shape.views', value=s['views'], reason='must be at least 2')
            if s['height'] % s['grid'][0] or s['width'] % s['grid'][1]:
                raise InvalidConfig(field='shape.grid', value=s['grid'], reason='must divide the view size')
        if self.modality == mod.VIDEO and (s['width'] < 6 or s['height'] < 2 or s['frames'] < 2):
            raise InvalidConfig(field='shape', value=s, reason='video needs at least 2 frames of 2x6 pixels')
        if self.modality in (mod.RGB, mod.MSI, mod.SAR) and (s['height'] < 2 or s['width'] < 2):
            raise InvalidConfig(field='shape', value=s, reason='images need at least 2x2 pixels')

    def serialize(self):
        d = OrderedDict()
        d['modality'] = self.modality
        d['task'] = self.task
        d['num_classes'] = self.num_classes
        d['samples'] = self.samples
        d['seed'] = self.seed
        d['noise'] = self.noise
        d['shape'] = OrderedDict(sorted(self.shape.items()))
        return d

    @classmethod
    def deserialize(cls, d):
        return cls(**d)

def head_kind(task):
    if task == CLASSIFY:
        return heads.CLASSIFY
    if task == TEXT_GENERATE:
        return heads.TEXT_DECODE
    if task == DEPTH:
        return heads.DEPTH
    return heads.REGRESS

#################
# Label assignment
def _balanced_labels(rng, n, k):
    labels = np.arange(n) % k
    rng.shuffle(labels)
    return labels

def _uniform_noise(rng, noise, size):
    return rng.uniform(-noise, noise, size=size)

#################
# Generators: (rng, spec, label) -> (payload, target)
def _quadrant_slices(H, W, q):
    rows = slice(0, H // 2) if q < 2 else slice(H // 2, H)
    cols = slice(0, W // 2) if q % 2 == 0 else slice(W // 2, W)
    return rows, cols

def _gen_quadrant_image(rng, spec, label):
    s = spec.shape
    C = { mod.RGB: 3, mod.MSI: s.get('channels'), mod.SAR: 2 }[spec.modality]
    image = rng.uniform(0.0, 0.1, size=(s['height'], s['width'], C))
    rows, cols = _quadrant_slices(s['height'], s['width'], label)
    image[rows, cols, :] += 1.0
    return image, int(label)

def _gen_hsi(rng, spec, label):
    bands = np.arange(spec.shape['channels'])
    spectrum = np.exp(-((bands - HSI_PEAKS[label]) / 8.0) ** 2) + rng.uniform(0.0, 0.05, size=bands.shape)
    return spectrum.reshape(1, 1, -1), int(label)

def _gen_text(rng, spec, label):
    words = POSITIVE_WORDS if label == 1 else NEGATIVE_WORDS
    picked = [words[rng.randint(len(words))], NEUTRAL_WORDS[rng.randint(len(NEUTRAL_WORDS))], words[rng.randint(len(words))]]
    return 'the %s %s was %s' % tuple(picked), int(label)

def _gen_code(rng, spec, label):
    names = rng.permutation(len(CODE_NAMES))[:2]
    a, b = CODE_NAMES[names[0]], CODE_NAMES[names[1]]
    op, verb = CODE_OPERATIONS[rng.randint(len(CODE_OPERATIONS))]
    return 'def f(%s, %s): return %s %s %s' % (a, b, a, op, b), '%s %s and %s' % (verb, a, b)

def _gen_table(rng, spec, label):
    row = np.zeros(len(TABLE_COLUMNS))
    for j, vocab in enumerate(TABLE_COLUMNS):
        if vocab:
            row[j] = rng.randint(vocab)
        else:
            row[j] = rng.normal(0.0, 1.0)
    target = table_rule(row) + _uniform_noise(rng, spec.noise, ())
    return row, np.array([target])

def _gen_trajectory(rng, spec, label):
    l, T = spec.shape['past'], spec.shape['future']
    start = rng.uniform(-2.0, 2.0, size=2)
    velocity = rng.uniform(-0.5, 0.5, size=2)
    past = start + velocity * np.arange(l)[:, None] + _uniform_noise(rng, spec.noise, (l, 2))
    future = trajectory_rule(past, T) + _uniform_noise(rng, spec.noise, (T, 2))
    return past, future.reshape(-1)

def _gen_graph(rng, spec, label):
    K = spec.shape['nodes']
    previous = rng.uniform(0.0, 1.0, size=K)
    current = previous + rng.uniform(-0.2, 0.2, size=K)
    features = np.stack([current, previous], axis=1)
    payload = mod.GraphPayload(features, rng.randint(spec.shape['timesteps']))
    return payload, graph_rule(payload) + _uniform_noise(rng, spec.noise, K)

def _gen_infrared(rng, spec, label):
    H, W = spec.shape['height'], spec.shape['width']
    bh, bw = max(H * 3 // 8, 1), max(W * 3 // 8, 1)
    top, left = rng.randint(H - bh + 1), rng.randint(W - bw + 1)
    frames = rng.uniform(0.0, 0.2, size=(2, H, W, 3))
    frames[0, top:top + bh, left:left + bw, label] += 0.8
    frames[1, top:top + bh, left:left + bw, :] += 0.3 * (label + 1)
    return frames, int(label)

def _gen_oblique(rng, spec, label):
    s = spec.shape
    V, H, W = s['views'], s['height'], s['width']
    gh, gw = s['grid']
    depth = rng.uniform(1.0, 3.0, size=(gh, gw))
    cells = np.kron(depth, np.ones((H // gh, W // gw)))
    views = np.zeros((V, H, W, 3))
    # the nadir view shows depth/4 exactly; the others are shifted and noisy
    views[0] = (cells / 4.0)[:, :, None]
    for v in range(1, V):
        views[v] = (np.roll(cells, v, axis=1) / 4.0 * (1.0 - 0.05 * v))[:, :, None] + \
                _uniform_noise(rng, spec.noise, (H, W, 3))
    return views, depth.reshape(-1)

def _gen_video(rng, spec, label):
    s = spec.shape
    T, H, W = s['frames'], s['height'], s['width']
    size = 2
    travel = T - 1
    span = W - size - travel
    if span < 1:
        travel = W - size - 1
        span = 1
    y = rng.randint(H - size + 1)
    x0 = rng.randint(span)
    video = rng.uniform(0.0, 0.1, size=(T, 3, H, W))
    for t in range(T):
        step = int(round(t * travel / float(max(T - 1, 1))))
        # class 0 moves right, class 1 moves left
        x = x0 + step if label == 0 else x0 + travel - step
        video[t, :, y:y + size, x:x + size] += 1.0
    return video, int(label)

def _gen_pointcloud(rng, spec, label):
    K = spec.shape['points']
    if label == SPHERE:
        pts = rng.normal(size=(K, 3))
        pts /= np.sqrt(np.sum(pts * pts, axis=1))[:, None]
    elif label == CUBE:
        pts = rng.uniform(-1.0, 1.0, size=(K, 3))
        axis = rng.randint(3, size=K)
        side = np.where(rng.uniform(size=K) < 0.5, -1.0, 1.0)
        pts[np.arange(K), axis] = side
    else:
        pts = np.zeros((K, 3))
        pts[:, :2] = rng.uniform(-1.0, 1.0, size=(K, 2))
    return pts + _uniform_noise(rng, spec.noise, (K, 3)), int(label)

_GENERATORS = {
        mod.TEXT: _gen_text,
        mod.CODE: _gen_code,
        mod.RGB: _gen_quadrant_image,
        mod.MSI: _gen_quadrant_image,
        mod.HSI: _gen_hsi,
        mod.TABLE: _gen_table,
        mod.TRAJECTORY: _gen_trajectory,
        mod.SAR: _gen_quadrant_image,
        mod.INFRARED: _gen_infrared,
        mod.GRAPH: _gen_graph,
        mod.OBLIQUE: _gen_oblique,
        mod.VIDEO: _gen_video,
        mod.POINTCLOUD: _gen_pointcloud,
}

def generate_samples(spec):
    '''Deterministic samples and targets of spec: a list of ModalitySample
    and a parallel list of targets (int class, float array or text).'''

    rng = np.random.RandomState(spec.seed)
    if spec.task == CLASSIFY:
        labels = _balanced_labels(rng, spec.samples, spec.num_classes)
    else:
        labels = [None] * spec.samples
    samples = []
    targets = []
    for label in labels:
        payload, target = _GENERATORS[spec.modality](rng, spec, label)
        samples.append(mod.ModalitySample(spec.modality, payload).validate())
        targets.append(target)
    _logger.info('Generated %d %s sample(s) for the %s task' % (spec.samples, spec.modality, spec.task))
    return samples, targets

#################
# Planted rules, recomputed from payloads alone
def table_rule(row):
    return float(np.dot(TABLE_WEIGHTS, np.asarray(row, dtype=np.float64)))

def trajectory_rule(past, T):
    '''Constant-velocity extrapolation of the last observed step.'''

    past = np.asarray(past, dtype=np.float64)
    step = past[-1] - past[-2]
    return past[-1] + step * np.arange(1, T + 1)[:, None]

def graph_rule(payload):
    current, previous = payload.features[:, 0], payload.features[:, 1]
    return current + 0.5 * (current - previous)

def quadrant_rule(image):
    H, W = image.shape[:2]
    energy = [np.sum(image[_quadrant_slices(H, W, q)]) for q in range(4)]
    return int(np.argmax(energy))

def hsi_rule(pixel):
    peak = int(np.argmax(np.reshape(pixel, -1)))
    return int(np.argmin([abs(peak - c) for c in HSI_PEAKS]))

def text_rule(s):
    if not isinstance(s, str):
        s = codecs.decode(s, 'utf-8')
    words = s.split()
    score = sum(1 for w in words if w in POSITIVE_WORDS) - sum(1 for w in words if w in NEGATIVE_WORDS)
    return 1 if score > 0 else 0

def code_rule(s):
    if not isinstance(s, str):
        s = codecs.decode(s, 'utf-8')
    m = _CODE_RE.match(s)
    if m is None:
        raise ValueError('Not a generated function: %r' % s)
    verb = dict(CODE_OPERATIONS)[m.group(4)]
    return '%s %s and %s' % (verb, m.group(3), m.group(5))

def infrared_rule(frames):
    return int(np.argmax(np.mean(frames[0], axis=(0, 1))))

def oblique_rule(views, grid):
    gh, gw = grid
    H, W = views.shape[1:3]
    corners = views[0, ::H // gh, ::W // gw, 0]
    return (corners * 4.0).reshape(-1)

def video_rule(video):
    '''0 if the bright square moves right, 1 otherwise.'''

    def centroid(frame):
        cols = np.nonzero(np.mean(frame, axis=0) > 0.5)[1]
        return np.mean(cols)

    return 0 if centroid(video[-1]) > centroid(video[0]) else 1

def pointcloud_rule(cloud):
    pts = np.asarray(cloud, dtype=np.float64)[:, :3]
    if np.max(np.abs(pts[:, 2])) <= 0.1:
        return PLANE
    radii = np.sqrt(np.sum(pts * pts, axis=1))
    if np.std(radii) < 0.1:
        return SPHERE
    return CUBE

def planted_target(spec, sample):
    '''The noise-free target the planted rule assigns to sample.'''

    m = spec.modality
    p = sample.payload
    if m in (mod.RGB, mod.MSI, mod.SAR):
        return quadrant_rule(p)
    if m == mod.HSI:
        return hsi_rule(p)
    if m == mod.TEXT:
        return text_rule(p)
    if m == mod.CODE:
        return code_rule(p)
    if m == mod.TABLE:
        return np.array([table_rule(p)])
    if m == mod.TRAJECTORY:
        return trajectory_rule(p, spec.shape['future']).reshape(-1)
    if m == mod.GRAPH:
        return graph_rule(p)
    if m == mod.INFRARED:
        return infrared_rule(p)
    if m == mod.OBLIQUE:
        return oblique_rule(p, spec.shape['grid'])
    if m == mod.VIDEO:
        return video_rule(p)
    return pointcloud_rule(p)
