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

from .errors import NonDeterministicForward
from .tensor import backward, no_grad

_logger = logging.getLogger(__name__)

STENCIL_CENTRAL = 'central'
STENCIL_FIVE_POINT = 'five-point'
STENCILS = (STENCIL_CENTRAL, STENCIL_FIVE_POINT)

DEFAULT_EPSILON = 1e-4
DEFAULT_TOLERANCE = 1e-6
# analytic gradients smaller than this are compared on an absolute scale
DEFAULT_FLOOR = 1e-3

class GradCheckReport(object):
    def __init__(self, epsilon, tolerance, stencil):
        self.epsilon = epsilon
        self.tolerance = tolerance
        self.stencil = stencil
        self.entries = []
        # trainable scalars the samples were drawn from
        self.scalars = 0

    def add(self, name, index, analytic, numeric, rel_err):
        self.entries.append((name, index, analytic, numeric, rel_err))

    @property
    def samples(self):
        return len(self.entries)

    @property
    def max_rel_err(self):
        if not self.entries:
            return 0.0
        return max(e[4] for e in self.entries)

    @property
    def mean_rel_err(self):
        if not self.entries:
            return 0.0
        return sum(e[4] for e in self.entries) / len(self.entries)

    @property
    def worst(self):
        if not self.entries:
            return None
        return max(self.entries, key=lambda e: e[4])

    @property
    def passed(self):
        return self.max_rel_err < self.tolerance

    def serialize(self):
        d = OrderedDict()
        d['samples'] = self.samples
        d['scalars'] = self.scalars
        d['epsilon'] = self.epsilon
        d['tolerance'] = self.tolerance
        d['stencil'] = self.stencil
        d['max_rel_err'] = self.max_rel_err
        d['mean_rel_err'] = self.mean_rel_err
        worst = self.worst
        if worst is not None:
            d['worst'] = OrderedDict((('param', worst[0]), ('index', worst[1]),
                    ('analytic', worst[2]), ('numeric', worst[3])))
        d['passed'] = self.passed
        return d

def _named(params):
    if hasattr(params, 'items'):
        items = list(params.items())
    else:
        items = [(p.name if p.name is not None else 'param%d' % i, p) for i, p in enumerate(params)]
    return [(name, p) for name, p in items if p.requires_grad]

def relative_error(analytic, numeric, floor=DEFAULT_FLOOR):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)

def numeric_derivative(f, p, index, epsilon, stencil=STENCIL_CENTRAL):
    '''Finite-difference derivative of the scalar closure f with respect to
    p.data.flat[index].  p is restored exactly afterwards.'''

    flat = p.data.reshape(-1)
    original = flat[index]

    def at(offset):
        flat[index] = original + offset
        try:
            return f()
        finally:
            flat[index] = original

    if stencil == STENCIL_CENTRAL:
        return (at(epsilon) - at(-epsilon)) / (2.0 * epsilon)
    return (-at(2.0 * epsilon) + 8.0 * at(epsilon) - 8.0 * at(-epsilon) + at(-2.0 * epsilon)) / (12.0 * epsilon)

def grad_check(forward, params, samples=100, epsilon=DEFAULT_EPSILON, tolerance=DEFAULT_TOLERANCE,
        seed=0, stencil=STENCIL_CENTRAL, floor=DEFAULT_FLOOR):
    '''Compare the analytic gradient of forward() with finite differences on
    `samples` randomly chosen scalars of the trainable tensors in params.

    forward is a closure returning a scalar loss Tensor; it must be
    deterministic.  params is a mapping of name to Tensor or a sequence of
    Tensors; tensors without requires_grad are skipped.

    The central difference is the default.  STENCIL_FIVE_POINT cancels the
    third-order truncation term as well, leaving only rounding error; the
    whole-pipeline checks use it.'''

    if stencil not in STENCILS:
        raise ValueError('Unknown finite-difference stencil: %s' % stencil)
    named = _named(params)

    def value():
        with no_grad():
            return float(forward().item())

    first = value()
    second = value()
    if first != second:
        raise NonDeterministicForward(first=first, second=second)

    for name, p in named:
        p.zero_grad()
    backward(forward())
    analytic = dict((name, p.grad.copy().reshape(-1)) for name, p in named)

    sizes = [p.data.size for name, p in named]
    total = sum(sizes)
    rng = np.random.RandomState(seed)
    if samples >= total:
        picks = np.arange(total)
    else:
        picks = np.sort(rng.choice(total, size=samples, replace=False))
    offsets = np.cumsum([0] + sizes)

    report = GradCheckReport(epsilon, tolerance, stencil)
    report.scalars = total
    for flat_index in picks:
        which = int(np.searchsorted(offsets, flat_index, side='right') - 1)
        name, p = named[which]
        index = int(flat_index - offsets[which])
        a = float(analytic[name][index])
        n = float(numeric_derivative(value, p, index, epsilon, stencil))
        report.add(name, index, a, n, relative_error(a, n, floor))

    for name, p in named:
        p.zero_grad()

    _logger.info('Gradient check: %d sample(s), max relative error %.3e' % (report.samples, report.max_rel_err))
    return report
