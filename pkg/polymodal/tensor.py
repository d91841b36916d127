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

import contextlib
import logging
import threading

import numpy as np

from .errors import DisconnectedLoss, NonFiniteValue, NonScalarLoss, ZeroSizedTensor

_logger = logging.getLogger(__name__)

PRECISION_DTYPES = { 32: np.float32, 64: np.float64 }

_precision = 32
_state = threading.local()

#################
# Precision
def get_precision():
    return _precision

def set_precision(bits):
    global _precision
    if bits not in PRECISION_DTYPES:
        raise ValueError('Unsupported precision: %r (choose 32 or 64)' % (bits,))
    _precision = bits

def default_dtype():
    return PRECISION_DTYPES[_precision]

@contextlib.contextmanager
def precision(bits):
    '''Switch the default tensor precision for the duration of the block.
    Gradient checks run inside precision(64).'''

    previous = get_precision()
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(previous)

#################
# Per-thread tape state
def _thread_state():
    if not hasattr(_state, 'tape'):
        _state.tape = ComputationTape()
        _state.grad_enabled = True
    return _state

def get_tape():
    return _thread_state().tape

def grad_enabled():
    return _thread_state().grad_enabled

@contextlib.contextmanager
def no_grad():
    '''Operations executed inside the block are not recorded on the tape.'''

    state = _thread_state()
    previous = state.grad_enabled
    state.grad_enabled = False
    try:
        yield
    finally:
        state.grad_enabled = previous

class TapeNode(object):
    __slots__ = ('op', 'inputs', 'output', 'backward_fn')

    def __init__(self, op, inputs, output, backward_fn):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn

    def __repr__(self):
        return '<TapeNode %s %s>' % (self.op, self.output.dims)

class ComputationTape(object):
    '''An ordered record of the primitive operations executed on this thread.
    Nodes are appended as operations run, so every node's inputs were produced
    before it.  One tape exists per thread; tapes are never shared.'''

    def __init__(self):
        self.nodes = []

    def __len__(self):
        return len(self.nodes)

    def record(self, node):
        self.nodes.append(node)

    def clear(self):
        for node in self.nodes:
            node.output._node = None
        self.nodes = []

    def backward(self, loss):
        if loss.data.size != 1:
            raise NonScalarLoss(dims=loss.dims)

        if loss._node is None:
            if loss.requires_grad:
                loss.grad += np.ones_like(loss.data)
                return
            raise DisconnectedLoss()

        _logger.debug('Backward pass over %d tape node(s)...' % len(self.nodes))

        grads = { id(loss): np.ones_like(loss.data) }
        for node in reversed(self.nodes):
            g = grads.pop(id(node.output), None)
            if g is None:
                continue
            input_grads = node.backward_fn(g)
            for inp, ig in zip(node.inputs, input_grads):
                if ig is None:
                    continue
                if inp._node is not None:
                    key = id(inp)
                    if key in grads:
                        grads[key] = grads[key] + ig
                    else:
                        grads[key] = ig
                elif inp.requires_grad:
                    inp.grad += ig

        self.clear()

def backward(loss):
    '''Populate .grad on every requires_grad tensor reachable from loss.
    Gradients accumulate across calls until zero_grad() is called; the tape is
    cleared afterwards.'''

    get_tape().backward(loss)

#################
# Tensors
class Tensor(object):
    '''A dense row-major array with optional gradient tracking.'''

    def __init__(self, data, requires_grad=False, name=None, dtype=None):
        if dtype is None:
            dtype = default_dtype()
        arr = np.array(data, dtype=dtype)
        if any(d <= 0 for d in arr.shape):
            raise ZeroSizedTensor(dims=list(arr.shape))
        self._init(arr, requires_grad, name)

    def _init(self, arr, requires_grad, name):
        self.data = arr
        self.requires_grad = requires_grad
        if requires_grad:
            self.grad = np.zeros_like(arr)
        else:
            self.grad = None
        self.name = name
        self._node = None

    @classmethod
    def wrap(cls, arr, requires_grad=False, name=None):
        obj = cls.__new__(cls)
        obj._init(arr, requires_grad, name)
        return obj

    def __repr__(self):
        if self.name is not None:
            return '<Tensor %s %s>' % (self.name, self.dims)
        return '<Tensor %s>' % (self.dims,)

    @property
    def dims(self):
        return list(self.data.shape)

    @property
    def shape(self):
        return self.data.shape

    @property
    def tracked(self):
        return self.requires_grad or self._node is not None

    def zero_grad(self):
        if self.requires_grad:
            self.grad[...] = 0

    def item(self):
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def copy(self):
        return Tensor(self.data.copy(), requires_grad=self.requires_grad, name=self.name, dtype=self.data.dtype)

    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from . import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

def as_tensor(x):
    if isinstance(x, Tensor):
        return x
    return Tensor(x)

def record_op(op, inputs, data, backward_fn):
    '''Wrap the result of a primitive and, when any input is tracked and
    recording is enabled, append its node to the thread's tape.'''

    data = np.asarray(data)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(op=op)
    out = Tensor.wrap(data)
    if grad_enabled() and any(t.tracked for t in inputs):
        node = TapeNode(op, inputs, out, backward_fn)
        out._node = node
        get_tape().record(node)
    return out
