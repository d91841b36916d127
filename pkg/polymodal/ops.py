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

import math
import numbers

import numpy as np

from .errors import DimensionMismatch, LabelOutOfRange, NonFiniteValue, VocabularyOverflow
from .tensor import Tensor, as_tensor, record_op

GELU_C = math.sqrt(2.0 / math.pi)
GELU_A = 0.044715
LAYER_NORM_VAR_FLOOR = 1e-5

def _check_dims(op, a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(op=op, dims_a=a.dims, dims_b=b.dims)

#################
# Elementwise arithmetic
def add(a, b):
    a = as_tensor(a)
    if isinstance(b, numbers.Number):
        return record_op('add', (a,), a.data + b, lambda g: (g,))
    b = as_tensor(b)
    if b.data.ndim == 0 and a.data.ndim > 0:
        return record_op('add', (a, b), a.data + b.data, lambda g: (g, np.sum(g)))
    if a.data.ndim == 0 and b.data.ndim > 0:
        return add(b, a)
    _check_dims('add', a, b)
    return record_op('add', (a, b), a.data + b.data, lambda g: (g, g))

def sub(a, b):
    if isinstance(b, numbers.Number):
        return add(a, -b)
    return add(a, mul(b, -1.0))

def mul(a, b):
    a = as_tensor(a)
    if isinstance(b, numbers.Number):
        return record_op('mul', (a,), a.data * b, lambda g: (g * b,))
    b = as_tensor(b)
    if b.data.ndim == 0 and a.data.ndim > 0:
        return record_op('mul', (a, b), a.data * b.data,
                lambda g: (g * b.data, np.sum(g * a.data)))
    if a.data.ndim == 0 and b.data.ndim > 0:
        return mul(b, a)
    _check_dims('mul', a, b)
    return record_op('mul', (a, b), a.data * b.data, lambda g: (g * b.data, g * a.data))

def square(x):
    return mul(x, x)

def tanh(x):
    y = np.tanh(x.data)
    return record_op('tanh', (x,), y, lambda g: (g * (1.0 - y * y),))

#################
# Linear algebra and shape
def matmul(a, b):
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(op='matmul', dims_a=a.dims, dims_b=b.dims)

    def _backward(g):
        return (np.matmul(g, b.data.T), np.matmul(a.data.T, g))

    return record_op('matmul', (a, b), np.matmul(a.data, b.data), _backward)

def transpose(x):
    if x.data.ndim != 2:
        raise DimensionMismatch(op='transpose', dims_a=x.dims, dims_b='rank 2')
    return record_op('transpose', (x,), np.ascontiguousarray(x.data.T), lambda g: (g.T,))

def reshape(x, dims):
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != x.data.size:
        raise DimensionMismatch(op='reshape', dims_a=x.dims, dims_b=list(dims))
    shape = x.shape
    return record_op('reshape', (x,), x.data.reshape(dims), lambda g: (g.reshape(shape),))

def sum_all(x):
    shape = x.shape
    return record_op('sum', (x,), np.sum(x.data), lambda g: (np.full(shape, g, dtype=x.data.dtype),))

def mean_all(x):
    return mul(sum_all(x), 1.0 / x.data.size)

def mean_pool(x, axis, keepdims=False):
    '''Average over one axis.'''

    if axis < 0 or axis >= x.data.ndim:
        raise DimensionMismatch(op='mean_pool', dims_a=x.dims, dims_b='axis %d' % axis)
    n = x.shape[axis]
    shape = x.shape

    def _backward(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / n, shape).copy(),)

    return record_op('mean_pool', (x,), np.mean(x.data, axis=axis, keepdims=keepdims), _backward)

def concat(tensors, axis):
    tensors = [as_tensor(t) for t in tensors]
    ref = tensors[0]
    for t in tensors[1:]:
        if t.data.ndim != ref.data.ndim or \
                any(t.shape[i] != ref.shape[i] for i in range(ref.data.ndim) if i != axis):
            raise DimensionMismatch(op='concat', dims_a=ref.dims, dims_b=t.dims)
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def _backward(g):
        grads = []
        for i in range(len(tensors)):
            index = [slice(None)] * g.ndim
            index[axis] = slice(bounds[i], bounds[i + 1])
            grads.append(g[tuple(index)])
        return grads

    return record_op('concat', tuple(tensors), np.concatenate([t.data for t in tensors], axis=axis), _backward)

def take_rows(x, indices):
    indices = np.asarray(indices, dtype=np.int64)
    shape = x.shape

    def _backward(g):
        gx = np.zeros(shape, dtype=g.dtype)
        np.add.at(gx, indices, g)
        return (gx,)

    return record_op('take_rows', (x,), x.data[indices], _backward)

def slice_rows(x, start, stop):
    return take_rows(x, np.arange(start, stop))

def slice_cols(x, start, stop):
    if x.data.ndim != 2 or not (0 <= start < stop <= x.shape[1]):
        raise DimensionMismatch(op='slice_cols', dims_a=x.dims, dims_b='columns %d:%d' % (start, stop))
    shape = x.shape

    def _backward(g):
        gx = np.zeros(shape, dtype=g.dtype)
        gx[:, start:stop] = g
        return (gx,)

    return record_op('slice_cols', (x,), np.ascontiguousarray(x.data[:, start:stop]), _backward)

#################
# Neural primitives
def add_row(x, b):
    '''Add a length-n vector to every row of an m x n matrix.'''

    if x.data.ndim != 2 or b.data.ndim != 1 or b.shape[0] != x.shape[1]:
        raise DimensionMismatch(op='add_row', dims_a=x.dims, dims_b=b.dims)
    return record_op('add_row', (x, b), x.data + b.data, lambda g: (g, np.sum(g, axis=0)))

def linear(x, W, b=None):
    y = matmul(x, W)
    if b is not None:
        y = add_row(y, b)
    return y

def softmax_rows(x, mask=None):
    '''Row-wise softmax, stabilized by subtracting the row maximum.  Entries
    where mask is False receive probability zero; every row must keep at least
    one entry.'''

    if x.data.ndim != 2:
        raise DimensionMismatch(op='softmax_rows', dims_a=x.dims, dims_b='rank 2')
    if not np.all(np.isfinite(x.data)):
        raise NonFiniteValue(op='softmax_rows')
    data = x.data
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != x.shape:
            raise DimensionMismatch(op='softmax_rows', dims_a=x.dims, dims_b=list(mask.shape))
        data = np.where(mask, data, -np.inf)
    e = np.exp(data - np.max(data, axis=1, keepdims=True))
    y = e / np.sum(e, axis=1, keepdims=True)

    def _backward(g):
        return (y * (g - np.sum(g * y, axis=1, keepdims=True)),)

    return record_op('softmax_rows', (x,), y, _backward)

def layer_norm(x, gamma=None, beta=None):
    '''Normalize each row to zero mean and unit variance.  The variance is
    floored at LAYER_NORM_VAR_FLOOR, so a constant row maps to zeros.'''

    if x.data.ndim != 2:
        raise DimensionMismatch(op='layer_norm', dims_a=x.dims, dims_b='rank 2')
    mu = np.mean(x.data, axis=1, keepdims=True)
    centered = x.data - mu
    var = np.mean(centered * centered, axis=1, keepdims=True)
    floored = var < LAYER_NORM_VAR_FLOOR
    inv = 1.0 / np.sqrt(np.maximum(var, LAYER_NORM_VAR_FLOOR))
    xhat = centered * inv

    def _backward(g):
        gmean = np.mean(g, axis=1, keepdims=True)
        gxmean = np.where(floored, 0.0, np.mean(g * xhat, axis=1, keepdims=True))
        return (inv * (g - gmean - xhat * gxmean),)

    y = record_op('layer_norm', (x,), xhat, _backward)
    if gamma is not None:
        if gamma.data.ndim != 1 or gamma.shape[0] != x.shape[1]:
            raise DimensionMismatch(op='layer_norm', dims_a=x.dims, dims_b=gamma.dims)
        y = record_op('scale_cols', (y, gamma), y.data * gamma.data,
                lambda g, y=y: (g * gamma.data, np.sum(g * y.data, axis=0)))
    if beta is not None:
        y = add_row(y, beta)
    return y

def gelu(x):
    '''Gaussian error linear unit, tanh approximation.'''

    v = x.data
    inner = GELU_C * (v + GELU_A * v * v * v)
    t = np.tanh(inner)
    y = 0.5 * v * (1.0 + t)

    def _backward(g):
        dinner = GELU_C * (1.0 + 3.0 * GELU_A * v * v)
        return (g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * dinner),)

    return record_op('gelu', (x,), y, _backward)

def embedding_lookup(table, indices):
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    vocab = table.shape[0]
    bad = indices[(indices < 0) | (indices >= vocab)]
    if bad.size:
        raise VocabularyOverflow(index=int(bad[0]), vocab_size=vocab)
    return take_rows(table, indices)

def _out_size(size, k, stride, pad, op, x, kernels):
    out = (size + 2 * pad - k) // stride + 1
    if k > size + 2 * pad or out < 1:
        raise DimensionMismatch(op=op, dims_a=x.dims, dims_b=kernels.dims)
    return out

def conv1d(x, kernels, stride=1, pad=0, bias=None):
    '''x: C_in x L, kernels: C_out x C_in x k.  Zero padding of pad cells on
    both ends.'''

    if x.data.ndim != 2 or kernels.data.ndim != 3 or kernels.shape[1] != x.shape[0]:
        raise DimensionMismatch(op='conv1d', dims_a=x.dims, dims_b=kernels.dims)
    c_in, length = x.shape
    c_out, _, k = kernels.shape
    out_len = _out_size(length, k, stride, pad, 'conv1d', x, kernels)
    xp = np.pad(x.data, ((0, 0), (pad, pad)))
    span = stride * (out_len - 1) + 1

    y = np.zeros((c_out, out_len), dtype=np.result_type(x.data, kernels.data))
    for i in range(k):
        y += np.matmul(kernels.data[:, :, i], xp[:, i:i + span:stride])

    def _backward(g):
        gk = np.zeros_like(kernels.data)
        gxp = np.zeros_like(xp)
        for i in range(k):
            gk[:, :, i] = np.matmul(g, xp[:, i:i + span:stride].T)
            gxp[:, i:i + span:stride] += np.matmul(kernels.data[:, :, i].T, g)
        return (gxp[:, pad:pad + length], gk)

    out = record_op('conv1d', (x, kernels), y, _backward)
    if bias is not None:
        out = transpose(add_row(transpose(out), bias))
    return out

def conv2d(x, kernels, stride=1, pad=0, bias=None):
    '''x: C_in x H x W, kernels: C_out x C_in x kh x kw.  Zero padding of pad
    cells on every border.'''

    if x.data.ndim != 3 or kernels.data.ndim != 4 or kernels.shape[1] != x.shape[0]:
        raise DimensionMismatch(op='conv2d', dims_a=x.dims, dims_b=kernels.dims)
    c_in, height, width = x.shape
    c_out, _, kh, kw = kernels.shape
    out_h = _out_size(height, kh, stride, pad, 'conv2d', x, kernels)
    out_w = _out_size(width, kw, stride, pad, 'conv2d', x, kernels)
    xp = np.pad(x.data, ((0, 0), (pad, pad), (pad, pad)))
    span_h = stride * (out_h - 1) + 1
    span_w = stride * (out_w - 1) + 1

    y = np.zeros((c_out, out_h, out_w), dtype=np.result_type(x.data, kernels.data))
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, i:i + span_h:stride, j:j + span_w:stride]
            y += np.einsum('oc,chw->ohw', kernels.data[:, :, i, j], patch)

    def _backward(g):
        gk = np.zeros_like(kernels.data)
        gxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                patch = xp[:, i:i + span_h:stride, j:j + span_w:stride]
                gk[:, :, i, j] = np.einsum('ohw,chw->oc', g, patch)
                gxp[:, i:i + span_h:stride, j:j + span_w:stride] += \
                        np.einsum('oc,ohw->chw', kernels.data[:, :, i, j], g)
        return (gxp[:, pad:pad + height, pad:pad + width], gk)

    out = record_op('conv2d', (x, kernels), y, _backward)
    if bias is not None:
        flat = reshape(out, (c_out, out_h * out_w))
        flat = transpose(add_row(transpose(flat), bias))
        out = reshape(flat, (c_out, out_h, out_w))
    return out

#################
# Losses
def cross_entropy(logits, targets):
    '''Mean negative log-likelihood of integer targets under row-wise
    softmax(logits).'''

    if logits.data.ndim != 2:
        raise DimensionMismatch(op='cross_entropy', dims_a=logits.dims, dims_b='rank 2')
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    m, num_classes = logits.shape
    if targets.shape[0] != m:
        raise DimensionMismatch(op='cross_entropy', dims_a=logits.dims, dims_b=[int(targets.shape[0])])
    for t in targets:
        if t < 0 or t >= num_classes:
            raise LabelOutOfRange(label=int(t), num_classes=num_classes)
    shifted = logits.data - np.max(logits.data, axis=1, keepdims=True)
    logsumexp = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    logp = shifted - logsumexp
    rows = np.arange(m)
    loss = -np.sum(logp[rows, targets]) / m

    def _backward(g):
        grad = np.exp(logp)
        grad[rows, targets] -= 1.0
        return (grad * (g / m),)

    return record_op('cross_entropy', (logits,), np.asarray(loss, dtype=logits.data.dtype), _backward)

def mse(pred, target):
    '''Mean squared error against a constant target of identical dims.'''

    target = np.asarray(target.data if isinstance(target, Tensor) else target, dtype=pred.data.dtype)
    if target.shape != pred.shape:
        raise DimensionMismatch(op='mse', dims_a=pred.dims, dims_b=list(target.shape))
    diff = pred.data - target
    n = diff.size

    def _backward(g):
        return (diff * (2.0 * g / n),)

    return record_op('mse', (pred,), np.asarray(np.sum(diff * diff) / n, dtype=pred.data.dtype), _backward)
