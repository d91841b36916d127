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
# STT1 tensor container:
#   magic b'STT1', 1 byte dtype code, 1 byte rank r, r little-endian uint32
#   dims, then the row-major little-endian payload.
#

from __future__ import unicode_literals

import struct

import numpy as np

from .errors import MalformedContainer
from .util import atomic_write, read_bytes

MAGIC = b'STT1'

DTYPE_FLOAT32 = 0
DTYPE_FLOAT64 = 1
dtype_mapping = {
        DTYPE_FLOAT32: np.dtype('<f4'),
        DTYPE_FLOAT64: np.dtype('<f8'),
}

def _dtype_code(arr):
    if arr.dtype == np.float64:
        return DTYPE_FLOAT64
    return DTYPE_FLOAT32

def to_bytes(arr, dtype_code=None):
    arr = np.asarray(arr)
    if dtype_code is None:
        dtype_code = _dtype_code(arr)
    if dtype_code not in dtype_mapping:
        raise ValueError('Unknown STT1 dtype code: %r' % (dtype_code,))
    if arr.ndim < 1 or arr.ndim > 255:
        raise ValueError('STT1 tensors must have rank between 1 and 255, not %d' % arr.ndim)
    if any(d <= 0 for d in arr.shape):
        raise ValueError('STT1 dims must all be positive: %s' % (list(arr.shape),))
    header = MAGIC + struct.pack(b'<BB', dtype_code, arr.ndim) + \
            struct.pack(('<%dI' % arr.ndim).encode('ascii'), *arr.shape)
    payload = np.ascontiguousarray(arr, dtype=dtype_mapping[dtype_code]).tobytes()
    return header + payload

def from_bytes(s, path='<bytes>'):
    if len(s) < 6 or s[:4] != MAGIC:
        raise MalformedContainer(path=path, reason='bad magic')
    dtype_code, rank = struct.unpack(b'<BB', s[4:6])
    if dtype_code not in dtype_mapping:
        raise MalformedContainer(path=path, reason='unknown dtype code %d' % dtype_code)
    if rank < 1:
        raise MalformedContainer(path=path, reason='rank must be at least 1')
    end_dims = 6 + 4 * rank
    if len(s) < end_dims:
        raise MalformedContainer(path=path, reason='truncated dims')
    dims = struct.unpack(('<%dI' % rank).encode('ascii'), s[6:end_dims])
    if any(d == 0 for d in dims):
        raise MalformedContainer(path=path, reason='zero dim')
    dtype = dtype_mapping[dtype_code]
    expected = int(np.prod(dims)) * dtype.itemsize
    if len(s) - end_dims != expected:
        raise MalformedContainer(path=path, reason='payload has %d byte(s), expected %d' % (len(s) - end_dims, expected))
    return np.frombuffer(s[end_dims:], dtype=dtype).reshape(dims).copy()

def write(path, arr, dtype_code=None):
    atomic_write(path, to_bytes(arr, dtype_code))

def read(path):
    return from_bytes(read_bytes(path), path)
