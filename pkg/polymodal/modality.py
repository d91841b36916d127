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

import numpy as np

from .errors import EmptyTokenSequence, InsufficientChannels, InsufficientViews, \
        PayloadShapeMismatch, UnknownModality
from . import format as fmt

_logger = logging.getLogger(__name__)

TEXT = 'text'
CODE = 'code'
RGB = 'rgb'
MSI = 'msi'
HSI = 'hsi'
TABLE = 'table'
TRAJECTORY = 'trajectory'
SAR = 'sar'
INFRARED = 'infrared'
GRAPH = 'graph'
OBLIQUE = 'oblique'
VIDEO = 'video'
POINTCLOUD = 'pointcloud'

MODALITIES = (TEXT, CODE, RGB, MSI, HSI, TABLE, TRAJECTORY, SAR, INFRARED, GRAPH, OBLIQUE, VIDEO, POINTCLOUD)

TEXTUAL = (TEXT, CODE)
# expected payload layout, as shown in error messages
PAYLOAD_LAYOUTS = {
        TEXT: 'bytes',
        CODE: 'bytes',
        RGB: 'HxWx3',
        MSI: 'HxWxC (C>3)',
        HSI: '1x1xC',
        TABLE: 'columns',
        TRAJECTORY: 'lx2',
        SAR: 'HxWx2',
        INFRARED: '2xHxWx3',
        GRAPH: 'KxF plus timestep',
        OBLIQUE: 'VxHxWx3',
        VIDEO: 'TxCxHxW',
        POINTCLOUD: 'Kx(3+d_feat)',
}

def check_modality(tag):
    if tag not in MODALITIES:
        raise UnknownModality(modality=tag)
    return tag

class GraphPayload(object):
    '''Node features at one timestep of a spatio-temporal graph.'''

    def __init__(self, features, timestep):
        self.features = np.asarray(features)
        self.timestep = int(timestep)

    @property
    def shape(self):
        return self.features.shape

class ModalitySample(object):
    def __init__(self, tag, payload):
        self.tag = check_modality(tag)
        if tag in TEXTUAL and not isinstance(payload, bytes):
            payload = codecs.encode(payload, 'utf-8')
        self.payload = payload

    def __repr__(self):
        return '<ModalitySample %s %s>' % (self.tag, self.payload_dims_str())

    def payload_dims(self):
        if self.tag in TEXTUAL:
            return [len(self.payload)]
        return list(np.shape(self.payload))

    def payload_dims_str(self):
        return fmt.humanize_dims(self.payload_dims())

    def validate(self):
        validate_payload(self.tag, self.payload)
        return self

def _mismatch(tag, payload):
    return PayloadShapeMismatch(modality=tag, expected=PAYLOAD_LAYOUTS[tag], actual=list(np.shape(payload)))

def validate_payload(tag, payload):
    '''Check that payload matches the layout of its modality.'''

    check_modality(tag)
    if tag in TEXTUAL:
        if not isinstance(payload, bytes):
            raise _mismatch(tag, payload)
        return

    if tag == GRAPH:
        if not isinstance(payload, GraphPayload) or payload.features.ndim != 2 or payload.timestep < 0:
            raise PayloadShapeMismatch(modality=tag, expected=PAYLOAD_LAYOUTS[tag], actual=list(np.shape(getattr(payload, 'features', payload))))
        return

    shape = np.shape(payload)
    if tag in (RGB, MSI, SAR):
        if len(shape) != 3:
            raise _mismatch(tag, payload)
        if tag == RGB and shape[2] != 3:
            raise _mismatch(tag, payload)
        if tag == SAR and shape[2] != 2:
            raise _mismatch(tag, payload)
        if tag == MSI and shape[2] <= 3:
            raise InsufficientChannels(channels=shape[2])
    elif tag == HSI:
        if len(shape) != 3 or shape[0] != 1 or shape[1] != 1:
            raise _mismatch(tag, payload)
    elif tag == TABLE:
        if len(shape) != 1:
            raise _mismatch(tag, payload)
    elif tag == TRAJECTORY:
        if len(shape) != 2 or shape[1] != 2:
            raise _mismatch(tag, payload)
    elif tag == INFRARED:
        if len(shape) != 4 or shape[0] != 2 or shape[3] != 3:
            raise _mismatch(tag, payload)
    elif tag == OBLIQUE:
        if len(shape) != 4 or shape[3] != 3:
            raise _mismatch(tag, payload)
        if shape[0] < 2:
            raise InsufficientViews(views=shape[0])
    elif tag == VIDEO:
        if len(shape) != 4:
            raise _mismatch(tag, payload)
    elif tag == POINTCLOUD:
        if len(shape) != 2 or shape[1] < 3:
            raise _mismatch(tag, payload)

    if any(d == 0 for d in shape):
        raise _mismatch(tag, payload)
    if not np.all(np.isfinite(payload)):
        raise _mismatch(tag, payload)

class TokenSequence(object):
    '''The n x d token matrix an encoder produces for one sample.'''

    def __init__(self, tokens, modality):
        if tokens.data.ndim != 2 or tokens.shape[0] < 1:
            raise EmptyTokenSequence(modality=modality)
        self.tokens = tokens
        self.modality = modality

    def __repr__(self):
        return '<TokenSequence %s %dx%d>' % (self.modality, self.n, self.d)

    @property
    def n(self):
        return self.tokens.shape[0]

    @property
    def d(self):
        return self.tokens.shape[1]
