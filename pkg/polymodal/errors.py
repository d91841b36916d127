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

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

EXIT_CONTRACT = 1
EXIT_IO = 2

class PolymodalError(Exception):
    _abstract = True
    code = None
    description_template = '%(code)s'
    required_params = []
    exit_code = EXIT_CONTRACT

    def __init__(self, **kwargs):
        if self._abstract:
            raise TypeError('Only subclasses may be instantiated.')

        self.template_kwargs = { 'code': self.code }
        for param in self.required_params:
            try:
                self.template_kwargs[param] = kwargs[param]
            except KeyError:
                raise TypeError('The "%s" keyword argument is required for instantiation.' % param)
        super(PolymodalError, self).__init__(self.description)

    def __str__(self):
        return self.description

    def __eq__(self, other):
        return self.__class__ == other.__class__ and self.params == other.params

    def __hash__(self):
        return id(self)

    @property
    def params(self):
        return [self.template_kwargs[p] for p in self.required_params]

    @property
    def description(self):
        return self.description_template % self.template_kwargs

    def serialize(self):
        d = OrderedDict()
        d['description'] = self.description
        d['code'] = self.code
        return d

class ContractError(PolymodalError):
    exit_code = EXIT_CONTRACT

class DataIOError(PolymodalError):
    exit_code = EXIT_IO

#################
# Shapes
class ShapeError(ContractError):
    pass

class DimensionMismatch(ShapeError):
    '''
    >>> e = DimensionMismatch(op='matmul', dims_a=[2, 3], dims_b=[2, 3])
    >>> e.params
    ['matmul', [2, 3], [2, 3]]
    >>> e.description
    'Operation matmul received incompatible dims [2, 3] and [2, 3].'
    '''

    _abstract = False
    code = 'DIMENSION_MISMATCH'
    description_template = 'Operation %(op)s received incompatible dims %(dims_a)s and %(dims_b)s.'
    required_params = ['op', 'dims_a', 'dims_b']

class TokenWidthMismatch(ShapeError):
    '''
    >>> e = TokenWidthMismatch(modality='rgb', expected=16, actual=8)
    >>> e.description
    'Token width 8 of the rgb sequence does not match the bridge key/value input width 16.'
    '''

    _abstract = False
    code = 'TOKEN_WIDTH_MISMATCH'
    description_template = 'Token width %(actual)d of the %(modality)s sequence does not match the bridge key/value input width %(expected)d.'
    required_params = ['modality', 'expected', 'actual']

class EmptyTokenSequence(ShapeError):
    '''
    >>> EmptyTokenSequence(modality='text').description
    'The text token sequence is empty; at least one token is required.'
    '''

    _abstract = False
    code = 'EMPTY_TOKEN_SEQUENCE'
    description_template = 'The %(modality)s token sequence is empty; at least one token is required.'
    required_params = ['modality']

class ContextOverflow(ShapeError):
    '''
    >>> ContextOverflow(length=130, context=128).description
    'The assembled sequence length (130) exceeds the configured context (128).'
    '''

    _abstract = False
    code = 'CONTEXT_OVERFLOW'
    description_template = 'The assembled sequence length (%(length)d) exceeds the configured context (%(context)d).'
    required_params = ['length', 'context']

class HeadShapeMismatch(ShapeError):
    '''
    >>> HeadShapeMismatch(kind='classify', expected=[64, 4], actual=[64, 3]).description
    'The classify head expects weights with dims [64, 4] but received [64, 3].'
    '''

    _abstract = False
    code = 'HEAD_SHAPE_MISMATCH'
    description_template = 'The %(kind)s head expects weights with dims %(expected)s but received %(actual)s.'
    required_params = ['kind', 'expected', 'actual']

class ZeroSizedTensor(ShapeError):
    '''
    >>> ZeroSizedTensor(dims=[0, 4]).description
    'Tensor dims must all be positive, but are [0, 4].'
    '''

    _abstract = False
    code = 'ZERO_SIZED_TENSOR'
    description_template = 'Tensor dims must all be positive, but are %(dims)s.'
    required_params = ['dims']

class LayerOutOfRange(ShapeError):
    '''
    >>> LayerOutOfRange(layer=3, layers=2).description
    'Layer 3 is out of range for a stack of 2 layer(s).'
    '''

    _abstract = False
    code = 'LAYER_OUT_OF_RANGE'
    description_template = 'Layer %(layer)d is out of range for a stack of %(layers)d layer(s).'
    required_params = ['layer', 'layers']

class VocabularyOverflow(ShapeError):
    '''
    >>> VocabularyOverflow(index=300, vocab_size=260).description
    'Index 300 is outside the vocabulary of size 260.'
    '''

    _abstract = False
    code = 'VOCABULARY_OVERFLOW'
    description_template = 'Index %(index)d is outside the vocabulary of size %(vocab_size)d.'
    required_params = ['index', 'vocab_size']

#################
# Numerics
class NumericError(ContractError):
    pass

class NonFiniteValue(NumericError):
    '''
    >>> NonFiniteValue(op='softmax_rows').description
    'Operation softmax_rows produced or received a non-finite value (NaN or Inf).'
    '''

    _abstract = False
    code = 'NON_FINITE_VALUE'
    description_template = 'Operation %(op)s produced or received a non-finite value (NaN or Inf).'
    required_params = ['op']

class NonScalarLoss(NumericError):
    '''
    >>> NonScalarLoss(dims=[2, 2]).description
    'The loss passed to backward must be a scalar, but has dims [2, 2].'
    '''

    _abstract = False
    code = 'NON_SCALAR_LOSS'
    description_template = 'The loss passed to backward must be a scalar, but has dims %(dims)s.'
    required_params = ['dims']

class DisconnectedLoss(NumericError):
    '''
    >>> DisconnectedLoss().description
    'The loss is not connected to the computation tape.'
    '''

    _abstract = False
    code = 'DISCONNECTED_LOSS'
    description_template = 'The loss is not connected to the computation tape.'

class NonDeterministicForward(NumericError):
    '''
    >>> NonDeterministicForward(first=1.0, second=1.5).description
    'Two baseline evaluations of the forward closure differ (1.0 != 1.5).'
    '''

    _abstract = False
    code = 'NON_DETERMINISTIC_FORWARD'
    description_template = 'Two baseline evaluations of the forward closure differ (%(first)r != %(second)r).'
    required_params = ['first', 'second']

class NonFiniteGradient(NumericError):
    '''
    >>> NonFiniteGradient(group='bridge').description
    'A non-finite gradient was found in parameter group "bridge".'
    '''

    _abstract = False
    code = 'NON_FINITE_GRADIENT'
    description_template = 'A non-finite gradient was found in parameter group "%(group)s".'
    required_params = ['group']

class NonFiniteLoss(NumericError):
    '''
    >>> NonFiniteLoss(step=12, modality='sar').description
    'The loss became non-finite at step 12 (modality: sar).'
    '''

    _abstract = False
    code = 'NON_FINITE_LOSS'
    description_template = 'The loss became non-finite at step %(step)d (modality: %(modality)s).'
    required_params = ['step', 'modality']

#################
# Payloads
class PayloadError(ContractError):
    pass

class UnknownModality(PayloadError):
    '''
    >>> UnknownModality(modality='lidar').description
    'Unknown modality: "lidar".'
    '''

    _abstract = False
    code = 'UNKNOWN_MODALITY'
    description_template = 'Unknown modality: "%(modality)s".'
    required_params = ['modality']

class PayloadShapeMismatch(PayloadError):
    '''
    >>> PayloadShapeMismatch(modality='sar', expected='HxWx2', actual=[8, 8, 3]).description
    'The sar payload must have shape HxWx2, but has dims [8, 8, 3].'
    '''

    _abstract = False
    code = 'PAYLOAD_SHAPE_MISMATCH'
    description_template = 'The %(modality)s payload must have shape %(expected)s, but has dims %(actual)s.'
    required_params = ['modality', 'expected', 'actual']

class InsufficientChannels(PayloadError):
    '''
    >>> InsufficientChannels(channels=3).description
    'A multispectral payload needs more than 3 channels, but has 3.'
    '''

    _abstract = False
    code = 'INSUFFICIENT_CHANNELS'
    description_template = 'A multispectral payload needs more than 3 channels, but has %(channels)d.'
    required_params = ['channels']

class InsufficientViews(PayloadError):
    '''
    >>> InsufficientViews(views=1).description
    'An oblique payload needs at least 2 views, but has 1.'
    '''

    _abstract = False
    code = 'INSUFFICIENT_VIEWS'
    description_template = 'An oblique payload needs at least 2 views, but has %(views)d.'
    required_params = ['views']

class InsufficientPoints(PayloadError):
    '''
    >>> InsufficientPoints(points=4, required=8).description
    'The point cloud has 4 point(s), but grouping requires at least 8.'
    '''

    _abstract = False
    code = 'INSUFFICIENT_POINTS'
    description_template = 'The point cloud has %(points)d point(s), but grouping requires at least %(required)d.'
    required_params = ['points', 'required']

class TubeExceedsVideo(PayloadError):
    '''
    >>> TubeExceedsVideo(axis='T', extent=6, size=4).description
    'The tube extent along T (6) exceeds the video extent (4).'
    '''

    _abstract = False
    code = 'TUBE_EXCEEDS_VIDEO'
    description_template = 'The tube extent along %(axis)s (%(extent)d) exceeds the video extent (%(size)d).'
    required_params = ['axis', 'extent', 'size']

#################
# Configuration and schedules
class ConfigError(ContractError):
    pass

class InvalidConfig(ConfigError):
    '''
    >>> InvalidConfig(field='schedule.max_lr', value=-1, reason='must be positive').description
    'Invalid value for schedule.max_lr (-1): must be positive.'
    '''

    _abstract = False
    code = 'INVALID_CONFIG'
    description_template = 'Invalid value for %(field)s (%(value)r): %(reason)s.'
    required_params = ['field', 'value', 'reason']

class StepOutOfRange(ConfigError):
    '''
    >>> StepOutOfRange(step=300, total_steps=300).description
    'Step 300 is outside the schedule of 300 step(s).'
    '''

    _abstract = False
    code = 'STEP_OUT_OF_RANGE'
    description_template = 'Step %(step)d is outside the schedule of %(total_steps)d step(s).'
    required_params = ['step', 'total_steps']

#################
# Metrics
class MetricError(ContractError):
    pass

class LengthMismatch(MetricError):
    '''
    >>> LengthMismatch(metric='ade', length_a=12, length_b=8).description
    'The inputs to ade have mismatched lengths (12 and 8).'
    '''

    _abstract = False
    code = 'LENGTH_MISMATCH'
    description_template = 'The inputs to %(metric)s have mismatched lengths (%(length_a)d and %(length_b)d).'
    required_params = ['metric', 'length_a', 'length_b']

class EmptyInput(MetricError):
    '''
    >>> EmptyInput(metric='pag').description
    'The input to pag is empty.'
    '''

    _abstract = False
    code = 'EMPTY_INPUT'
    description_template = 'The input to %(metric)s is empty.'
    required_params = ['metric']

class ZeroTargetVariance(MetricError):
    '''
    >>> ZeroTargetVariance().description
    'R-squared is undefined because the targets have zero variance.'
    '''

    _abstract = False
    code = 'ZERO_TARGET_VARIANCE'
    description_template = 'R-squared is undefined because the targets have zero variance.'

class LabelOutOfRange(MetricError):
    '''
    >>> LabelOutOfRange(label=5, num_classes=4).description
    'Label 5 is outside the range of 4 classes.'
    '''

    _abstract = False
    code = 'LABEL_OUT_OF_RANGE'
    description_template = 'Label %(label)d is outside the range of %(num_classes)d classes.'
    required_params = ['label', 'num_classes']

class ItemNotRanked(MetricError):
    '''
    >>> ItemNotRanked(item='doc-3').description
    'The correct item (doc-3) does not appear in the ranked results.'
    '''

    _abstract = False
    code = 'ITEM_NOT_RANKED'
    description_template = 'The correct item (%(item)s) does not appear in the ranked results.'
    required_params = ['item']

#################
# Files
class MalformedContainer(DataIOError):
    '''
    >>> MalformedContainer(path='x.stt', reason='bad magic').description
    'The tensor container x.stt is malformed: bad magic.'
    '''

    _abstract = False
    code = 'MALFORMED_CONTAINER'
    description_template = 'The tensor container %(path)s is malformed: %(reason)s.'
    required_params = ['path', 'reason']

class HashMismatch(DataIOError):
    '''
    >>> HashMismatch(path='labels.csv', expected='ab', actual='cd').description
    'The content hash of labels.csv (cd) does not match the manifest (ab).'
    '''

    _abstract = False
    code = 'HASH_MISMATCH'
    description_template = 'The content hash of %(path)s (%(actual)s) does not match the manifest (%(expected)s).'
    required_params = ['path', 'expected', 'actual']

class MissingFile(DataIOError):
    '''
    >>> MissingFile(path='manifest.json').description
    'The file manifest.json could not be read.'
    '''

    _abstract = False
    code = 'MISSING_FILE'
    description_template = 'The file %(path)s could not be read.'
    required_params = ['path']

class MalformedRecord(DataIOError):
    '''
    >>> MalformedRecord(path='prompts.tsv', line=3, reason='expected 3 fields').description
    'Malformed record in prompts.tsv, line 3: expected 3 fields.'
    '''

    _abstract = False
    code = 'MALFORMED_RECORD'
    description_template = 'Malformed record in %(path)s, line %(line)d: %(reason)s.'
    required_params = ['path', 'line', 'reason']
