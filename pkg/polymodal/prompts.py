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

import io
import logging

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

from . import modality as mod
from .errors import InvalidConfig, MalformedRecord, MissingFile, UnknownModality
from .util import share_path

_logger = logging.getLogger(__name__)

TRAIN = 'train'
EVAL = 'eval'

PROMPTS_FILE = share_path('prompts', 'prompts.tsv')
NO_PROMPT = '-'

PROMPTS_STR_DEFAULT = '''
text	1	Please determine if this movie review is positive or negative?
code	1	-
rgb	1	This remote sensing image belongs to which of the following categories: [Category list of the NWPU dataset]
rgb	2	Describe this remote sensing image briefly
rgb	3	Find a word that is most relevant to this remote sensing image
rgb	4	Describe the key elements in this remote sensing image
msi	1	Based on the multi-spectral imagery feature description, please classify this object
msi	2	Given the following multi-spectral imagery characteristics, please output the most fitting scene label
hsi	1	Given the spectral information, can you help determine which class this pixel belongs to?
hsi	2	Here is the spectral data for a pixel. Considering the typical characteristics of land cover classes, could you provide a detailed analysis and suggest the most likely class for this pixel?
hsi	3	The spectral information for a pixel is given, but the data is noisy. Given the potential variability, which land cover classes should be considered as possible candidates for this pixel?
table	1	Please utilize the provided air quality indicators to accurately predict the concentrations of PM2.5 in the atmosphere
table	2	Given the air quality indicators, please provide a prediction for the PM2.5 levels at this particular moment
oblique	1	Please reconstruct the 3D model from the given images of five different views.
trajectory	1	Based on their past positions and movements in a crowded environment, predict the future trajectory of a selected pedestrian.
trajectory	2	Using the pedestrian trajectory data, along with additional information about the surrounding environment, predict the future path of the pedestrian.
trajectory	3	Given the current and past positions of a pedestrian and their neighboring pedestrians, predict the main pedestrian's trajectory
sar	1	Based on the SAR imagery feature description, please classify this object
sar	2	Given the following SAR imagery characteristics, please output the most fitting scene label
infrared	1	Given an infrared image of a person, find and highlight the same person in a set of visible light images, paying close attention to features like clothing, posture, and gait
infrared	2	Analyze the characteristics of a person in a visible light image, such as clothing texture, color, and body shape. Then, locate the person with matching features in a series of infrared images
graph	1	Given the current traffic data including vehicle flow rate, average speed, and time of day from the METRLA dataset, predict the traffic flow
graph	2	Analyze the historical data on vehicle speeds and flow rates from the METRLA dataset for the past week. Identify any patterns or trends and predict the traffic conditions
video	1	Please analyze this video and describe the characteristics of the action in detail
video	2	Watch this short clip and provide a step-by-step description of the action sequence
pointcloud	1	Classify the provided point cloud sample into the correct category
pointcloud	2	Look at the point cloud data characteristics and classify the object
pointcloud	3	Please analyze the given point cloud dataset and determine which category it belongs to. Focus on the shape and structure evident in the point cloud
'''

class PromptRegistry(object):
    '''Per-modality text prompts, in load order.  The code modality has no
    prompts.'''

    def __init__(self, prompts):
        self._prompts = OrderedDict((m, list(prompts.get(m, []))) for m in mod.MODALITIES)
        self._prompts[mod.CODE] = []

    def __contains__(self, modality):
        return modality in self._prompts

    def prompts(self, modality):
        if modality not in self._prompts:
            raise UnknownModality(modality=modality)
        return list(self._prompts[modality])

    def serialize(self):
        return OrderedDict((m, list(p)) for m, p in self._prompts.items())

    @classmethod
    def from_string(cls, s, path='<default>'):
        '''Parse modality<TAB>index<TAB>text records.  Blank lines and lines
        starting with # are skipped; a text of "-" declares a modality
        without prompts.'''

        prompts = OrderedDict()
        for i, line in enumerate(s.splitlines()):
            line = line.rstrip('\r')
            if not line.strip() or line.startswith('#'):
                continue
            fields = line.split('\t')
            if len(fields) != 3:
                raise MalformedRecord(path=path, line=i + 1, reason='expected 3 tab-separated fields')
            modality, index, text = fields
            if modality not in mod.MODALITIES:
                raise MalformedRecord(path=path, line=i + 1, reason='unknown modality "%s"' % modality)
            try:
                int(index)
            except ValueError:
                raise MalformedRecord(path=path, line=i + 1, reason='index is not an integer')
            prompts.setdefault(modality, [])
            if text != NO_PROMPT:
                prompts[modality].append(text)

        for modality in mod.MODALITIES:
            if modality != mod.CODE and not prompts.get(modality):
                raise MalformedRecord(path=path, line=0, reason='no prompt for modality "%s"' % modality)
        return cls(prompts)

    @classmethod
    def from_file(cls, path):
        with io.open(path, 'r', encoding='utf-8') as fh:
            return cls.from_string(fh.read(), path)

def get_prompt_registry(path=None):
    '''Load the registry from path, or from the installed prompts file,
    falling back to the built-in copy when the installed file cannot be
    read.'''

    if path is not None:
        try:
            return PromptRegistry.from_file(path)
        except IOError:
            raise MissingFile(path=path)
    try:
        return PromptRegistry.from_file(PROMPTS_FILE)
    except IOError:
        _logger.debug('Prompts file %s unreadable; using built-in prompts' % PROMPTS_FILE)
        return PromptRegistry.from_string(PROMPTS_STR_DEFAULT)

def select_prompt(registry, modality, mode, rng=None):
    '''Train mode draws uniformly from the modality's prompts with rng;
    Eval mode always returns the first prompt.  Modalities without prompts
    get the empty string.'''

    prompts = registry.prompts(modality)
    if not prompts:
        return ''
    if mode == EVAL:
        return prompts[0]
    if mode == TRAIN:
        return prompts[rng.randint(len(prompts))]
    raise InvalidConfig(field='mode', value=mode, reason='must be train or eval')
