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

#################
# Human representation of time
def _plural(n):
    if n != 1:
        return 's'
    return ''

def humanize_time(seconds):
    minutes, seconds = divmod(int(round(seconds)), 60)
    hours, minutes = divmod(minutes, 60)

    output = ''
    if hours > 0:
        output += '%d hour%s' % (hours, _plural(hours))
    if minutes > 0:
        if output:
            output += ', '
        output += '%d minute%s' % (minutes, _plural(minutes))
    if not output:
        output += '%d second%s' % (seconds, _plural(seconds))
    return output

#################
# Human representation of tensors
def humanize_dims(dims):
    '''
    >>> humanize_dims([32, 32, 3])
    '32x32x3'
    >>> humanize_dims([])
    'scalar'
    '''

    dims = list(dims)
    if not dims:
        return 'scalar'
    return 'x'.join('%d' % d for d in dims)

def format_float(x):
    '''Shortest text that reads back as the same float.

    >>> format_float(0.1)
    '0.1'
    >>> format_float(float('nan'))
    'nan'
    '''

    x = float(x)
    if math.isnan(x):
        return 'nan'
    return repr(x)

def format_lr(lr):
    return '%.3e' % lr
