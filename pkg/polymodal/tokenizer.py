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
# Byte-level tokenizer: ids 0-255 are bytes, followed by four specials.
#

from __future__ import unicode_literals

import codecs


PAD = 256
BOS = 257
EOS = 258
SEP = 259
SPECIALS = (PAD, BOS, EOS, SEP)
VOCAB_SIZE = 260

def tokenize_text(s):
    '''
    >>> tokenize_text(b'ab')
    [97, 98]
    >>> tokenize_text('')
    []
    '''

    if not isinstance(s, bytes):
        s = codecs.encode(s, 'utf-8')
    return list(bytearray(s))

def detokenize(ids):
    '''Inverse of tokenize_text.  Special ids are dropped.'''

    return bytes(bytearray(i for i in ids if 0 <= i < 256))
