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
import hashlib
import io
import json
import os
import tempfile

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import pandas as pd

from .errors import MalformedRecord, MissingFile

try:
    from .config import POLYMODAL_SHARE_PATH
except ImportError:
    POLYMODAL_SHARE_PATH = None

# source checkouts carry the data directory next to the package
_IN_TREE_SHARE_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'share')

OUTPUT_ROOT_ENV = 'POLYMODAL_OUTPUT_ROOT'

def share_path(*parts):
    if POLYMODAL_SHARE_PATH and os.path.isdir(POLYMODAL_SHARE_PATH):
        base = POLYMODAL_SHARE_PATH
    else:
        base = _IN_TREE_SHARE_PATH
    return os.path.join(base, *parts)

def output_root(path=None):
    '''The explicit path if given, else $POLYMODAL_OUTPUT_ROOT, else the
    current directory.'''

    if path is not None:
        return path
    return os.environ.get(OUTPUT_ROOT_ENV, os.curdir)

#################
# Files
def atomic_write(path, data):
    '''Write bytes (or text, as UTF-8) to path via a temporary file in the
    same directory followed by a rename.'''

    if not isinstance(data, bytes):
        data = codecs.encode(data, 'utf-8')
    dirname = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(dirname):
        os.makedirs(dirname)
    fd, tmp = tempfile.mkstemp(prefix='.tmp-', dir=dirname)
    try:
        with io.open(fd, 'wb') as fh:
            fh.write(data)
        os.rename(tmp, path)
    except:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise

def read_bytes(path):
    try:
        with io.open(path, 'rb') as fh:
            return fh.read()
    except IOError:
        raise MissingFile(path=path)

def read_text(path):
    return codecs.decode(read_bytes(path), 'utf-8')

def sha256_file(path):
    return hashlib.sha256(read_bytes(path)).hexdigest()

#################
# JSON
def dumps_json(d):
    return json.dumps(d, indent=4, separators=(',', ': '), ensure_ascii=False) + '\n'

def write_json(path, d):
    atomic_write(path, dumps_json(d))

def read_json(path):
    s = read_text(path)
    try:
        return json.loads(s, object_pairs_hook=OrderedDict)
    except ValueError as e:
        raise MalformedRecord(path=path, line=0, reason='invalid JSON: %s' % e)

#################
# CSV (comma separated, '.' decimal, LF line endings, header row)
def csv_text(df):
    return df.to_csv(index=False, lineterminator='\n')

def write_csv(path, df):
    atomic_write(path, csv_text(df))

def read_csv(path, columns=None, dtype=None):
    '''Read a CSV file with a header row.  Floats are parsed with round-trip
    precision so values written by write_csv read back unchanged.  If columns
    is given, the header must match it exactly.  Columns named in dtype are
    read verbatim with that type.'''

    if not os.path.exists(path):
        raise MissingFile(path=path)
    try:
        df = pd.read_csv(path, float_precision='round_trip', dtype=dtype, keep_default_na=dtype is None)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedRecord(path=path, line=0, reason=str(e).strip())
    if columns is not None and list(df.columns) != list(columns):
        raise MalformedRecord(path=path, line=1, reason='expected header %s' % ','.join(columns))
    if df.isnull().values.any():
        row = int(df.isnull().any(axis=1).values.nonzero()[0][0])
        raise MalformedRecord(path=path, line=row + 2, reason='missing value')
    return df
