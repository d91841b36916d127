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

import getopt
import json
import logging
import sys

from polymodal.errors import ContractError, DataIOError, EXIT_CONTRACT, EXIT_IO
from polymodal.util import read_json

logger = logging.getLogger()

# options accepted by every command
COMMON_LONG_OPTIONS = ['seed=', 'preset=', 'config=', 'loglevel=', 'help']

COMMON_OPTIONS_USAGE = '''    --seed <n>     - Seed for every random choice.
    --preset <name>
                   - Model dimensions: desk (default) or paper.
    --config <filename>
                   - Read a run configuration (JSON) from a file.
    -l <loglevel>  - Log at the specified level: error, warning, info, debug.
    -h             - Display the usage and exit.
'''

def getopts(argv, short, long_opts, usage):
    '''getopt over argv[1:], with long options folded onto their short
    forms where one exists.  Returns (opts, args); unknown options print
    the error with the command's usage and exit 1.'''

    try:
        opts, args = getopt.getopt(argv[1:], short + 'l:h', long_opts + COMMON_LONG_OPTIONS)
    except getopt.GetoptError as e:
        usage(str(e))
        sys.exit(1)
    folded = []
    for opt, arg in opts:
        if opt == '--loglevel':
            opt = '-l'
        elif opt == '--help':
            opt = '-h'
        folded.append((opt, arg))
    return dict(folded), args

def set_loglevel(opts):
    if '-l' in opts:
        if opts['-l'] == 'error':
            loglevel = logging.ERROR
        elif opts['-l'] == 'warning':
            loglevel = logging.WARNING
        elif opts['-l'] == 'info':
            loglevel = logging.INFO
        elif opts['-l'] == 'debug':
            loglevel = logging.DEBUG
        else:
            sys.stderr.write('Invalid log level: "%s"\n' % opts['-l'])
            sys.exit(1)
    else:
        loglevel = logging.WARNING
    logger.setLevel(loglevel)

def int_opt(opts, name, default=None, minimum=None):
    if name not in opts:
        return default
    try:
        value = int(opts[name])
    except ValueError:
        sys.stderr.write('The value for %s must be an integer: "%s"\n' % (name, opts[name]))
        sys.exit(1)
    if minimum is not None and value < minimum:
        sys.stderr.write('The value for %s must be at least %d: "%s"\n' % (name, minimum, opts[name]))
        sys.exit(1)
    return value

def float_opt(opts, name, default=None):
    if name not in opts:
        return default
    try:
        return float(opts[name])
    except ValueError:
        sys.stderr.write('The value for %s must be a number: "%s"\n' % (name, opts[name]))
        sys.exit(1)

def read_config(opts):
    '''The --config file as a dict, or an empty dict.'''

    if '--config' not in opts:
        return {}
    d = read_json(opts['--config'])
    if not isinstance(d, dict):
        logger.error('The configuration must be a JSON object: "%s"' % opts['--config'])
        sys.exit(EXIT_CONTRACT)
    return dict(d)

def write_json_stdout(d):
    s = json.dumps(d, indent=4, separators=(',', ': '), ensure_ascii=False)
    sys.stdout.write(s + '\n')
    sys.stdout.flush()

def run(func, argv):
    '''Call func(argv), mapping errors to log messages and exit codes.'''

    try:
        func(argv)
    except ContractError as e:
        logger.error(e.description)
        sys.exit(EXIT_CONTRACT)
    except DataIOError as e:
        logger.error(e.description)
        sys.exit(EXIT_IO)
    except (IOError, OSError) as e:
        logger.error('%s: "%s"' % (e.strerror, e.filename))
        sys.exit(EXIT_IO)
    except KeyboardInterrupt:
        logger.error('Interrupted.')
        sys.exit(4)
