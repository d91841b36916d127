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

import logging
import os
import sys

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

from polymodal import dataset
from polymodal import training
from polymodal.errors import InvalidConfig
from polymodal.util import output_root

from . import common

logging.basicConfig(level=logging.WARNING, format='%(message)s')
logger = logging.getLogger()

def usage(err=None):
    if err is not None:
        err += '\n\n'
    else:
        err = ''
    sys.stderr.write('''%sUsage: %s %s [options]

Train the bridge, adapters, head and unfrozen encoder of a model on a dataset.

Options:
    -d <directory> - Read the dataset from the specified directory.
    -m <modality>  - Expected modality of the dataset.
    -o <directory> - Write the checkpoint and loss curve to the specified
                     directory (default: <modality>-run below
                     $POLYMODAL_OUTPUT_ROOT or the current directory).
    --precision <bits>
                   - Floating-point precision: 32 (default) or 64.
    --prompts <filename>
                   - Read prompts from the specified file.
%s''' % (err, sys.argv[0], __name__.split('.')[-1], common.COMMON_OPTIONS_USAGE))

def _main(argv):
    opts, args = common.getopts(argv, 'd:m:o:', ['data=', 'modality=', 'output=', 'precision=', 'prompts='], usage)
    for long_opt, short in (('--data', '-d'), ('--modality', '-m'), ('--output', '-o')):
        if long_opt in opts:
            opts[short] = opts.pop(long_opt)

    if '-h' in opts:
        usage()
        sys.exit(0)
    if args:
        usage('Too many arguments.')
        sys.exit(1)
    common.set_loglevel(opts)

    config = common.read_config(opts)
    if '-d' in opts:
        config['data'] = opts['-d']
    if config.get('data') is None:
        usage('A dataset directory is required.')
        sys.exit(1)
    if '--seed' in opts:
        config['seed'] = common.int_opt(opts, '--seed')
    if '--preset' in opts:
        config['preset'] = opts['--preset']
    if '--precision' in opts:
        config['precision'] = common.int_opt(opts, '--precision')
    if '--prompts' in opts:
        config['prompts'] = opts['--prompts']

    data = dataset.read_dataset(config['data'], workers=config.get('workers', 1))
    config.setdefault('modality', opts.get('-m', data.modality))
    if '-m' in opts and opts['-m'] != config['modality']:
        raise InvalidConfig(field='modality', value=opts['-m'], reason='the configuration names %s' % config['modality'])
    if config['modality'] != data.modality:
        raise InvalidConfig(field='modality', value=config['modality'], reason='the dataset holds %s samples' % data.modality)
    if '-o' in opts:
        config['output'] = opts['-o']
    elif config.get('output') is None:
        config['output'] = os.path.join(output_root(), '%s-run' % data.modality)

    run = training.RunConfig(**config)
    result = training.train(run, data)

    d = OrderedDict()
    d['modality'] = run.modality
    d['steps'] = len(result.losses)
    d['initial_loss'] = result.losses[0]
    d['final_loss'] = result.losses[-1]
    d['checkpoint'] = result.checkpoint
    common.write_json_stdout(d)

def main(argv):
    common.run(_main, argv)

if __name__ == "__main__":
    main(sys.argv)
