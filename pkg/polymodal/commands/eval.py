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

from polymodal import dataset
from polymodal import training
from polymodal.errors import InvalidConfig
from polymodal.evaluation import evaluate
from polymodal.prompts import get_prompt_registry

from . import common

logging.basicConfig(level=logging.WARNING, format='%(message)s')
logger = logging.getLogger()

METRICS_JSON_NAME = 'metrics.json'
METRICS_CSV_NAME = 'metrics.csv'

def usage(err=None):
    if err is not None:
        err += '\n\n'
    else:
        err = ''
    sys.stderr.write('''%sUsage: %s %s [options]

Evaluate a checkpoint on a dataset with the first prompt of its modality.

Options:
    -c <directory> - Read the checkpoint from the specified directory.
    -d <directory> - Read the dataset from the specified directory (default:
                     the dataset the checkpoint was trained on).
    -o <directory> - Write %s and %s to the specified directory
                     (default: the checkpoint directory).
    --prompts <filename>
                   - Read prompts from the specified file.
%s''' % (err, sys.argv[0], __name__.split('.')[-1], METRICS_JSON_NAME, METRICS_CSV_NAME, common.COMMON_OPTIONS_USAGE))

def _main(argv):
    opts, args = common.getopts(argv, 'c:d:o:', ['checkpoint=', 'data=', 'output=', 'prompts='], usage)
    for long_opt, short in (('--checkpoint', '-c'), ('--data', '-d'), ('--output', '-o')):
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
    checkpoint = opts.get('-c', config.get('checkpoint'))
    if checkpoint is None:
        usage('A checkpoint directory is required.')
        sys.exit(1)

    run, model = training.load_checkpoint(checkpoint)
    data_path = opts.get('-d', config.get('data', run.data))
    if data_path is None:
        usage('A dataset directory is required.')
        sys.exit(1)
    data = dataset.read_dataset(data_path, workers=run.workers)
    if data.modality != run.modality:
        raise InvalidConfig(field='data', value=data_path, reason='holds %s samples, the checkpoint is for %s' % (data.modality, run.modality))

    registry = get_prompt_registry(opts.get('--prompts', config.get('prompts', run.prompts)))
    report = evaluate(model, data, registry)

    output = opts.get('-o', checkpoint)
    report.write(os.path.join(output, METRICS_JSON_NAME), os.path.join(output, METRICS_CSV_NAME))
    common.write_json_stdout(report.serialize())

def main(argv):
    common.run(_main, argv)

if __name__ == "__main__":
    main(sys.argv)
