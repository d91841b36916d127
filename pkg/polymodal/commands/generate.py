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
from polymodal import synthetic
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

Write a synthetic dataset whose labels follow a planted rule.

Options:
    -m <modality>  - Modality of the samples (required unless in --config).
    -n <count>     - Number of samples (default: 8).
    -k <classes>   - Number of classes, for classification tasks.
    --noise <x>    - Amplitude of the uniform payload noise (default: %s).
    -o <directory> - Write the dataset to the specified directory (default:
                     <modality>-data below $POLYMODAL_OUTPUT_ROOT or the
                     current directory).
%s''' % (err, sys.argv[0], __name__.split('.')[-1], synthetic.DEFAULT_NOISE, common.COMMON_OPTIONS_USAGE))

def _main(argv):
    opts, args = common.getopts(argv, 'm:n:k:o:', ['modality=', 'samples=', 'classes=', 'noise=', 'output='], usage)
    for long_opt, short in (('--modality', '-m'), ('--samples', '-n'), ('--classes', '-k'), ('--output', '-o')):
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
    modality = opts.get('-m', config.get('modality'))
    if modality is None:
        usage('A modality is required.')
        sys.exit(1)
    seed = common.int_opt(opts, '--seed', config.get('seed', 0))

    spec = synthetic.SyntheticTaskSpec(modality,
            num_classes=common.int_opt(opts, '-k', None, minimum=2),
            samples=common.int_opt(opts, '-n', 8, minimum=1),
            seed=seed,
            noise=common.float_opt(opts, '--noise', synthetic.DEFAULT_NOISE))

    if '-o' in opts:
        path = opts['-o']
    else:
        path = os.path.join(output_root(), '%s-data' % spec.modality)
    dataset.write_dataset(path, dataset.Dataset.generate(spec))
    logger.info('Wrote %d sample(s) to %s' % (spec.samples, path))

def main(argv):
    common.run(_main, argv)

if __name__ == "__main__":
    main(sys.argv)
