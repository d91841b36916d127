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
import sys

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

from polymodal import training
from polymodal.gradcheck import STENCIL_FIVE_POINT, STENCILS

from . import common

logging.basicConfig(level=logging.WARNING, format='%(message)s')
logger = logging.getLogger()

def usage(err=None):
    if err is not None:
        err += '\n\n'
    else:
        err = ''
    sys.stderr.write('''%sUsage: %s %s [options]

Compare the analytic gradient of one synthetic sample's loss with finite
differences, over randomly chosen trainable scalars of the whole pipeline.
Exits 1 if the largest relative error reaches the tolerance (1e-6 in 64-bit
mode, 1e-4 in 32-bit mode).

Options:
    -m <modality>  - Modality of the pipeline (required unless in --config).
    -n <count>     - Number of scalars to check (default: 100).
    --precision <bits>
                   - Floating-point precision: 64 (default) or 32.
    --epsilon <x>  - Finite-difference step.
    --stencil <name>
                   - Finite-difference stencil: five-point (default) or central.
%s''' % (err, sys.argv[0], __name__.split('.')[-1], common.COMMON_OPTIONS_USAGE))

def _main(argv):
    opts, args = common.getopts(argv, 'm:n:', ['modality=', 'samples=', 'precision=', 'epsilon=', 'stencil='], usage)
    for long_opt, short in (('--modality', '-m'), ('--samples', '-n')):
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
    precision = common.int_opt(opts, '--precision', 64)
    if precision not in training.GRADCHECK_TOLERANCES:
        sys.stderr.write('The precision must be 32 or 64: "%s"\n' % opts['--precision'])
        sys.exit(1)
    seed = common.int_opt(opts, '--seed', config.get('seed', 0))
    samples = common.int_opt(opts, '-n', 100, minimum=1)
    epsilon = common.float_opt(opts, '--epsilon', training.GRADCHECK_EPSILONS[precision])
    stencil = opts.get('--stencil', STENCIL_FIVE_POINT)
    if stencil not in STENCILS:
        sys.stderr.write('The stencil must be one of %s: "%s"\n' % (', '.join(STENCILS), stencil))
        sys.exit(1)

    run = training.RunConfig(modality=modality, preset=opts.get('--preset', config.get('preset', 'desk')),
            seed=seed, precision=precision, model=config.get('model', {}), freeze=config.get('freeze', {}),
            prompts=config.get('prompts'))
    report = training.check_pipeline_gradients(run, samples=samples, epsilon=epsilon, stencil=stencil)

    d = OrderedDict()
    d['modality'] = run.modality
    d['precision'] = precision
    d.update(report.serialize())
    common.write_json_stdout(d)
    if not report.passed:
        logger.error('Gradient check failed: max relative error %.3e' % report.max_rel_err)
        sys.exit(1)

def main(argv):
    common.run(_main, argv)

if __name__ == "__main__":
    main(sys.argv)
