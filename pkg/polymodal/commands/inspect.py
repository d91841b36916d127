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

from polymodal import dataset
from polymodal import synthetic
from polymodal import training
from polymodal.model.pipeline import PAPER, describe_shapes
from polymodal.prompts import EVAL, get_prompt_registry, select_prompt
from polymodal.tensor import no_grad

from . import common

logging.basicConfig(level=logging.WARNING, format='%(message)s')
logger = logging.getLogger()

def usage(err=None):
    if err is not None:
        err += '\n\n'
    else:
        err = ''
    sys.stderr.write('''%sUsage: %s %s [options]

Show the dims of one synthetic sample at every stage of the pipeline: payload,
token sequence, bridged tokens, prompt, assembled sequence and head output.
With the paper preset the dims are computed without building the model.

Options:
    -m <modality>  - Modality of the sample (required unless in --config).
%s''' % (err, sys.argv[0], __name__.split('.')[-1], common.COMMON_OPTIONS_USAGE))

def _main(argv):
    opts, args = common.getopts(argv, 'm:', ['modality='], usage)
    if '--modality' in opts:
        opts['-m'] = opts.pop('--modality')

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
    run = training.RunConfig(modality=modality, preset=opts.get('--preset', config.get('preset', 'desk')),
            seed=common.int_opt(opts, '--seed', config.get('seed', 0)), model=config.get('model', {}))

    data = dataset.Dataset.generate(synthetic.SyntheticTaskSpec(run.modality, samples=1, seed=run.seed))
    head_spec = data.head_spec(pooling=run.pooling)
    prompt = select_prompt(get_prompt_registry(config.get('prompts')), run.modality, EVAL)
    sample = data.samples[0]

    if run.preset == PAPER:
        d = describe_shapes(run.model_config(), sample, head_spec, prompt)
    else:
        model = training.build_model(run, head_spec)
        with no_grad():
            d = model.inspect(sample, prompt)
    common.write_json_stdout(d)

def main(argv):
    common.run(_main, argv)

if __name__ == "__main__":
    main(sys.argv)
