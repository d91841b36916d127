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

import importlib
import sys

COMMANDS = ('generate', 'train', 'eval', 'gradcheck', 'inspect')

def usage(err=None):
    if err is not None:
        err += '\n\n'
    else:
        err = ''
    sys.stderr.write('''%sUsage: %s <command> [options]

Commands:
    generate       - Write a synthetic dataset for one modality.
    train          - Train a model on a dataset.
    eval           - Evaluate a checkpoint on a dataset.
    gradcheck      - Compare analytic and numeric gradients of a pipeline.
    inspect        - Show the dims at every stage of a pipeline.

Run "%s <command> -h" for the options of a command.
''' % (err, sys.argv[0], sys.argv[0]))

def main(argv):
    if len(argv) < 2:
        usage('No command given.')
        sys.exit(1)
    if argv[1] in ('-h', '--help', 'help'):
        usage()
        sys.exit(0)
    command = argv[1]
    if command not in COMMANDS:
        usage('Unknown command: "%s"' % command)
        sys.exit(1)
    mod = importlib.import_module('polymodal.commands.%s' % command)
    mod.main(argv[1:])
