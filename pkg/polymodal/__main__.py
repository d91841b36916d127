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

import sys

from polymodal.commands import main

main(sys.argv)
