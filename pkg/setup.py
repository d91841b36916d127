#!/usr/bin/env python

from __future__ import unicode_literals

import codecs
import os
import sys

try:
    import setuptools
except ImportError:
    from distutils.core import setup
    from distutils.command.install import install
else:
    from setuptools import setup
    from setuptools.command.install import install

def apply_substitutions(filename, install_prefix):
    assert filename.endswith('.in'), 'Filename supplied for customization must end with \'.in\': %s' % (filename)

    filename_out = filename[:-3]

    if os.path.exists(filename_out) and os.path.getctime(filename_out) > os.path.getctime(filename):
        return

    with open(filename, 'r') as in_fh:
        s = in_fh.read()

    s = s.replace('__POLYMODAL_INSTALL_PREFIX__', install_prefix)

    with open(filename_out, 'w') as out_fh:
        out_fh.write(s)

def create_config(prefix):
    # Create polymodal/config.py, so it exists for packages that don't
    # require calling install.  An empty install prefix makes the package
    # fall back to the in-tree share directory.
    apply_substitutions(os.path.join('polymodal', 'config.py.in'), prefix)
    # update the timestamp of config.py.in, so if/when the install command
    # is called, config.py will be rewritten, i.e., with the real install
    # prefix.
    os.utime(os.path.join('polymodal', 'config.py.in'), None)

class MyInstall(install):
    def run(self):
        # if this an alternate root is specified, then embed the install_data
        # path relative to that alternate root
        if self.root is not None:
            install_data = os.path.join(os.path.sep, os.path.relpath(self.install_data, self.root))
        else:
            install_data = self.install_data
        create_config(install_data)
        install.run(self)

DATA_FILES = [('share/polymodal/prompts', ['share/prompts/prompts.tsv'])]

if isinstance(b'', str):
    map_func = lambda x: x
else:
    map_func = lambda x: codecs.decode(x, 'latin1')

create_config('')
setup(name='polymodal',
        version='0.1.0',
        description='Desk-scale multimodal alignment tool suite',
        long_description='''polymodal encodes thirteen spatio-temporal modalities (text, code, optical,
multispectral, hyperspectral and SAR imagery, tables, trajectories, infrared
pairs, traffic graphs, oblique views, video and point clouds) into token
sequences, bridges them into a shared language width, and trains task heads on
a small prompt-conditioned backbone with adapters.  It ships its own
reverse-mode autodiff on numpy, gradient checking, synthetic datasets and
metrics.''',
        license='GPLv2+',
        packages=[map_func(b'polymodal'), map_func(b'polymodal.model'), map_func(b'polymodal.commands')],
        scripts=['bin/polymodal'],
        data_files=DATA_FILES,
        requires=[
                'numpy (>=1.17)',
                'pandas (>=1.5)',
        ],
        classifiers=[
                'Development Status :: 3 - Alpha',
                'Environment :: Console',
                'Intended Audience :: Science/Research',
                'License :: OSI Approved :: GNU General Public License v2 or later (GPLv2+)',
                'Natural Language :: English',
                'Operating System :: POSIX',
                'Programming Language :: Python :: 3',
                'Topic :: Scientific/Engineering :: Artificial Intelligence',
        ],
        cmdclass={ 'install': MyInstall },
)
