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
from multiprocessing.pool import ThreadPool

# minimal support for python2.6
try:
    from collections import OrderedDict
except ImportError:
    from ordereddict import OrderedDict

import numpy as np
import pandas as pd

from . import modality as mod
from . import stt
from . import synthetic
from .errors import HashMismatch, MalformedRecord
from .model import heads
from .util import atomic_write, csv_text, read_bytes, read_csv, read_json, sha256_file, write_json

_logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
LABELS_NAME = 'labels.csv'
SAMPLES_DIR = 'samples'
FORMAT_VERSION = 1

TRAJECTORY_COLUMNS = ['agent_id', 't', 'x', 'y']

class Dataset(object):
    '''Samples and targets of one synthetic task.'''

    def __init__(self, spec, samples, targets):
        self.spec = spec
        self.samples = list(samples)
        self.targets = list(targets)

    @classmethod
    def generate(cls, spec):
        samples, targets = synthetic.generate_samples(spec)
        return cls(spec, samples, targets)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(zip(self.samples, self.targets))

    @property
    def modality(self):
        return self.spec.modality

    @property
    def task(self):
        return self.spec.task

    def target_matrix(self):
        return np.stack([np.asarray(t, dtype=np.float64).reshape(-1) for t in self.targets])

    def candidates(self):
        '''Distinct text targets, sorted.'''

        return sorted(set(self.targets))

    def table_rows(self):
        return np.stack([s.payload for s in self.samples])

    def head_spec(self, pooling=heads.LAST_TOKEN):
        '''The head for this task.  Regression targets are normalised with
        the mean and standard deviation of these targets.'''

        task = self.task
        kind = synthetic.head_kind(task)
        if task == synthetic.CLASSIFY:
            return heads.HeadSpec(kind, num_classes=self.spec.num_classes, pooling=pooling)
        if task == synthetic.TEXT_GENERATE:
            max_len = max(len(t.encode('utf-8')) for t in self.targets)
            return heads.HeadSpec(kind, pooling=pooling, max_len=max_len)
        Y = self.target_matrix()
        mean = np.mean(Y, axis=0)
        std = np.std(Y, axis=0)
        std[std == 0] = 1.0
        if task == synthetic.DEPTH:
            return heads.HeadSpec(kind, grid=self.spec.shape['grid'], target_mean=mean, target_std=std, pooling=pooling)
        return heads.HeadSpec(kind, outputs=Y.shape[1], target_mean=mean, target_std=std, pooling=pooling)

#################
# Sample files
def sample_filename(modality, i):
    if modality in mod.TEXTUAL:
        ext = 'txt'
    elif modality in (mod.TABLE, mod.TRAJECTORY):
        ext = 'csv'
    else:
        ext = 'stt'
    return '%s/%04d.%s' % (SAMPLES_DIR, i, ext)

def table_columns(n):
    return ['c%d' % j for j in range(n)]

def _payload_bytes(sample):
    m = sample.tag
    p = sample.payload
    if m in mod.TEXTUAL:
        return p
    if m == mod.TABLE:
        return csv_text(pd.DataFrame([list(p)], columns=table_columns(len(p)))).encode('utf-8')
    if m == mod.TRAJECTORY:
        df = pd.DataFrame(OrderedDict((
            ('agent_id', np.zeros(len(p), dtype=np.int64)),
            ('t', np.arange(len(p))),
            ('x', p[:, 0]),
            ('y', p[:, 1]),
        )))
        return csv_text(df).encode('utf-8')
    if m == mod.GRAPH:
        return stt.to_bytes(p.features)
    return stt.to_bytes(p)

def _read_payload(modality, path, entry):
    if modality in mod.TEXTUAL:
        return read_bytes(path)
    if modality == mod.TABLE:
        df = read_csv(path, table_columns(len(synthetic.TABLE_COLUMNS)))
        if len(df) != 1:
            raise MalformedRecord(path=path, line=0, reason='expected exactly one row')
        return df.values[0].astype(np.float64)
    if modality == mod.TRAJECTORY:
        df = read_csv(path, TRAJECTORY_COLUMNS)
        if list(df['t']) != list(range(len(df))):
            raise MalformedRecord(path=path, line=0, reason='t must count from 0')
        return df[['x', 'y']].values.astype(np.float64)
    arr = stt.read(path)
    if modality == mod.GRAPH:
        return mod.GraphPayload(arr, entry['timestep'])
    return arr

#################
# Labels
def labels_frame(dataset):
    ids = ['%04d' % i for i in range(len(dataset))]
    task = dataset.task
    cols = OrderedDict([('sample', ids)])
    if task == synthetic.CLASSIFY:
        cols['label'] = [int(t) for t in dataset.targets]
    elif task == synthetic.TEXT_GENERATE:
        cols['target'] = list(dataset.targets)
    else:
        Y = dataset.target_matrix()
        for j in range(Y.shape[1]):
            cols['y%d' % j] = Y[:, j]
    return pd.DataFrame(cols)

def _read_labels(path, spec, count):
    task = spec.task
    if task == synthetic.TEXT_GENERATE:
        df = read_csv(path, ['sample', 'target'], dtype={ 'sample': str, 'target': str })
    else:
        df = read_csv(path, dtype={ 'sample': str })
    if len(df) != count or list(df.columns)[0] != 'sample':
        raise MalformedRecord(path=path, line=0, reason='expected %d labelled samples' % count)
    if task == synthetic.CLASSIFY:
        if list(df.columns) != ['sample', 'label']:
            raise MalformedRecord(path=path, line=1, reason='expected header sample,label')
        return [int(v) for v in df['label']]
    if task == synthetic.TEXT_GENERATE:
        return list(df['target'])
    Y = df[[c for c in df.columns if c != 'sample']].values.astype(np.float64)
    return [Y[i] for i in range(count)]

#################
# Directories
def write_dataset(path, dataset):
    '''Write a dataset directory: one file per sample, labels.csv and a
    manifest with the generating spec and a hash of every file.'''

    manifest = OrderedDict()
    manifest['format'] = FORMAT_VERSION
    manifest['spec'] = dataset.spec.serialize()
    entries = []
    for i, sample in enumerate(dataset.samples):
        filename = sample_filename(dataset.modality, i)
        filepath = os.path.join(path, filename)
        atomic_write(filepath, _payload_bytes(sample))
        entry = OrderedDict()
        entry['file'] = filename
        entry['dims'] = sample.payload_dims()
        if dataset.modality == mod.GRAPH:
            entry['timestep'] = sample.payload.timestep
        entry['sha256'] = sha256_file(filepath)
        entries.append(entry)
    labels_path = os.path.join(path, LABELS_NAME)
    atomic_write(labels_path, csv_text(labels_frame(dataset)))
    labels = OrderedDict()
    labels['file'] = LABELS_NAME
    labels['sha256'] = sha256_file(labels_path)
    manifest['labels'] = labels
    manifest['samples'] = entries
    write_json(os.path.join(path, MANIFEST_NAME), manifest)
    _logger.info('Wrote %d %s sample(s) to %s' % (len(dataset), dataset.modality, path))

def _check_hash(path, expected):
    actual = sha256_file(path)
    if actual != expected:
        raise HashMismatch(path=path, expected=expected, actual=actual)

def read_dataset(path, workers=1):
    '''Read a dataset directory written by write_dataset(), verifying every
    file against the manifest.  Sample files are loaded by up to workers
    threads.'''

    manifest_path = os.path.join(path, MANIFEST_NAME)
    manifest = read_json(manifest_path)
    try:
        spec = synthetic.SyntheticTaskSpec.deserialize(manifest['spec'])
        entries = manifest['samples']
        labels_entry = manifest['labels']
    except (KeyError, TypeError) as e:
        raise MalformedRecord(path=manifest_path, line=0, reason='missing field %s' % e)
    if len(entries) != spec.samples:
        raise MalformedRecord(path=manifest_path, line=0, reason='%d sample entries for %d samples' % (len(entries), spec.samples))

    def _load(entry):
        filepath = os.path.join(path, entry['file'])
        _check_hash(filepath, entry['sha256'])
        payload = _read_payload(spec.modality, filepath, entry)
        return mod.ModalitySample(spec.modality, payload).validate()

    if workers > 1:
        pool = ThreadPool(workers)
        try:
            samples = pool.map(_load, entries)
        finally:
            pool.close()
            pool.join()
    else:
        samples = [_load(entry) for entry in entries]

    labels_path = os.path.join(path, labels_entry['file'])
    _check_hash(labels_path, labels_entry['sha256'])
    targets = _read_labels(labels_path, spec, len(samples))
    _logger.info('Read %d %s sample(s) from %s' % (len(samples), spec.modality, path))
    return Dataset(spec, samples, targets)
