# -*- coding: utf-8 -*-

"""Writers for the artifacts of a run and console reporting."""

import csv
import logging
import os
import sys

import numpy as np

from chemoclust.utils import file_checksum, format_float


logger = logging.getLogger(__name__)


def format_value(value):
    """Format a value for CSV cells and summary lines.

    Floats use 17 significant digits, booleans are written as ``true`` and
    ``false``, sequences as comma separated lists.
    """
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (int, np.integer)):
        return '%i' % value
    if isinstance(value, (tuple, list, np.ndarray)):
        return ','.join(format_value(i) for i in value)
    return str(value)


def write_csv(fn, header, rows):
    """Write ``rows`` below ``header`` to ``fn`` and return the row count."""
    n_rows = 0
    with open(fn, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(i) for i in row])
            n_rows += 1
    logger.debug('wrote %i rows to %s', n_rows, fn)
    return n_rows


class OneLinePrinter(object):
    """OneLinePrinter class.

    Attributes
    ----------

    keys : list of strings
        For each entry in this list, the corresponding key will be taken from
        the info dictionary and printed as one tab separated line.
    """

    def __init__(self, keys, stream=None):
        self.keys = keys
        self.stream = sys.stdout if stream is None else stream
        self.printed_header = False

    def __call__(self, info):
        if not self.printed_header:
            print('\t'.join(self.keys), file=self.stream)
            self.printed_header = True
        print('\t'.join(format_value(info.get(key, '?')) for key in self.keys),
              file=self.stream)


class KeyPrinter(object):
    """KeyPrinter class.

    Prints one ``key = value`` line per key.

    Attributes
    ----------

    keys : list of strings
        For each entry in this list, the corresponding key will be taken from
        the info dictionary and printed.
    """

    def __init__(self, keys, stream=None):
        self.keys = keys
        self.stream = sys.stdout if stream is None else stream

    def __call__(self, info):
        for key in self.keys:
            print('%s = %s' % (key, format_value(info.get(key, '?'))),
                  file=self.stream)


class RunSummary(object):
    """Collects the emitted files and the outcomes of a run.

    The summary is written as ``key = value`` lines; every file gets an
    entry ``file.<name>`` with its row count and sha256 checksum.
    """

    def __init__(self, output_dir):
        self.output_dir = output_dir
        self.files = []
        self.info = {}
        self.keys = []

    def path(self, name):
        return os.path.join(self.output_dir, name)

    def __setitem__(self, key, value):
        if key not in self.info:
            self.keys.append(key)
        self.info[key] = value

    def __getitem__(self, key):
        return self.info[key]

    def __contains__(self, key):
        return key in self.info

    def update(self, dct):
        for k in sorted(dct):
            self[k] = dct[k]

    def csv(self, name, header, rows):
        """Write a CSV file into the output directory and declare it."""
        n_rows = write_csv(self.path(name), header, rows)
        self.declare(name, n_rows)
        return n_rows

    def declare(self, name, n_rows):
        self.files.append((name, n_rows))

    def write(self, name='summary.txt'):
        """Write the summary and return its path."""
        for fname, n_rows in self.files:
            key = 'file.%s' % fname
            if key not in self.info:
                self.keys.append(key)
            self.info[key] = 'rows=%i sha256=%s' % (
                n_rows, file_checksum(self.path(fname)))
        fn = self.path(name)
        with open(fn, 'w', newline='') as fp:
            KeyPrinter(self.keys, fp)(self.info)
        logger.info('wrote summary of %i files to %s', len(self.files), fn)
        return fn


def read_summary(fn):
    """Read a summary written by ``RunSummary.write`` into a dictionary of
    strings."""
    info = {}
    with open(fn) as fp:
        for line in fp:
            if ' = ' in line:
                key, value = line.rstrip('\n').split(' = ', 1)
                info[key] = value
    return info
