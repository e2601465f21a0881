# -*- coding: utf-8 -*-

"""Assorted helpers shared by the modules of the package."""

import concurrent.futures
import hashlib
import logging
import os

import h5py
import numpy as np


logger = logging.getLogger(__name__)


def dict_to_hdf5(dct, fn, mode='w'):
    """Write a possibly nested dictionary of arrays to the hdf5 file ``fn``."""
    with h5py.File(fn, mode) as fp:
        add_to_hdf5(dct, fp)


def add_to_hdf5(dct, grp):
    for k, v in dct.items():
        if isinstance(v, dict):
            g = grp.create_group(k)
            add_to_hdf5(v, g)
        else:
            grp.create_dataset(k, data=v)


def hdf5_to_dict(fn):
    """Read an hdf5 file written by ``dict_to_hdf5`` back into a dictionary."""
    def visit(grp):
        return dict((k, visit(v) if isinstance(v, h5py.Group) else v[()])
                    for k, v in grp.items())
    with h5py.File(fn, 'r') as fp:
        return visit(fp)


def worker_count(default=None):
    """Return the number of worker threads.

    The environment variable ``THREADS`` caps the count; without it the
    number of CPUs is used.
    """
    n = default or os.cpu_count() or 1
    cap = os.environ.get('THREADS')
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            logger.warning('ignoring malformed THREADS=%r', cap)
    return n


def parallel_map(func, items, n_workers=None):
    """Apply ``func`` to every item, keeping the order of ``items``.

    Results do not depend on the number of workers.
    """
    items = list(items)
    n_workers = worker_count(n_workers)
    if n_workers <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with concurrent.futures.ThreadPoolExecutor(n_workers) as pool:
        return list(pool.map(func, items))


def format_float(x):
    """Format a float with 17 significant digits."""
    return '%.17g' % x


def file_checksum(fn):
    """Return the sha256 hex digest of the file ``fn``."""
    digest = hashlib.sha256()
    with open(fn, 'rb') as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def trapezoid_weights(x):
    """Return weights ``c`` so that ``(c * f).sum()`` is the trapezoid rule."""
    x = np.asarray(x, dtype=float)
    c = np.zeros_like(x)
    dx = np.diff(x)
    c[:-1] += .5 * dx
    c[1:] += .5 * dx
    return c
