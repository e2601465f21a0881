# -*- coding: utf-8 -*-

import hashlib

import numpy as np

from chemoclust.utils import (
    dict_to_hdf5, file_checksum, format_float, hdf5_to_dict, parallel_map,
    trapezoid_weights, worker_count)


def test_hdf5_roundtrip(tmp_path):
    fn = str(tmp_path / 'run.h5')
    dct = {
        't': np.linspace(0, 1, 3),
        'meta': {'chi': 1., 'positions': np.eye(2)},
    }
    dict_to_hdf5(dct, fn)
    loaded = hdf5_to_dict(fn)
    assert sorted(loaded) == ['meta', 't'], 'wrong keys'
    assert (loaded['t'] == dct['t']).all(), 'wrong times'
    assert loaded['meta']['chi'] == 1., 'wrong scalar'
    assert (loaded['meta']['positions'] == np.eye(2)).all(), 'wrong array'


def test_worker_count_cap(monkeypatch):
    monkeypatch.setenv('THREADS', '2')
    assert worker_count(4) == 2, 'cap ignored'
    assert worker_count(1) == 1, 'cap raises the count'
    monkeypatch.setenv('THREADS', 'many')
    assert worker_count(3) == 3, 'malformed cap not ignored'
    monkeypatch.delenv('THREADS')
    assert worker_count(5) == 5, 'default ignored'
    assert worker_count() >= 1, 'no workers'


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert parallel_map(lambda i: i ** 2, items, 4) == [i ** 2 for i in items]
    assert parallel_map(lambda i: i, [], 4) == [], 'empty input'


def test_format_float():
    assert format_float(.1) == '0.10000000000000001', 'wrong digits'
    assert float(format_float(np.pi)) == np.pi, 'not round trip safe'


def test_file_checksum(tmp_path):
    fn = tmp_path / 'data.csv'
    fn.write_bytes(b'a,b\n1,2\n')
    assert file_checksum(str(fn)) == hashlib.sha256(b'a,b\n1,2\n').hexdigest()


def test_trapezoid_weights():
    x = np.array([0., .5, 2.])
    c = trapezoid_weights(x)
    assert np.allclose(c, [.25, 1., .75]), 'wrong weights'
    f = x ** 2 + 1
    assert np.allclose((c * f).sum(), np.trapz(f, x)), 'not the trapezoid rule'
