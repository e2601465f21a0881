#! /usr/bin/env python
# -*- coding: utf-8 -*-


__author__ = 'chemoclust developers'


from setuptools import setup, find_packages


setup(
    name="chemoclust",
    version="0.1.dev0",
    description="numerical workbench for one dimensional chemotactic "
                "aggregation",
    license="BSD",
    keywords="Keller-Segel, Chemotaxis, Lagrangian Particles, "
             "Conservation Laws",
    packages=find_packages(exclude=['examples*', 'docs*', 'tests*']),
    include_package_data=True,
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.6',
        'scikit-learn>=0.22',
        'h5py>=2.10',
    ],
    entry_points={
        'console_scripts': ['chemoclust = chemoclust.run.cli:main'],
    },
)
