#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup

setup(
    name="pedcross",
    version="0.0.1",
    description="Deterministic pedestrian crossing scenario generator",
    packages=["pedcross", "pedcross.algorithms", "pedcross.utils"],
    py_modules=["scenarios"],
    install_requires=["numpy", "scipy", "multiprocessing-logging"],
    entry_points={"console_scripts": ["scenarios = scenarios:main"]},
)
