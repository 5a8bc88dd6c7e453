# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

# 3p
from setuptools import setup

# project
from config import get_version

# Prereqs of the install. Will install when deploying the egg.
install_requires = [
    'numpy>=1.21',
    'scipy>=1.7',
    'simplejson>=3.6.5',
]

setup(
    name='strand-backtest',
    version=get_version(),
    description="String-momentum tick backtester with self-learning parameter selection",
    author='strand authors',
    license='Simplified BSD',
    python_requires='>=3.8',
    install_requires=install_requires,
    py_modules=[
        'backtester',
        'benchmarks',
        'config',
        'emitter',
        'evaluator',
        'histogram',
        'market_data',
        'predictor',
        'runner',
        'spin_replica',
        'strand',
        'string_core',
        'util',
    ],
    packages=['utils'],
    entry_points={
        'console_scripts': ['strand=strand:main'],
    },
    zip_safe=False,
)
