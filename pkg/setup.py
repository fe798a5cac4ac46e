# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

from setuptools import setup

with open("help.md", "r") as fh:
    long_description = fh.read()

setup(
    name='irsma',
    version='0.1.0',
    packages=['irsma'],
    description='IRS-assisted MISO downlink with movable transmit antennas: '
                'joint optimization and Monte-Carlo evaluation',
    long_description=long_description,
    long_description_content_type="text/markdown",
    install_requires=[
        'numpy>=1.20'
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['irsma=irsma.cli:main'],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering",
        "Framework :: AsyncIO"
    ],
    python_requires='>=3.9',
)
