"""
amolab
------

amolab is a numerical laboratory for the almost Mathieu operator: continued
fraction frequencies, box determinants, Green functions, resonances and
eigenfunction decay, driven from a command line that writes plot-ready
CSV / JSON lines.

"""
import sys
from setuptools import setup, find_packages


install_requires = [
    'numpy',
    'scipy',
    'mpmath',
    'joblib',
]

# get the version information
exec(open('amolab/version.py').read())

setup(
    name = 'amolab',
    packages = find_packages(),
    version = __version__,
    description = 'Numerical laboratory for the almost Mathieu operator',
    long_description = __doc__,
    install_requires = install_requires,
    entry_points = {
        'console_scripts': [
            'amolab = amolab.cli:main',
        ],
    },
    classifiers = [
        'License :: OSI Approved :: MIT License',
        'Development Status :: 3 - Alpha',
        'Programming Language :: Python :: 3',
        'Environment :: Console',
        'Topic :: Scientific/Engineering',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
        'Intended Audience :: Science/Research',
        'Operating System :: POSIX :: Linux',
        'Operating System :: MacOS',
        'Operating System :: MacOS :: MacOS X',
    ],
    test_suite = 'amolab.test',
)
