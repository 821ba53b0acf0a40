import os
import re

from timeit import default_timer

from .version import __version__


DEFAULT_CAP_BITS = 10**6
DEFAULT_GUARD = 2
DEFAULT_CERTIFICATION = 10**6
DEFAULT_BETA_DEPTH = 20
MAX_BOX_SIZE = 10**5
MAX_DIRECT_SIZE = 2000
MAX_EIGEN_SIZE = 10**4
MAX_CONDITION = 1e12
SINGULAR_LOG_GAP = 30.0
PRE_ASYMPTOTIC_K = 50
RENORMALIZE_EVERY = 32
DEGENERATE_NODE_GAP = 1e-14
TAIL_THRESHOLD = 1e-8
RESIDUAL_TOLERANCE = 1e-8
WORKERS_ENV = 'AMO_LAB_WORKERS'
SCHEMA_PREFIX = 'amolab'


def camel_to_underscore(name):
    s1 = re.sub('(.)([A-Z][a-z]+)', r'\1_\2', name)

    return re.sub('([a-z0-9])([A-Z])', r'\1_\2', s1).lower()


def provenance(module, operation):
    """the string stored with every result row, e.g.
    amolab.localization.fit_decay@0.1.0
    """
    return '{}.{}@{}'.format(module, operation, __version__)


def default_workers():
    value = os.environ.get(WORKERS_ENV, '')

    try:
        workers = int(value)
    except ValueError:
        return 1

    return max(1, workers)


def linspace_grid(start, stop, count):
    if count < 1:
        return []

    if count == 1:
        return [float(start)]

    step = (stop - start) / (count - 1)

    return [start + i * step for i in range(count - 1)] + [float(stop)]


class Timer(object):
    elapsed = 0

    def __str__(self):
        return str(self.elapsed)

    def __enter__(self):
        self.start = default_timer()
        return self

    def __exit__(self, *args):
        end = default_timer()
        self.elapsed_secs = end - self.start
        self.elapsed = self.elapsed_secs * 1000
