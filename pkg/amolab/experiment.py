import copy
import itertools
import logging
import math

import numpy as np

from joblib import Parallel, delayed

from .exception import AmoLabException
from .frequency import beta_proxy, convergents
from .green import green_cramer, green_decay_rate
from .localization import (DecayConfig, Selector, eigensolve, fit_decay,
    lyapunov)
from .operator import Box, ModelParams, det_p, growth_rate
from .record import (ConvergentRecord, DecayRecord, DeterminantRecord,
    GreenRecord, LyapunovRecord, ResonanceRecord, SweepRecord,
    UniformityRecord)
from .resonance import classify_site, uniformity_product
from .util import Timer, provenance


logger = logging.getLogger(__name__)
EXPERIMENT_MAP = {}
GRID_ORDER = ('lambda', 'theta', 'energy', 'n')


class RunLogger:
    """timings and failures of every grid point in a run"""

    def __init__(self):
        self.points = []

    def add(self, command, point, rows, execution_time, error=None):
        self.points.append({
            'command': command,
            'point': point,
            'rows': rows,
            'error': error,
            'execution_time': execution_time,
        })

    def reset(self):
        self.points = []

    @property
    def total_time(self):
        return sum(p['execution_time'] for p in self.points)

    @property
    def failures(self):
        return [p for p in self.points if p['error']]

    def __len__(self):
        return len(self.points)

    def __add__(self, other):
        if isinstance(other, RunLogger):
            self.points += copy.deepcopy(other.points)

        return self


class _ExperimentType(type):

    def __new__(cls, name, bases, attrs):
        cls = super(_ExperimentType, cls).__new__(cls, name, bases, attrs)
        command = attrs.get('command', None)

        if command:
            EXPERIMENT_MAP[command] = cls

        return cls


def get_experiment(command):
    if command not in EXPERIMENT_MAP:
        raise KeyError('unknown command: {}'.format(command))

    return EXPERIMENT_MAP[command]()


class Experiment(metaclass=_ExperimentType):
    """one CLI command. `points` enumerates the grid in a fixed order and
    `compute` turns one point into a list of row dicts for `record`
    """
    command = None
    record = None
    module = None
    operation = None
    grid = ('lambda', 'theta', 'energy')

    @property
    def provenance(self):
        return provenance(self.module, self.operation)

    def points(self, config):
        names = [name for name in GRID_ORDER
                 if name in self.grid and config.axis(name)]
        axes = [config.axis(name) for name in names]

        return [dict(zip(names, values)) for values in
                itertools.product(*axes)]

    def params(self, config, point):
        return ModelParams(point.get('lambda', config.coupling), config.alpha,
            point.get('theta', config.theta), point.get('energy',
                config.energy))

    def rng(self, config, index):
        return np.random.default_rng([config.seed, index])

    def compute(self, config, point, index=0):
        raise NotImplementedError()

    def error_row(self, point, error):
        row = dict(point)
        row['error'] = str(error)

        return row

    def run_point(self, config, point, index):
        with Timer() as timer:
            try:
                rows = self.compute(config, point, index)
                error = None
            except (AmoLabException, ValueError) as e:
                logger.exception(e)
                rows = [self.error_row(point, e)]
                error = str(e)

        return rows, error, timer.elapsed

    def records(self, rows):
        return [self.record(row, self.provenance) for row in rows]

    def run(self, config, run_logger=None):
        """rows for every grid point, in grid order for any worker count"""
        points = self.points(config)
        logger.debug('{}: {} grid points on {} workers'.format(self.command,
            len(points), config.workers))

        with Timer() as timer:
            results = Parallel(n_jobs=config.workers)(
                delayed(_run_point)(self.command, config, point, index)
                for index, point in enumerate(points))

        rows = []

        for point, (point_rows, error, elapsed) in zip(points, results):
            if run_logger is not None:
                run_logger.add(self.command, point, len(point_rows), elapsed,
                    error)

            rows.extend(point_rows)

        logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

        return self.records(rows)


def _run_point(command, config, point, index):
    return EXPERIMENT_MAP[command]().run_point(config, point, index)


class ContinuedFraction(Experiment):
    command = 'cf'
    record = ConvergentRecord
    module = 'amolab.frequency'
    operation = 'convergents'
    grid = ()

    def compute(self, config, point, index=0):
        return [c.data for c in convergents(config.alpha, config.depth)]


class Determinant(Experiment):
    command = 'det'
    record = DeterminantRecord
    module = 'amolab.operator'
    operation = 'det_p'
    grid = ('lambda', 'theta', 'energy', 'n')

    def compute(self, config, point, index=0):
        params = self.params(config, point)
        k = int(point.get('n', config.k))
        det = det_p(params, 0.0, k)
        growth = None

        if config.samples:
            growth = growth_rate(params, k, config.samples)

        return [{
            'lambda': params.coupling,
            'theta': params.theta,
            'energy': params.energy,
            'k': k,
            'sign': det.sign,
            'log_abs': det.log_magnitude,
            'rate': det.log_magnitude / k if k else 0.0,
            'growth_rate': growth,
        }]


class Green(Experiment):
    command = 'green'
    record = GreenRecord
    module = 'amolab.green'
    operation = 'green_cramer'

    def compute(self, config, point, index=0):
        params = self.params(config, point)
        box = Box(0, config.box - 1)
        y = config.site

        if y is None:
            # seeded draw from the sites at distance >= |I|/5 from both ends
            margin = box.size // 5
            y = int(self.rng(config, index).integers(margin,
                box.size - margin)) if box.size > 2 * margin else box.middle

        green = green_cramer(params, box, y)
        row = green.to_dict()
        row.update({
            'lambda': params.coupling,
            'theta': params.theta,
            'decay_rate': green_decay_rate(params, box),
        })

        return [row]


class Resonance(Experiment):
    command = 'resonance'
    record = ResonanceRecord
    module = 'amolab.resonance'
    operation = 'classify_site'
    grid = ()

    def compute(self, config, point, index=0):
        start, stop = config.sites

        return [classify_site(config.alpha, y).to_dict()
                for y in range(start, stop + 1)]


class Uniformity(Experiment):
    command = 'uniformity'
    record = UniformityRecord
    module = 'amolab.resonance'
    operation = 'uniformity_product'
    grid = ('lambda', 'theta', 'n')

    def compute(self, config, point, index=0):
        params = self.params(config, point)
        n = int(point.get('n', config.n))
        report = uniformity_product(params, n, config.ell, config.epsilon)
        row = report.to_dict()
        row.update({'lambda': params.coupling, 'theta': params.theta})

        return [row]


def _decay_reports(config, params):
    box = Box(0, config.box - 1)
    selector = Selector(config.selector, target=params.energy)
    decay = DecayConfig(beta_depth=config.beta_depth)
    reports = []

    for pair in eigensolve(params, box, config.count, selector):
        try:
            reports.append(fit_decay(pair, decay))
        except AmoLabException as e:
            logger.exception(e)
            reports.append(e)

    return reports


class Decay(Experiment):
    command = 'decay'
    record = DecayRecord
    module = 'amolab.localization'
    operation = 'fit_decay'
    grid = ('lambda', 'theta')

    def compute(self, config, point, index=0):
        params = self.params(config, point)
        rows = []

        for report in _decay_reports(config, params):
            if isinstance(report, Exception):
                rows.append({'lambda': params.coupling,
                             'box_size': config.box, 'error': str(report)})
            else:
                rows.append(report.row())

        return rows


class Lyapunov(Experiment):
    command = 'lyapunov'
    record = LyapunovRecord
    module = 'amolab.localization'
    operation = 'lyapunov'

    def compute(self, config, point, index=0):
        params = self.params(config, point)
        value = lyapunov(params, config.steps, config.theta_samples)

        return [{
            'lambda': params.coupling,
            'energy': params.energy,
            'steps': config.steps,
            'theta_samples': config.theta_samples,
            'lyapunov': value,
            'ln_lambda': math.log(params.coupling),
        }]


class Sweep(Experiment):
    command = 'sweep'
    record = SweepRecord
    module = 'amolab.localization'
    operation = 'fit_decay'
    grid = ('lambda', 'theta')

    def compute(self, config, point, index=0):
        params = self.params(config, point)
        reports = [r for r in _decay_reports(config, params)
                   if not isinstance(r, Exception)]
        beta = beta_proxy(params.alpha, config.beta_depth)
        row = {
            'lambda': params.coupling,
            'theta': params.theta,
            'beta_proxy': beta.proxy,
            'q_n': params.alpha.denominator(beta.depth),
            'box_size': config.box,
            'pairs': len(reports),
            'floor': math.log(params.coupling) - 1.5 * beta.proxy,
        }

        if reports:
            rates = [r.fitted_rate for r in reports]
            row.update({
                'min_rate': min(rates),
                'mean_rate': math.fsum(rates) / len(rates),
                'max_rate': max(rates),
            })
        else:
            row['error'] = 'no localized eigenpair passed the decay fit'

        return [row]
