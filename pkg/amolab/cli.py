import argparse
import csv
import json
import logging
import os
import sys

from .exception import AmoLabConfigException
from .experiment import EXPERIMENT_MAP, RunLogger, get_experiment
from .frequency import achievable_depth, parse_frequency
from .localization import Selector
from .util import (default_workers, linspace_grid, DEFAULT_CAP_BITS,
    DEFAULT_GUARD, MAX_BOX_SIZE, MAX_EIGEN_SIZE)
from .version import __version__


logger = logging.getLogger(__name__)
GRID_NAMES = ('lambda', 'theta', 'energy', 'n')
LIOUVILLE = 'liouville:'


class ExperimentConfig:

    def __init__(self, command, coupling=2.0, alpha='golden', theta=0.0,
                 energy=0.0, ranges=None, output_path='-', format='csv',
                 seed=0, workers=None, depth=20, k=100, samples=0, box=2000,
                 site=None, sites=(1, 100), n=None, ell=1, epsilon=0.1,
                 count=5, selector='localized', beta_depth=None, steps=10**4,
                 theta_samples=16, cap_bits=DEFAULT_CAP_BITS):
        self.command = command
        self.coupling = coupling
        self.alpha_text = alpha if isinstance(alpha, str) else None
        self.alpha_error = None
        self.theta = theta
        self.energy = energy
        self.ranges = ranges or {}
        self.output_path = output_path
        self.format = format
        self.seed = seed
        self.workers = default_workers() if workers is None else workers
        self.depth = depth
        self.k = k
        self.samples = samples
        self.box = box
        self.site = site
        self.sites = sites
        self.n = n
        self.ell = ell
        self.epsilon = epsilon
        self.count = count
        self.selector = selector
        self.beta_depth = beta_depth
        self.steps = steps
        self.theta_samples = theta_samples
        self.cap_bits = cap_bits
        self.parse_errors = []

        if isinstance(alpha, str):
            try:
                alpha = parse_frequency(alpha, cap_bits=cap_bits)
            except ValueError as e:
                self.alpha_error = str(e)
                alpha = None

        self.alpha = alpha

    def axis(self, name):
        if name in self.ranges:
            return self.ranges[name]

        scalar = {
            'lambda': self.coupling,
            'theta': self.theta,
            'energy': self.energy,
            'n': self.n,
        }[name]

        return [] if scalar is None else [scalar]


def parse_grid(text):
    """name=start:stop:count -> (name, values)"""
    try:
        name, body = text.split('=', 1)
        start, stop, count = body.split(':')
        values = linspace_grid(float(start), float(stop), int(count))
    except ValueError:
        raise AmoLabConfigException(
            'grid {} does not read name=start:stop:count'.format(text))

    name = name.strip()

    if name == 'n':
        values = [int(round(v)) for v in values]

    return name, values


def parse_sites(text):
    start, stop = text.split(':')

    return int(start), int(stop)


def build_parser():
    parser = argparse.ArgumentParser(prog='amolab',
        description='numerical laboratory for the almost Mathieu operator')
    parser.add_argument('command', choices=sorted(EXPERIMENT_MAP))
    parser.add_argument('--alpha', default='golden',
        help='golden | silver | liouville:<beta> | explicit:[a1,a2,...]')
    parser.add_argument('--lambda', dest='coupling', type=float, default=2.0)
    parser.add_argument('--theta', type=float, default=0.0)
    parser.add_argument('--energy', type=float, default=0.0)
    parser.add_argument('--grid', action='append', default=[],
        help='name=start:stop:count for lambda, theta, energy or n')
    parser.add_argument('--output', dest='output_path', default='-')
    parser.add_argument('--format', choices=('csv', 'json'), default='csv')
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--workers', type=int, default=None)
    parser.add_argument('--depth', type=int, default=20)
    parser.add_argument('--k', type=int, default=100)
    parser.add_argument('--samples', type=int, default=0)
    parser.add_argument('--box', type=int, default=2000)
    parser.add_argument('--site', type=int, default=None)
    parser.add_argument('--sites', type=parse_sites, default=(1, 100))
    parser.add_argument('--n', type=int, default=None)
    parser.add_argument('--ell', type=int, default=1)
    parser.add_argument('--epsilon', type=float, default=0.1)
    parser.add_argument('--count', type=int, default=5)
    parser.add_argument('--selector', default='localized',
        choices=Selector.MODES)
    parser.add_argument('--beta-depth', dest='beta_depth', type=int,
        default=None)
    parser.add_argument('--steps', type=int, default=10**4)
    parser.add_argument('--theta-samples', dest='theta_samples', type=int,
        default=16)
    parser.add_argument('--cap-bits', dest='cap_bits', type=int,
        default=DEFAULT_CAP_BITS)
    parser.add_argument('--verbose', action='store_true')
    parser.add_argument('--version', action='version',
        version='%(prog)s {}'.format(__version__))

    return parser


def config_from_args(args):
    ranges = {}
    invalid = []

    for text in args.grid:
        try:
            name, values = parse_grid(text)
            ranges[name] = values
        except AmoLabConfigException as e:
            invalid.append(str(e))

    config = ExperimentConfig(args.command, coupling=args.coupling,
        alpha=args.alpha, theta=args.theta, energy=args.energy, ranges=ranges,
        output_path=args.output_path, format=args.format, seed=args.seed,
        workers=args.workers, depth=args.depth, k=args.k,
        samples=args.samples, box=args.box, site=args.site, sites=args.sites,
        n=args.n, ell=args.ell, epsilon=args.epsilon, count=args.count,
        selector=args.selector, beta_depth=args.beta_depth, steps=args.steps,
        theta_samples=args.theta_samples, cap_bits=args.cap_bits)
    config.parse_errors = invalid

    return config


def _required_depth(config):
    if config.command == 'cf':
        return config.depth + DEFAULT_GUARD

    if config.command == 'uniformity':
        return max(config.axis('n') or [0]) + 1

    if config.command in ('decay', 'sweep') and config.beta_depth:
        return config.beta_depth + 1

    return None


def validate(config):
    violations = list(config.parse_errors)

    if config.command not in EXPERIMENT_MAP:
        violations.append('unknown command {}'.format(config.command))
        return violations

    for name, values in sorted(config.ranges.items()):
        if name not in GRID_NAMES:
            violations.append('grid {} is not one of {}'.format(name,
                ', '.join(GRID_NAMES)))
        elif not values:
            violations.append('grid {} is empty'.format(name))

    if any(c <= 0 for c in config.axis('lambda')):
        violations.append('lambda must be positive: a negative coupling is'
            ' the same operator as H(-lambda, theta) = H(lambda, theta + 1/2)'
            ' and lambda = 0 is the free Laplacian')

    if config.alpha is None:
        violations.append('alpha: {}'.format(config.alpha_error))
    elif config.alpha_text and config.alpha_text.startswith(LIOUVILLE):
        required = _required_depth(config)

        if required:
            reachable = achievable_depth(config.alpha.target_beta,
                cap_bits=config.cap_bits)

            if required > reachable:
                violations.append(('alpha {} needs {} coefficients but only'
                    ' {} fit under the {} bit cap').format(config.alpha_text,
                        required, reachable, config.cap_bits))

    if config.workers < 1:
        violations.append('workers must be at least 1')

    if config.command == 'cf' and config.depth < 1:
        violations.append('depth must be at least 1')

    if config.command == 'det':
        if config.k < 1 or any(n < 1 for n in config.axis('n')):
            violations.append('k must be at least 1')

        if config.samples and (config.samples < 100 or config.k < 10):
            violations.append('growth rate needs samples >= 100 and k >= 10')

    if config.command == 'green' and not 1 <= config.box <= MAX_BOX_SIZE:
        violations.append('box must hold 1 to {} sites'.format(MAX_BOX_SIZE))

    if config.command == 'green' and config.site is not None and \
            not 0 <= config.site < config.box:
        violations.append('site {} is outside the box [0, {}]'.format(
            config.site, config.box - 1))

    if config.command in ('decay', 'sweep'):
        if not 1 <= config.box <= MAX_EIGEN_SIZE:
            violations.append('box must hold 1 to {} sites'.format(
                MAX_EIGEN_SIZE))

        if config.count < 1:
            violations.append('count must be at least 1')

    if config.command == 'resonance':
        start, stop = config.sites

        if start < 1 or stop < start:
            violations.append('sites must read start:stop with 1 <= start'
                ' <= stop')

    if config.command == 'uniformity' and not config.axis('n'):
        violations.append('uniformity needs --n or an n grid')

    if config.command == 'lyapunov':
        if config.steps < 10**4:
            violations.append('steps must be at least 10^4')

        if config.theta_samples < 1:
            violations.append('theta samples must be at least 1')

    if config.output_path != '-':
        directory = os.path.dirname(os.path.abspath(config.output_path))

        if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
            violations.append('output directory {} is not writable'.format(
                directory))

    return violations


def write_records(stream, records, record_class, format='csv'):
    if format == 'json':
        for record in records:
            stream.write(json.dumps(record.json_row()) + '\n')

        return

    stream.write(record_class.schema_line() + '\n')
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(record_class.header())

    for record in records:
        writer.writerow(record.csv_row())


def run(config, run_logger=None):
    violations = validate(config)

    if violations:
        build_parser().print_usage(sys.stderr)

        for violation in violations:
            sys.stderr.write('amolab: error: {}\n'.format(violation))

        return 2

    experiment = get_experiment(config.command)
    records = experiment.run(config, run_logger)

    try:
        if config.output_path == '-':
            write_records(sys.stdout, records, experiment.record,
                config.format)
        else:
            with open(config.output_path, 'w', newline='') as stream:
                write_records(stream, records, experiment.record,
                    config.format)
    except OSError as e:
        logger.exception(e)
        sys.stderr.write('amolab: error: {}\n'.format(e))

        return 1

    failed = len([r for r in records if r.failed])
    logger.info('{}: {} rows, {} with errors'.format(config.command,
        len(records), failed))

    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else
        logging.WARNING)
    run_logger = RunLogger()
    status = run(config_from_args(args), run_logger)
    logger.debug('{} points in {} miliseconds'.format(len(run_logger),
        run_logger.total_time))

    return status


if __name__ == '__main__':
    sys.exit(main())
