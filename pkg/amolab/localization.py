import logging
import math

import numpy as np

from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.stats import linregress

from .exception import (BoxSizeException, ConvergenceException,
    NotLocalizedException)
from .frequency import beta_proxy, orbit
from .operator import Box, box_bands
from .util import (Timer, MAX_EIGEN_SIZE, RENORMALIZE_EVERY, TAIL_THRESHOLD,
    RESIDUAL_TOLERANCE)


logger = logging.getLogger(__name__)
EIGEN_BLOCK = 512
TINY = 1e-300


class Selector:
    """which eigenpairs eigensolve keeps.

    nearest: energies closest to `target`
    localized: largest inverse participation ratio
    central: centre closest to the middle of the box

    only pairs centred at least margin * |I| away from both ends qualify
    """
    MODES = ('nearest', 'localized', 'central')

    def __init__(self, mode='nearest', target=0.0, margin=0.2):
        if mode not in self.MODES:
            raise ValueError('unknown selector mode: {}'.format(mode))

        self.mode = mode
        self.target = target
        self.margin = margin


class Eigenpair:

    def __init__(self, energy, vector, box, residual, params=None,
                 log_abs=None, signs=None):
        self.energy = energy
        self.vector = vector
        self.box = box
        self.residual = residual
        self.params = params

        if log_abs is None:
            with np.errstate(divide='ignore'):
                log_abs = np.log(np.abs(vector))

            signs = np.sign(vector)

        self.log_abs = log_abs
        self.signs = signs

    def __repr__(self):
        return 'Eigenpair(energy={}, center={}, box={})'.format(self.energy,
            self.center, self.box)

    @property
    def center(self):
        return self.box.x1 + int(np.argmax(np.abs(self.vector)))

    @property
    def participation_ratio(self):
        weights = self.vector ** 2
        weights = weights / weights.sum()

        return 1.0 / float(np.sum(weights ** 2))

    def value_log(self, site):
        if site not in self.box:
            return -math.inf

        return float(self.log_abs[site - self.box.x1])


def _residual(diagonal, off, energy, vector):
    product = (diagonal - energy) * vector
    product[:-1] += off * vector[1:]
    product[1:] += off * vector[:-1]

    return float(np.linalg.norm(product))


def refine_tails(params, box, energy, vector, threshold=TAIL_THRESHOLD):
    """log |v| and sign of v with the tails recomputed from the Dirichlet
    ends by the ratio recurrences

        rho_i = v(i) / v(i-1) = 1 / ((E - v_i) - rho_{i+1}),  rho_N = 0
        mu_i = v(i) / v(i+1) = 1 / ((E - v_i) - mu_{i-1}),    mu_{-1} = 0

    beyond the first sites where |v| drops under threshold * max |v|
    """
    diagonal, _ = box_bands(params, box)
    shifted = (energy - diagonal).tolist()
    size = box.size
    amplitude = np.abs(vector)
    peak = int(np.argmax(amplitude))
    cutoff = threshold * amplitude[peak]

    with np.errstate(divide='ignore'):
        log_abs = np.log(amplitude)

    signs = np.sign(vector)
    below = np.nonzero(amplitude[peak:] < cutoff)[0]

    if below.size:
        start = peak + int(below[0])
        ratios = [0.0] * (size + 1)

        for i in range(size - 1, start - 1, -1):
            ratios[i] = 1.0 / ((shifted[i] - ratios[i + 1]) or TINY)

        for i in range(start, size):
            log_abs[i] = log_abs[i - 1] + math.log(abs(ratios[i]) or TINY)
            signs[i] = signs[i - 1] * (1.0 if ratios[i] > 0 else -1.0)

    below = np.nonzero(amplitude[:peak + 1][::-1] < cutoff)[0]

    if below.size:
        start = peak - int(below[0])
        ratios = [0.0] * (start + 1)
        previous = 0.0

        for i in range(start + 1):
            previous = 1.0 / ((shifted[i] - previous) or TINY)
            ratios[i] = previous

        for i in range(start, -1, -1):
            log_abs[i] = log_abs[i + 1] + math.log(abs(ratios[i]) or TINY)
            signs[i] = signs[i + 1] * (1.0 if ratios[i] > 0 else -1.0)

    return log_abs, signs


def spectrum(params, box):
    diagonal, off = box_bands(params, box)

    if box.size == 1:
        return diagonal.copy()

    return eigvalsh_tridiagonal(diagonal, off)


def _vectors(diagonal, off, low, high):
    if diagonal.size == 1:
        return np.array([diagonal[0]]), np.ones((1, 1))

    return eigh_tridiagonal(diagonal, off, select='i',
        select_range=(low, high))


def _scores(diagonal, off, selector, box):
    """(index, score) for every pair whose centre clears the margin"""
    margin = int(selector.margin * box.size)
    scored = []

    for low in range(0, box.size, EIGEN_BLOCK):
        high = min(low + EIGEN_BLOCK, box.size) - 1
        _, vectors = _vectors(diagonal, off, low, high)
        amplitude = np.abs(vectors)
        centers = np.argmax(amplitude, axis=0)
        ipr = np.sum(vectors ** 4, axis=0)

        for column, center in enumerate(centers):
            if not margin <= center <= box.size - 1 - margin:
                continue

            if selector.mode == 'localized':
                score = -ipr[column]
            else:
                score = abs(center - (box.size - 1) / 2.0)

            scored.append((score, low + column))

    return [index for score, index in sorted(scored)]


def eigensolve(params, box, count, selector=None):
    selector = selector or Selector()

    if box.size > MAX_EIGEN_SIZE:
        error = 'eigensolve is limited to {} sites, got {}'.format(
            MAX_EIGEN_SIZE, box.size)
        logger.exception(error)
        raise BoxSizeException(error)

    diagonal, off = box_bands(params, box)
    margin = int(selector.margin * box.size)
    pairs = []
    rejected = 0

    with Timer() as timer:
        if selector.mode == 'nearest':
            energies = spectrum(params, box)
            order = sorted(range(box.size),
                key=lambda i: (abs(energies[i] - selector.target), i))
        else:
            order = _scores(diagonal, off, selector, box)

        for index in order:
            if len(pairs) >= count:
                break

            energies, vectors = _vectors(diagonal, off, index, index)
            energy, vector = float(energies[0]), vectors[:, 0].copy()
            center = int(np.argmax(np.abs(vector)))

            if not margin <= center <= box.size - 1 - margin:
                continue

            residual = _residual(diagonal, off, energy, vector)

            if residual > RESIDUAL_TOLERANCE:
                logger.warning('eigenpair {} at energy {} has residual {}'.format(
                    index, energy, residual))
                rejected += 1
                continue

            log_abs, signs = refine_tails(params, box, energy, vector)
            pairs.append(Eigenpair(energy, vector, box, residual,
                params.with_energy(energy), log_abs, signs))

    if rejected and not pairs:
        error = ('no eigenpair of {} met the residual tolerance {} ({} rejected)'
                 ).format(box, RESIDUAL_TOLERANCE, rejected)
        logger.exception(error)
        raise ConvergenceException(error)

    logger.debug('eigensolve {} mode={} kept {} pairs'.format(box,
        selector.mode, len(pairs)))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return pairs


class DecayConfig:

    def __init__(self, boundary_fraction=0.1, center_exclusion=None,
                 window=100, beta_depth=None):
        self.boundary_fraction = boundary_fraction
        self.center_exclusion = center_exclusion
        self.window = window
        self.beta_depth = beta_depth


class DecayReport:

    def __init__(self, center, fitted_rate, fit_window, r_squared,
                 max_window_rate, min_window_rate, energy, box_size,
                 coupling=None, beta=None, q_n=None):
        self.center = center
        self.fitted_rate = fitted_rate
        self.fit_window = fit_window
        self.r_squared = r_squared
        self.max_window_rate = max_window_rate
        self.min_window_rate = min_window_rate
        self.energy = energy
        self.box_size = box_size
        self.coupling = coupling
        self.beta = beta
        self.q_n = q_n

    @property
    def beta_proxy(self):
        return self.beta.proxy if self.beta else None

    @property
    def beta_depth(self):
        return self.beta.depth if self.beta else None

    @property
    def predicted_rate_exact_beta0(self):
        if not self.coupling:
            return None

        return math.log(self.coupling)

    @property
    def predicted_rate_floor(self):
        if not self.coupling or self.beta is None:
            return None

        return math.log(self.coupling) - 1.5 * self.beta.proxy

    def row(self):
        return {
            'lambda': self.coupling,
            'beta_proxy': self.beta_proxy,
            'q_n': self.q_n,
            'energy': self.energy,
            'fitted_rate': self.fitted_rate,
            'floor': self.predicted_rate_floor,
            'r_squared': self.r_squared,
            'box_size': self.box_size,
        }


def _window_rates(distances, values, width):
    rates = []

    if width < 2:
        return rates

    bins = (distances // width).astype(int)

    for label in np.unique(bins):
        chosen = bins == label

        if np.unique(distances[chosen]).size < max(3, width // 2):
            continue

        rates.append(-linregress(distances[chosen], values[chosen]).slope)

    return rates


def fit_decay(pair, config=None):
    """least squares slope of ln(v(k)^2 + v(k+1)^2) / 2 against the distance
    of the pair (k, k+1) from the centre, d_k = |k + 1/2 - c| - 1/2
    """
    config = config or DecayConfig()
    size = pair.box.size
    center = int(np.argmax(np.abs(pair.vector)))

    if center < 10 or center > size - 11:
        error = 'maximum at site {} is within 10 sites of the boundary'.format(
            pair.box.x1 + center)
        logger.exception(error)
        raise NotLocalizedException(error)

    ratio = pair.participation_ratio

    if ratio > size / 4.0:
        error = 'participation ratio {:.1f} exceeds |I|/4 = {}'.format(ratio,
            size / 4.0)
        logger.exception(error)
        raise NotLocalizedException(error)

    params = pair.params
    exclusion = config.center_exclusion

    if exclusion is None:
        exclusion = params.alpha.denominator(1) if params else 1

    boundary = int(math.ceil(config.boundary_fraction * size))
    sites = np.arange(size - 1)
    values = np.logaddexp(2.0 * pair.log_abs[:-1], 2.0 * pair.log_abs[1:]) / 2.0
    distances = np.abs(sites + 0.5 - center) - 0.5
    keep = (sites >= boundary) & (sites + 1 <= size - 1 - boundary) & \
        (distances >= exclusion) & np.isfinite(values)

    if np.count_nonzero(keep) < 3:
        error = 'fit window around site {} holds fewer than 3 points'.format(
            pair.box.x1 + center)
        logger.exception(error)
        raise NotLocalizedException(error)

    fit = linregress(distances[keep], values[keep])
    rates = _window_rates(distances[keep], values[keep], config.window)
    beta = None
    q_n = None

    if params is not None:
        beta = beta_proxy(params.alpha, config.beta_depth)
        q_n = params.alpha.denominator(beta.depth)

    fit_window = Box(pair.box.x1 + boundary, pair.box.x2 - boundary)
    report = DecayReport(pair.box.x1 + center, -fit.slope, fit_window,
        fit.rvalue ** 2, max(rates) if rates else None,
        min(rates) if rates else None, pair.energy, size,
        params.coupling if params else None, beta, q_n)
    logger.debug('fit_decay centre={} rate={} r2={}'.format(report.center,
        report.fitted_rate, report.r_squared))

    return report


def lyapunov(params, steps, theta_samples, renormalize_every=RENORMALIZE_EVERY):
    """(1 / N) log || A_{N-1} ... A_0 || with A_n = [[E - v(n), -1], [1, 0]],
    averaged over theta + s / theta_samples
    """
    if steps < 10**4:
        raise ValueError('lyapunov needs at least 10^4 steps')

    if theta_samples < 1:
        raise ValueError('lyapunov needs at least one phase')

    thetas = (params.theta + np.arange(theta_samples) / theta_samples) % 1.0
    base = orbit(params.alpha, 0, steps)
    top_left = np.ones(theta_samples)
    top_right = np.zeros(theta_samples)
    bottom_left = np.zeros(theta_samples)
    bottom_right = np.ones(theta_samples)
    log_norm = np.zeros(theta_samples)

    def renormalize():
        stack = np.stack((np.stack((top_left, top_right), axis=-1),
            np.stack((bottom_left, bottom_right), axis=-1)), axis=-2)
        norms = np.linalg.norm(stack, ord=2, axis=(-2, -1))

        return norms

    with Timer() as timer:
        for n in range(steps):
            entry = params.energy - 2.0 * params.coupling * np.cos(
                2.0 * np.pi * ((thetas + base[n]) % 1.0))
            top_left, top_right, bottom_left, bottom_right = (
                entry * top_left - bottom_left, entry * top_right - bottom_right,
                top_left, top_right)

            if (n + 1) % renormalize_every == 0 or n == steps - 1:
                norms = renormalize()
                top_left = top_left / norms
                top_right = top_right / norms
                bottom_left = bottom_left / norms
                bottom_right = bottom_right / norms
                log_norm += np.log(norms)

    value = float(np.mean(log_norm)) / steps
    logger.debug('lyapunov E={} lambda={} steps={} -> {}'.format(
        params.energy, params.coupling, steps, value))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return value
