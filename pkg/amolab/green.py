"""Green functions of finite boxes.

For a box I = [x1, x2] at energy E the boundary entries of
G_I = (H_I - E)^{-1} follow from Cramer's rule as ratios of the box
determinants:

    G_I(x1, y) = (-1)^{y-x1} det(I restricted to [y+1, x2]) / det(I)
    G_I(y, x2) = (-1)^{x2-y} det(I restricted to [x1, y-1]) / det(I)

Everything here works with `LogValue` pairs so entries decaying like
e^{-k ln lambda} never underflow.
"""
import json
import logging
import math

import numpy as np

from scipy.linalg import eigvalsh_tridiagonal, solve_banded

from .exception import (SingularBoxException, NearSingularException,
    BoxSizeException)
from .frequency import beta_proxy
from .operator import (Box, LogValue, ZERO, box_bands, shifted_diagonal,
    logdet_tridiagonal, box_logdet)
from .util import (Timer, MAX_DIRECT_SIZE, MAX_CONDITION, SINGULAR_LOG_GAP,
    PRE_ASYMPTOTIC_K, RESIDUAL_TOLERANCE)


logger = logging.getLogger(__name__)


class BoxGreen:

    def __init__(self, box, energy, y, log_g_left, log_g_right):
        self.box = box
        self.energy = energy
        self.y = y
        self.log_g_left = log_g_left
        self.log_g_right = log_g_right

    def __repr__(self):
        return 'BoxGreen({}, y={}, left={}, right={})'.format(self.box, self.y,
            self.log_g_left, self.log_g_right)

    @property
    def g_left(self):
        return self.log_g_left.value

    @property
    def g_right(self):
        return self.log_g_right.value

    def to_dict(self):
        return {
            'x1': self.box.x1,
            'x2': self.box.x2,
            'y': self.y,
            'energy': self.energy,
            'sign_left': self.log_g_left.sign,
            'log_left': self.log_g_left.log_magnitude,
            'sign_right': self.log_g_right.sign,
            'log_right': self.log_g_right.log_magnitude,
        }


class RegularityVerdict:

    def __init__(self, y, t, k, regular=False, witness_box=None, margins=None,
                 log_g=None, skipped=None, tested=0):
        self.y = y
        self.t = t
        self.k = k
        self.regular = regular
        self.witness_box = witness_box
        self.margins = margins
        self.log_g = log_g
        self.skipped = skipped or []
        self.tested = tested

    def __repr__(self):
        return 'RegularityVerdict(y={}, t={}, k={}, regular={}, box={})'.format(
            self.y, self.t, self.k, self.regular, self.witness_box)

    @property
    def pre_asymptotic(self):
        return self.k < PRE_ASYMPTOTIC_K

    def to_dict(self):
        return {
            'y': self.y,
            't': self.t,
            'k': self.k,
            'regular': self.regular,
            'witness_box': self.witness_box.to_list() if self.witness_box
                else None,
            'margins': list(self.margins) if self.margins else None,
            'pre_asymptotic': self.pre_asymptotic,
            'skipped': len(self.skipped),
            'tested': self.tested,
        }


def _cramer_entries(diagonal, offset):
    """denominator and the two boundary entries for the site at `offset`
    inside a box with the given shifted diagonal
    """
    denominator = logdet_tridiagonal(diagonal)
    size = len(diagonal)
    right = logdet_tridiagonal(diagonal[offset + 1:])
    left = logdet_tridiagonal(diagonal[:offset])

    return denominator, right, left, size - 1 - offset


def _entry(numerator, denominator, distance):
    if numerator.sign == 0:
        return ZERO

    sign = (-1) ** distance * numerator.sign * denominator.sign

    return LogValue(sign, numerator.log_magnitude - denominator.log_magnitude)


def green_cramer(params, box, y):
    if y not in box:
        error = 'site {} is outside {}'.format(y, box)
        logger.exception(error)
        raise ValueError(error)

    diagonal = shifted_diagonal(params, box)
    offset = y - box.x1
    denominator, right, left, right_distance = _cramer_entries(diagonal,
        offset)

    if denominator.sign == 0:
        error = 'energy {} is an eigenvalue of the box {}'.format(
            params.energy, box)
        logger.exception(error)
        raise SingularBoxException(error)

    return BoxGreen(box, params.energy, y, _entry(right, denominator, offset),
        _entry(left, denominator, right_distance))


def _shifted_spectrum(params, box):
    """H_I - E as (diagonal, off) with |eigenvalues| sorted ascending"""
    diagonal, off = box_bands(params, box)
    diagonal = diagonal - params.energy

    if box.size == 1:
        eigenvalues = diagonal
    else:
        eigenvalues = eigvalsh_tridiagonal(diagonal, off)

    return diagonal, off, np.sort(np.abs(eigenvalues))


def _near_singular(params, box, condition):
    error = 'box {} is near-singular at energy {} (condition {})'.format(
        box, params.energy, condition)
    logger.exception(error)
    raise NearSingularException(error)


def check_condition(params, box, max_condition=MAX_CONDITION):
    """raises NearSingularException when H_I - E has condition number above
    `max_condition`; returns (diagonal, off, smallest |eigenvalue|)
    """
    diagonal, off, magnitudes = _shifted_spectrum(params, box)
    smallest, largest = magnitudes[0], magnitudes[-1]

    if smallest == 0.0:
        _near_singular(params, box, math.inf)

    if largest / smallest > max_condition:
        _near_singular(params, box, largest / smallest)

    return diagonal, off, smallest


def green_direct(params, box, max_size=MAX_DIRECT_SIZE):
    if box.size > max_size:
        error = 'direct inverse limited to {} sites, got {}'.format(max_size,
            box.size)
        logger.exception(error)
        raise BoxSizeException(error)

    diagonal, off, _ = check_condition(params, box)
    banded = np.zeros((3, box.size))
    banded[0, 1:] = off
    banded[1] = diagonal
    banded[2, :-1] = off

    return solve_banded((1, 1), banded, np.eye(box.size))


def green_decay_rate(params, box):
    """-log |G_I(x1, x2)| / (x2 - x1); G_I(x1, x2) = (-1)^{k-1} / P_k"""
    if box.size < 2:
        raise ValueError('green_decay_rate needs at least two sites')

    det = box_logdet(params, box)

    if det.sign == 0:
        error = 'energy {} is an eigenvalue of the box {}'.format(
            params.energy, box)
        logger.exception(error)
        raise SingularBoxException(error)

    return det.log_magnitude / (box.size - 1)


def admissible_offsets(k):
    low = int(math.ceil(k / 5.0))

    return low, k - 1 - low


def classify_regular(params, y, t, k, search_offsets=None):
    """(t, k)-regularity of y: a box [x1, x1 + k - 1] containing y with
    |y - x_i| >= k/5 and |G(y, x_i)| < e^{-t |y - x_i|} at both ends.

    margins are -(t |y - x_i| + log |G(y, x_i)|), positive when the decay
    inequality holds. boxes are scanned from the smallest x1.
    """
    if k < 5:
        raise ValueError('classify_regular needs k >= 5')

    low, high = admissible_offsets(k)

    if search_offsets is None:
        offsets = list(range(high, low - 1, -1))
    else:
        offsets = sorted((d for d in search_offsets if low <= d <= high),
            reverse=True)

    verdict = RegularityVerdict(y, t, k)

    if not offsets:
        return verdict

    span = Box(y - offsets[0], y - offsets[-1] + k - 1)
    diagonal = shifted_diagonal(params, span)
    best = None

    with Timer() as timer:
        for offset in offsets:
            x1 = y - offset
            start = x1 - span.x1
            denominator, right, left, right_distance = _cramer_entries(
                diagonal[start:start + k], offset)
            verdict.tested += 1
            numerator_log = max(right.log_magnitude, left.log_magnitude)

            if denominator.sign == 0 or \
                    denominator.log_magnitude < numerator_log - SINGULAR_LOG_GAP:
                verdict.skipped.append(Box(x1, x1 + k - 1))
                continue

            log_g = (right.log_magnitude - denominator.log_magnitude,
                left.log_magnitude - denominator.log_magnitude)
            margins = (-(t * offset + log_g[0]), -(t * right_distance + log_g[1]))

            if min(margins) > 0:
                verdict.regular = True
                verdict.witness_box = Box(x1, x1 + k - 1)
                verdict.margins = margins
                verdict.log_g = log_g
                break

            if best is None or min(margins) > min(best[0]):
                best = (margins, log_g)

    if not verdict.regular and best is not None:
        verdict.margins, verdict.log_g = best

    logger.debug('classify_regular y={} t={} k={} regular={} tested={}'.format(
        y, t, k, verdict.regular, verdict.tested))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return verdict


def block_expand(params, phi, x, box, origin=0):
    """|phi(x) + G(x1, x) phi(x1 - 1) + G(x, x2) phi(x2 + 1)|, phi[j] being
    the value at site origin + j.

    the eigen-equation residual r of phi on the box reaches the identity as
    (G_I r)(x), so boxes where |r| / dist(E, spec H_I) exceeds
    RESIDUAL_TOLERANCE * max |phi| raise NearSingularException, as do boxes
    failing the condition cap of green_direct
    """
    phi = np.asarray(phi, dtype=float)
    low, high = box.x1 - 1 - origin, box.x2 + 1 - origin

    if low < 0 or high >= len(phi):
        error = 'box {} and its boundary must lie inside the table'.format(box)
        logger.exception(error)
        raise ValueError(error)

    if not np.any(phi):
        return 0.0

    diagonal, _, smallest = check_condition(params, box)
    inner = phi[low + 1:high]
    residual = phi[low:high - 1] + phi[low + 2:high + 1] + diagonal * inner
    amplified = np.linalg.norm(residual) / smallest

    if amplified > RESIDUAL_TOLERANCE * np.max(np.abs(phi)):
        error = ('box {} amplifies the eigen residual {:.3g} to {:.3g} at'
                 ' energy {}').format(box, np.linalg.norm(residual), amplified,
                     params.energy)
        logger.exception(error)
        raise NearSingularException(error)

    green = green_cramer(params, box, x)
    value = phi[x - origin] + green.g_left * phi[low] + \
        green.g_right * phi[high]

    return abs(value)


class StopRule:
    """expansion limits. sites outside [lower, upper] or within
    boundary_fraction of the superbox ends become leaves. `max_depth` levels
    of boxes are expanded (1 expands the first box only); left as None the
    cap is [3 d / q] for a site at distance d from the localization centre,
    q = (window + 1) / 2 being the denominator a window 2 q - 1 is built on
    """

    def __init__(self, rate, window, max_depth=None, lower=None, upper=None,
                 boundary_fraction=0.1, epsilon=0.0):
        self.rate = rate
        self.window = window
        self.max_depth = max_depth
        self.lower = lower
        self.upper = upper
        self.boundary_fraction = boundary_fraction
        self.epsilon = epsilon

    def depth_cap(self, distance):
        if self.max_depth is not None:
            return self.max_depth

        q = (self.window + 1) / 2.0

        return max(1, int(3 * abs(distance) // q))

    def limits(self, box):
        margin = int(math.ceil(self.boundary_fraction * box.size))
        lower, upper = box.x1 + margin, box.x2 - margin

        if self.lower is not None:
            lower = max(lower, self.lower)

        if self.upper is not None:
            upper = min(upper, self.upper)

        return lower, upper


class ExpansionStep:

    def __init__(self, site, box, log_g_left, log_g_right, depth):
        self.site = site
        self.box = box
        self.log_g_left = log_g_left
        self.log_g_right = log_g_right
        self.depth = depth

    @property
    def step_log_bound(self):
        return float(np.logaddexp(self.log_g_left, self.log_g_right))

    @property
    def rate(self):
        left = -self.log_g_left / (self.site - self.box.x1)
        right = -self.log_g_right / (self.box.x2 - self.site)

        return min(left, right)

    def to_dict(self):
        return {
            'box': self.box.to_list(),
            'step_log_bound': self.step_log_bound,
            'site': self.site,
        }


class ExpansionTrace:

    def __init__(self, site, steps, certified_log_bound, achieved_log_bound,
                 actual_log_value, blocking_sites, predicted_log_bound,
                 max_depth=None):
        self.site = site
        self.steps = steps
        self.certified_log_bound = certified_log_bound
        self.achieved_log_bound = achieved_log_bound
        self.actual_log_value = actual_log_value
        self.blocking_sites = blocking_sites
        self.predicted_log_bound = predicted_log_bound
        self.max_depth = max_depth

    @property
    def blocked(self):
        return bool(self.blocking_sites)

    @property
    def slack(self):
        return self.certified_log_bound - self.predicted_log_bound

    @property
    def step_rates(self):
        return [step.rate for step in self.steps]

    def to_dict(self):
        return {
            'site': self.site,
            'certified_log_bound': self.certified_log_bound,
            'achieved_log_bound': self.achieved_log_bound,
            'actual_log_value': self.actual_log_value,
            'predicted_log_bound': self.predicted_log_bound,
            'slack': self.slack,
            'blocked': self.blocked,
            'blocking_sites': list(self.blocking_sites),
            'max_depth': self.max_depth,
            'step_rates': self.step_rates,
            'steps': [step.to_dict() for step in self.steps],
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def iterate_expansion(params, pair, site, stop_rule):
    """chains the block identity from `site` outwards. each expanded site z
    with witness box [x1, x2] contributes

        |phi(z)| <= |G(x1, z)| |phi(x1 - 1)| + |G(z, x2)| |phi(x2 + 1)|

    and leaves are bounded by max |phi| (certified) or by their own value
    (achieved). results are memoised on (site, depth).
    """
    params = params.with_energy(pair.energy)
    lower, upper = stop_rule.limits(pair.box)
    max_depth = stop_rule.depth_cap(site - pair.center)
    norm_log = float(np.max(pair.log_abs))
    verdicts = {}
    memo = {}
    steps = []
    blocking = []

    def leaf(z):
        return norm_log, pair.value_log(z)

    def verdict_for(z):
        if z not in verdicts:
            verdicts[z] = classify_regular(params, z, stop_rule.rate,
                stop_rule.window)

        return verdicts[z]

    def expand(z, depth):
        key = (z, depth)

        if key in memo:
            return memo[key]

        if depth >= max_depth or not lower <= z <= upper:
            result = leaf(z)
        else:
            verdict = verdict_for(z)
            box = verdict.witness_box

            if not verdict.regular or box.x1 - 1 < pair.box.x1 or \
                    box.x2 + 1 > pair.box.x2:
                if z not in blocking:
                    blocking.append(z)

                result = leaf(z)
            else:
                log_left, log_right = verdict.log_g
                left = expand(box.x1 - 1, depth + 1)
                right = expand(box.x2 + 1, depth + 1)
                steps.append(ExpansionStep(z, box, log_left, log_right, depth))
                result = (float(np.logaddexp(log_left + left[0],
                              log_right + right[0])),
                          float(np.logaddexp(log_left + left[1],
                              log_right + right[1])))

        memo[key] = result

        return result

    with Timer() as timer:
        certified, achieved = expand(site, 0)

    beta = beta_proxy(params.alpha).proxy
    floor = math.log(params.coupling) - 1.5 * beta - stop_rule.epsilon
    predicted = -floor * abs(site - pair.center) + norm_log
    logger.debug(('iterate_expansion site={} steps={} blocked={} certified={}'
                  ).format(site, len(steps), len(blocking), certified))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return ExpansionTrace(site, steps, certified, achieved,
        pair.value_log(site), blocking, predicted, max_depth)
