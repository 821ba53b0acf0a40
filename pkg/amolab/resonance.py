import logging
import math

import numpy as np

from .exception import (InsufficientDepthException, DepthCapExceededException,
    DegenerateNodeException, SingularBoxException)
from .frequency import beta_proxy, orbit, reduce_mod_1
from .green import RegularityVerdict, green_cramer
from .operator import Box, in_A
from .util import Timer, DEGENERATE_NODE_GAP


logger = logging.getLogger(__name__)
RESONANCE_EXPONENT = 8.0 / 9.0
REFINE_TOLERANCE = 1e-6
GRID_CHUNK = 1024


class ResonanceReport:

    def __init__(self, y, n, q_n, b_n, resonant, ell, distance):
        self.y = y
        self.n = n
        self.q_n = q_n
        self.b_n = b_n
        self.resonant = resonant
        self.ell = ell
        self.distance = distance

    def __repr__(self):
        return 'ResonanceReport(y={}, n={}, q_n={}, resonant={}, ell={})'.format(
            self.y, self.n, self.q_n, self.resonant, self.ell)

    def to_dict(self):
        return {
            'y': self.y,
            'n': self.n,
            'q_n': self.q_n,
            'b_n': self.b_n,
            'resonant': self.resonant,
            'ell': self.ell,
            'distance': self.distance,
        }


class WindowReport:
    """regularity geometry for a non-resonant site: s q_{n-1} <=
    dist(y, {l q_n : l >= 0}), window 2 s q_{n-1} - 1
    """

    def __init__(self, site, s, window, q_n, q_prev, rate_correction):
        self.site = site
        self.s = s
        self.window = window
        self.q_n = q_n
        self.q_prev = q_prev
        self.rate_correction = rate_correction

    def rate(self, coupling, epsilon):
        """ln lambda + 9 ln(s q_{n-1} / q_n) / q_{n-1} - eps"""
        return math.log(coupling) + self.rate_correction - epsilon


class UniformityReport:

    def __init__(self, n, ell, q_n, index_sets, log_max, argmax, beta_proxy,
                 epsilon, grid_size):
        self.n = n
        self.ell = ell
        self.q_n = q_n
        self.index_sets = index_sets
        self.log_max = log_max
        self.argmax = argmax
        self.beta_proxy = beta_proxy
        self.epsilon = epsilon
        self.grid_size = grid_size

    @property
    def k(self):
        return 2 * self.q_n - 1

    @property
    def epsilon_achieved(self):
        return self.log_max / self.k

    @property
    def bound(self):
        return self.beta_proxy / 2.0 + self.epsilon

    @property
    def uniform(self):
        return self.log_max < self.k * self.bound

    def to_dict(self):
        first, second = self.index_sets

        return {
            'n': self.n,
            'ell': self.ell,
            'q_n': self.q_n,
            'i1': first.to_list(),
            'i2': second.to_list(),
            'epsilon_achieved': self.epsilon_achieved,
            'bound': self.bound,
            'beta_proxy': self.beta_proxy,
            'uniform': self.uniform,
            'grid_size': self.grid_size,
        }


class SineSumReport:

    def __init__(self, total, deviation, k0, q_n, m):
        self.total = total
        self.deviation = deviation
        self.k0 = k0
        self.q_n = q_n
        self.m = m

    @property
    def bound_slack(self):
        return self.deviation


class ExceptionalPhaseReport:

    def __init__(self, theta, K, small_sine_hits, integer_relations):
        self.theta = theta
        self.K = K
        self.small_sine_hits = small_sine_hits
        self.integer_relations = integer_relations

    @property
    def possibly_exceptional(self):
        return bool(self.small_sine_hits or self.integer_relations)


class MembershipProfile:

    def __init__(self, n, ell, q_n, upper_rate, lower_rate, first_margins,
                 second_margins):
        self.n = n
        self.ell = ell
        self.q_n = q_n
        self.upper_rate = upper_rate
        self.lower_rate = lower_rate
        self.first_margins = first_margins
        self.second_margins = second_margins

    @property
    def k(self):
        return 2 * self.q_n - 1

    @property
    def all_members(self):
        """every I_1 phase lies in A_{k, 2 ln lambda / 3 + eps}"""
        return all(margin >= 0 for margin in self.first_margins.values())

    @property
    def j0(self):
        return min(self.second_margins, key=lambda j: (self.second_margins[j],
            j))

    @property
    def j0_outside(self):
        return self.second_margins[self.j0] < 0


def _scale_index(alpha, y):
    """n with b_n <= y < b_{n+1}; b_n <= y is q_n^8 <= y^9 exactly"""
    bound = y ** 9
    n = 1

    try:
        if alpha.denominator(1) ** 8 > bound:
            error = 'site {} lies below b_1'.format(y)
            logger.exception(error)
            raise ValueError(error)

        while alpha.denominator(n + 1) ** 8 <= bound:
            n += 1
    except (InsufficientDepthException, DepthCapExceededException):
        error = ('insufficient convergent depth to bracket site {} ({} '
                 'coefficients)').format(y, alpha.generated_depth)
        logger.exception(error)
        raise InsufficientDepthException(error)

    return n


def resonance_radius(q):
    log_b = RESONANCE_EXPONENT * math.log(q)

    return math.exp(log_b) if log_b < 700 else math.inf


def classify_site(alpha, y):
    """resonant when |y - l q_n| <= b_n = q_n^{8/9} for some l >= 1. only the
    two multiples around y can be that close, so the nearest ones decide
    """
    if y < 1:
        raise ValueError('classify_site needs a positive site')

    n = _scale_index(alpha, y)
    q = alpha.denominator(n)
    candidates = [ell for ell in (y // q, y // q + 1) if ell >= 1]
    distances = {ell: abs(y - ell * q) for ell in candidates}
    nearest = min(candidates, key=lambda ell: (distances[ell], ell))
    distance = distances[nearest]
    resonant = distance ** 9 <= q ** 8

    return ResonanceReport(y, n, q, resonance_radius(q), resonant,
        nearest if resonant else None, distance)


def nonresonant_window(alpha, y):
    report = classify_site(alpha, y)
    q = report.q_n
    q_prev = alpha.denominator(report.n - 1)
    remainder = y % q
    distance = min(remainder, q - remainder)
    s = max(1, distance // q_prev)
    correction = 9.0 * math.log(s * q_prev / q) / q_prev

    return WindowReport(y, s, 2 * s * q_prev - 1, q, q_prev, correction)


def index_sets(q, ell):
    """I_1 = [-[2q/3], [2q/3] - 2], I_2 = [(l-1)q + [2q/3] - 1,
    (l+1)q - [2q/3] - 1]; together they hold 2q sites
    """
    if q < 2:
        raise ValueError('index sets need q >= 2')

    two_thirds = (2 * q) // 3

    return (Box(-two_thirds, two_thirds - 2),
            Box((ell - 1) * q + two_thirds - 1, (ell + 1) * q - two_thirds - 1))


def _check_nodes(nodes):
    gaps = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(gaps, np.inf)
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)

    if gaps[i, j] < DEGENERATE_NODE_GAP:
        pair = (int(min(i, j)), int(max(i, j)))
        error = 'degenerate node pair {} (gap {:.3g})'.format(pair, gaps[i, j])
        logger.exception(error)
        raise DegenerateNodeException(error, pair=pair)

    with np.errstate(divide='ignore'):
        logs = np.log(gaps)

    np.fill_diagonal(logs, 0.0)

    return logs.sum(axis=1)


def _log_basis(nodes, denominators, i, x):
    others = np.delete(nodes, i)

    return float(np.sum(np.log(np.abs(x - others))) - denominators[i])


def _refine(nodes, denominators, i, grid, g, tolerance):
    low = grid[max(g - 1, 0)]
    high = grid[min(g + 1, len(grid) - 1)]
    x = grid[g]
    others = np.delete(nodes, i)
    below = others[others < x]
    above = others[others > x]

    if below.size:
        low = max(low, below.max())

    if above.size:
        high = min(high, above.min())

    # log |l_i| is concave between consecutive roots
    while high - low > tolerance:
        left = low + (high - low) / 3.0
        right = high - (high - low) / 3.0

        if _log_basis(nodes, denominators, i, left) < \
                _log_basis(nodes, denominators, i, right):
            low = left
        else:
            high = right

    x = 0.5 * (low + high)

    return _log_basis(nodes, denominators, i, x), x


def log_uniformity(nodes, grid_size, tolerance=REFINE_TOLERANCE):
    """max over x in [-1, 1] and i of
    sum_{j != i} ln |x - c_j| - ln |c_i - c_j|, returned as (value, i, x)
    """
    nodes = np.asarray(nodes, dtype=float)

    if nodes.size < 2:
        raise ValueError('uniformity needs at least two nodes')

    denominators = _check_nodes(nodes)
    cells = np.cos(np.pi * (np.arange(grid_size) + 0.5) / grid_size)[::-1]
    grid = np.concatenate(([-1.0], cells, [1.0]))
    best = (-np.inf, 0, 0)

    for start in range(0, grid.size, GRID_CHUNK):
        chunk = grid[start:start + GRID_CHUNK]

        with np.errstate(divide='ignore', invalid='ignore'):
            table = np.log(np.abs(chunk[:, None] - nodes[None, :]))
            values = table.sum(axis=1)[:, None] - table - denominators[None, :]

        values[np.isnan(values)] = -np.inf
        g, i = np.unravel_index(np.argmax(values), values.shape)

        if values[g, i] > best[0]:
            best = (values[g, i], int(i), start + int(g))

    value, i, g = best
    refined, x = _refine(nodes, denominators, i, grid, g, tolerance)

    if refined > value:
        return refined, i, x

    return float(value), i, float(grid[g])


def _admissible_ell(alpha, n, ell):
    if ell < 1:
        return False

    if ell == 1:
        return True

    q, q_next = alpha.denominator(n), alpha.denominator(n + 1)

    return (ell * q) ** 9 <= q_next ** 8


def uniformity_product(params, n, ell, epsilon, grid_size=None, beta=None):
    alpha = params.alpha
    q = alpha.denominator(n)

    if q < 8:
        raise ValueError('uniformity_product needs q_n >= 8, got {}'.format(q))

    if not _admissible_ell(alpha, n, ell):
        error = 'l={} is outside 1 <= l <= q_(n+1)^(8/9) / q_n'.format(ell)
        logger.exception(error)
        raise ValueError(error)

    grid_size = grid_size or 16 * q

    if grid_size < 16 * q:
        raise ValueError('grid_size must be at least 8 * (2 q_n)')

    if beta is None:
        beta = beta_proxy(alpha, n).proxy

    first, second = index_sets(q, ell)
    sites = list(first) + list(second)
    phases = np.concatenate((orbit(alpha, first.x1, first.size),
        orbit(alpha, second.x1, second.size)))
    nodes = np.cos(2.0 * np.pi * ((params.theta + phases) % 1.0))

    with Timer() as timer:
        try:
            log_max, i, x = log_uniformity(nodes, grid_size)
        except DegenerateNodeException as e:
            pair = (sites[e.pair[0]], sites[e.pair[1]])
            error = 'degenerate node pair at sites {}'.format(pair)
            logger.exception(error)
            raise DegenerateNodeException(error, pair=pair)

    report = UniformityReport(n, ell, q, (first, second), log_max,
        (sites[i], x), beta, epsilon, grid_size)
    logger.debug('uniformity q={} l={} eps={} bound={}'.format(q, ell,
        report.epsilon_achieved, report.bound))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return report


def sine_sum_check(alpha, x, n, r=None, shifts=None):
    """sum over k = 1..q_n, k != k0, of ln |sin pi (x + (k + m_k q_r) alpha)|
    and its deviation from -(q_n - 1) ln 2 in units of ln q_n
    """
    r = n if r is None else r

    if r < n:
        raise ValueError('sine_sum_check needs r >= n')

    q = alpha.denominator(n)
    q_r = alpha.denominator(r)
    shifts = list(shifts) if shifts is not None else [0] * q

    if len(shifts) != q:
        raise ValueError('one shift per k = 1..q_n is needed')

    m = max(abs(shift) for shift in shifts) + 1

    if not 10 * q * m < alpha.denominator(r + 1):
        error = 'm={} violates m < q_(r+1) / (10 q_n)'.format(m)
        logger.exception(error)
        raise ValueError(error)

    if q == 1:
        return SineSumReport(0.0, 0.0, None, 1, m)

    logs = []

    for k, shift in zip(range(1, q + 1), shifts):
        phase = reduce_mod_1(alpha, k + shift * q_r).value
        logs.append(math.log(abs(math.sin(math.pi * ((x + phase) % 1.0)))))

    k0 = int(np.argmin(logs))
    total = math.fsum(logs[:k0] + logs[k0 + 1:])
    deviation = (total + (q - 1) * math.log(2)) / math.log(q)

    return SineSumReport(total, deviation, k0 + 1, q, m)


def is_exceptional_phase(theta, alpha, K):
    if K < 1:
        raise ValueError('K must be at least 1')

    ks = np.arange(-K, K + 1)
    values = (2.0 * theta + orbit(alpha, -K, 2 * K + 1)) % 1.0
    sines = np.abs(np.sin(np.pi * values))
    distances = np.minimum(values, 1.0 - values)
    # |k| = 1 would always hit since k^-2 = 1 bounds every sine
    far = np.abs(ks) >= 2
    squares = np.where(far, ks.astype(float) ** 2, 1.0)
    hits = ks[far & (sines <= 1.0 / squares)]
    relations = ks[distances < 1e-12]

    return ExceptionalPhaseReport(theta, K, [int(k) for k in hits],
        [int(s) for s in relations])


def membership_profile(params, n, ell, epsilon, beta=None):
    """in_A margins at k = 2 q_n - 1 for theta_j = theta + j alpha: I_1 at
    r = 2 ln lambda / 3 + eps, I_2 at r = ln lambda - beta / 2 - 2 eps
    """
    alpha = params.alpha
    q = alpha.denominator(n)
    k = 2 * q - 1

    if beta is None:
        beta = beta_proxy(alpha, n).proxy

    ln_lambda = math.log(params.coupling)
    upper = 2.0 * ln_lambda / 3.0 + epsilon
    lower = ln_lambda - beta / 2.0 - 2.0 * epsilon
    first, second = index_sets(q, ell)

    def margins(box, rate):
        phases = orbit(alpha, box.x1, box.size)

        return {j: in_A(params, (params.theta + phase) % 1.0, k, rate).margin
                for j, phase in zip(box, phases)}

    with Timer() as timer:
        profile = MembershipProfile(n, ell, q, upper, lower,
            margins(first, upper), margins(second, lower))

    logger.debug('membership q={} all_members={} j0={}'.format(q,
        profile.all_members, profile.j0))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return profile


def resonant_regularity(params, y, n, ell, epsilon, beta=None):
    """regularity of a resonant site y in the box [j0 - q_n + 1, j0 + q_n - 1]
    at rate ln lambda - 3 beta / 2 - eps
    """
    alpha = params.alpha

    if beta is None:
        beta = beta_proxy(alpha, n).proxy

    profile = membership_profile(params, n, ell, epsilon, beta)
    q = profile.q_n
    box = Box(profile.j0 - q + 1, profile.j0 + q - 1)
    t = math.log(params.coupling) - 1.5 * beta - epsilon
    verdict = RegularityVerdict(y, t, box.size)

    if y not in box or min(y - box.x1, box.x2 - y) * 5 < box.size:
        return verdict

    try:
        green = green_cramer(params, box, y)
    except SingularBoxException:
        verdict.skipped.append(box)
        return verdict

    verdict.tested = 1
    log_g = (green.log_g_left.log_magnitude, green.log_g_right.log_magnitude)
    margins = (-(t * (y - box.x1) + log_g[0]), -(t * (box.x2 - y) + log_g[1]))
    verdict.margins = margins
    verdict.log_g = log_g

    if min(margins) > 0:
        verdict.regular = True
        verdict.witness_box = box

    return verdict
