import logging
import math

from collections import namedtuple
from fractions import Fraction

import numpy as np

from scipy.sparse import diags

from .exception import BoxSizeException
from .frequency import reduce_mod_1, orbit
from .util import Timer, MAX_BOX_SIZE


logger = logging.getLogger(__name__)
PEAK_OFFSETS = (-2, -1, 0, 1, 2)


Membership = namedtuple('Membership', ['member', 'margin'])


class LogValue(namedtuple('LogValue', ['sign', 'log_magnitude'])):
    """a real number kept as sign and log of its modulus"""
    __slots__ = ()

    @property
    def value(self):
        if self.sign == 0:
            return 0.0

        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * math.inf


ZERO = LogValue(0, -math.inf)


class LogDet(LogValue):
    """P_k as (sign, log |P_k|); log_magnitude is -inf when sign is 0"""

    def __new__(cls, sign, log_magnitude, k=0):
        det = super().__new__(cls, sign, log_magnitude)
        det._k = k

        return det

    @property
    def k(self):
        return self._k

    def ratio(self, other):
        if other.sign == 0:
            raise ZeroDivisionError('ratio by a zero determinant')

        if self.sign == 0:
            return ZERO

        return LogValue(self.sign * other.sign,
            self.log_magnitude - other.log_magnitude)


class ModelParams:

    def __init__(self, coupling, alpha, theta=0.0, energy=0.0):
        coupling = float(coupling)
        theta = float(theta)

        if coupling < 0:
            logger.debug(('negative coupling {} reduced to {} with the phase'
                          ' shifted by one half').format(coupling, -coupling))
            coupling = -coupling
            theta = theta + 0.5

        self.coupling = coupling
        self.alpha = alpha
        self.theta = theta % 1.0
        self.energy = float(energy)

    def __repr__(self):
        return 'ModelParams(coupling={}, theta={}, energy={}, alpha={})'.format(
            self.coupling, self.theta, self.energy, self.alpha)

    def with_theta(self, theta):
        return ModelParams(self.coupling, self.alpha, theta, self.energy)

    def with_energy(self, energy):
        return ModelParams(self.coupling, self.alpha, self.theta, energy)

    def with_coupling(self, coupling):
        return ModelParams(coupling, self.alpha, self.theta, self.energy)

    def to_dict(self):
        return {
            'lambda': self.coupling,
            'alpha': self.alpha.to_dict(),
            'theta': self.theta,
            'energy': self.energy,
        }


class Box:

    def __init__(self, x1, x2):
        x1, x2 = int(x1), int(x2)

        if x2 < x1:
            error = 'box needs x2 >= x1, got [{}, {}]'.format(x1, x2)
            logger.exception(error)
            raise ValueError(error)

        self.x1 = x1
        self.x2 = x2

    def __repr__(self):
        return 'Box({}, {})'.format(self.x1, self.x2)

    def __eq__(self, other):
        return isinstance(other, Box) and (self.x1, self.x2) == (other.x1,
            other.x2)

    def __hash__(self):
        return hash((self.x1, self.x2))

    def __contains__(self, site):
        return self.x1 <= site <= self.x2

    def __iter__(self):
        return iter(range(self.x1, self.x2 + 1))

    def __len__(self):
        return self.size

    @property
    def size(self):
        return self.x2 - self.x1 + 1

    @property
    def middle(self):
        return (self.x1 + self.x2) // 2

    def shift(self, offset):
        return Box(self.x1 + offset, self.x2 + offset)

    def interior(self, margin):
        return Box(self.x1 + margin, self.x2 - margin)

    def index(self, site):
        return site - self.x1

    def to_list(self):
        return [self.x1, self.x2]


def potential(params, n):
    shift = reduce_mod_1(params.alpha, n).value
    phase = (params.theta + shift) % 1.0

    return 2.0 * params.coupling * math.cos(2.0 * math.pi * phase)


def potential_values(params, start, count, theta_shift=0.0):
    phases = (params.theta + theta_shift + orbit(params.alpha, start,
        count)) % 1.0

    return 2.0 * params.coupling * np.cos(2.0 * np.pi * phases)


def box_bands(params, box):
    diagonal = potential_values(params, box.x1, box.size)

    return diagonal, np.ones(box.size - 1)


def shifted_diagonal(params, box):
    """diagonal of H_I - E as a plain list"""
    return (potential_values(params, box.x1, box.size) - params.energy).tolist()


def box_hamiltonian(params, box, max_size=MAX_BOX_SIZE):
    if box.size > max_size:
        error = 'box of size {} is over the cap of {}'.format(box.size,
            max_size)
        logger.exception(error)
        raise BoxSizeException(error)

    diagonal, off = box_bands(params, box)

    if box.size == 1:
        return diags([diagonal], [0], format='csr')

    return diags([off, diagonal, off], [-1, 0, 1], format='csr')


def logdet_tridiagonal(diagonal):
    """determinant of a tridiagonal matrix with unit off-diagonals and the
    given diagonal, via the pair recurrence D_j = a_j D_{j-1} - D_{j-2}
    renormalised to unit max modulus every step
    """
    current, previous = 1.0, 0.0
    log_scale = 0.0
    k = 0

    for k, entry in enumerate(diagonal, 1):
        current, previous = entry * current - previous, current
        scale = max(abs(current), abs(previous))
        current /= scale
        previous /= scale
        log_scale += math.log(scale)

    if current == 0.0:
        return LogDet(0, -math.inf, k)

    sign = 1 if current > 0 else -1

    return LogDet(sign, log_scale + math.log(abs(current)), k)


def det_p(params, theta_shift, k):
    if k < 0:
        raise ValueError('det_p needs k >= 0')

    if k == 0:
        return LogDet(1, 0.0, 0)

    diagonal = potential_values(params, 0, k, theta_shift) - params.energy

    return logdet_tridiagonal(diagonal.tolist())


def box_logdet(params, box):
    return logdet_tridiagonal(shifted_diagonal(params, box))


def transfer_product(params, k, theta_shift=0.0):
    """ordered product of [[E - v(n), -1], [1, 0]] for n = 0..k-1; the
    top-left entry is (-1)^k P_k
    """
    product = np.eye(2)

    if k == 0:
        return product

    for entry in (params.energy - potential_values(params, 0, k,
            theta_shift)).tolist():
        product = np.array([[entry, -1.0], [1.0, 0.0]]).dot(product)

    return product


def half_shift(alpha, k):
    """((k - 1)/2) alpha mod 1"""
    return reduce_mod_1(alpha, Fraction(k - 1, 2)).value


def growth_rate(params, k, phase_samples):
    if k < 10 or phase_samples < 100:
        raise ValueError('growth_rate needs k >= 10 and phase_samples >= 100')

    with Timer() as timer:
        half = half_shift(params.alpha, k)
        thetas = [j / phase_samples for j in range(phase_samples)]

        for base in (-half, 0.5 - half):
            thetas += [(base + offset / (4.0 * k)) % 1.0
                       for offset in PEAK_OFFSETS]

        steps = orbit(params.alpha, 0, k)
        best = -math.inf
        zeros = 0

        for theta in thetas:
            phases = (theta + steps) % 1.0
            diagonal = 2.0 * params.coupling * np.cos(2.0 * np.pi * phases)
            det = logdet_tridiagonal((diagonal - params.energy).tolist())

            if det.sign == 0:
                zeros += 1
                continue

            best = max(best, det.log_magnitude / k)

    logger.debug('growth_rate k={} samples={} zeros={} -> {}'.format(k,
        len(thetas), zeros, best))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return best


def in_A(params, theta_test, k, r):
    """membership of theta_test in A_{k,r} = {|Q_k(cos 2 pi theta)| <=
    e^{(k+1) r}}, where Q_k(cos 2 pi u) = P_k(u - (k-1) alpha / 2)
    """
    if k < 1:
        raise ValueError('in_A needs k >= 1')

    theta = (theta_test - half_shift(params.alpha, k)) % 1.0
    det = det_p(params.with_theta(theta), 0.0, k)

    if det.sign == 0:
        return Membership(True, math.inf)

    margin = (k + 1) * r - det.log_magnitude

    return Membership(margin >= 0, margin)
