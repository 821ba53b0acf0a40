import json
import logging
import math

from collections import namedtuple
from fractions import Fraction

import mpmath
import numpy as np

from .exception import (InsufficientDepthException, DepthCapExceededException,
    PrecisionUnavailableException)
from .util import (Timer, DEFAULT_CAP_BITS, DEFAULT_GUARD,
    DEFAULT_CERTIFICATION, DEFAULT_BETA_DEPTH)


logger = logging.getLogger(__name__)
FLOAT_ULP = 2.0 ** -53
KINDS = ('explicit', 'golden', 'silver', 'liouville')


Reduction = namedtuple('Reduction', ['value', 'error'])


class ConstantRule:

    def __init__(self, value=1):
        self.value = int(value)

    def __call__(self, spec):
        return self.value


class LiouvilleRule:
    """a_{n+1} = max(1, ceil(e^{beta q_n} / q_n)), which drives
    ln q_{n+1} / q_n towards beta
    """

    def __init__(self, target_beta, cap_bits=DEFAULT_CAP_BITS):
        self.target_beta = float(target_beta)
        self.cap_bits = int(cap_bits)

    def estimated_bits(self, q):
        q = mpmath.mpf(q)
        bits = self.target_beta * q / mpmath.log(2) - mpmath.log(q, 2)

        return float(bits)

    def __call__(self, spec):
        depth = spec.generated_depth
        q = spec.denominator(depth)
        bits = self.estimated_bits(q)

        if bits > self.cap_bits:
            error = ('coefficient a_{} needs about {:.4g} bits, over the cap'
                     ' of {} bits; achievable depth is {}').format(depth + 1,
                        bits, self.cap_bits, depth)
            logger.exception(error)
            raise DepthCapExceededException(error, achievable_depth=depth)

        with mpmath.workprec(max(53, int(bits)) + 64):
            value = mpmath.exp(mpmath.mpf(self.target_beta) * q) / q
            coefficient = int(mpmath.ceil(value))

        logger.debug('liouville rule: a_{} has {} bits'.format(depth + 1,
            coefficient.bit_length()))

        return max(1, coefficient)


class FrequencySpec:
    """an irrational alpha in (0, 1) held as its continued fraction
    coefficients a_1, a_2, ...

    the materialized prefix only ever grows; when a rule is present further
    coefficients are generated on demand. generation mutates the spec, so
    callers sharing one spec across threads materialize it up front.
    """

    def __init__(self, coefficients=None, rule=None, kind='explicit',
                 target_beta=None):
        self._coefficients = []
        self._p = [1, 0]
        self._q = [0, 1]
        self.rule = rule
        self.kind = kind
        self.target_beta = target_beta

        for coefficient in coefficients or []:
            self._append(coefficient)

    def __repr__(self):
        return 'FrequencySpec(kind={}, depth={})'.format(self.kind,
            self.generated_depth)

    def _append(self, coefficient):
        coefficient = int(coefficient)

        if coefficient < 1:
            error = ('continued fraction coefficients must be at least 1,'
                     ' got {}').format(coefficient)
            logger.exception(error)
            raise ValueError(error)

        self._coefficients.append(coefficient)
        self._p.append(coefficient * self._p[-1] + self._p[-2])
        self._q.append(coefficient * self._q[-1] + self._q[-2])

    @property
    def coefficients(self):
        return tuple(self._coefficients)

    @property
    def generated_depth(self):
        return len(self._coefficients)

    def materialize(self, count):
        while len(self._coefficients) < count:
            if self.rule is None:
                error = ('{} coefficients requested but only {} are'
                         ' available').format(count, self.generated_depth)
                logger.exception(error)
                raise InsufficientDepthException(error)

            self._append(self.rule(self))

        return self

    def coefficient(self, n):
        self.materialize(n)

        return self._coefficients[n - 1]

    def numerator(self, n):
        self.materialize(max(n, 0))

        return self._p[n + 1]

    def denominator(self, n):
        self.materialize(max(n, 0))

        return self._q[n + 1]

    def value(self, n):
        return Fraction(self.numerator(n), self.denominator(n))

    def to_dict(self):
        data = {
            'kind': self.kind,
            'coefficients': list(self._coefficients),
        }

        if self.target_beta is not None:
            data['target_beta'] = self.target_beta

        return data

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data, cap_bits=DEFAULT_CAP_BITS):
        kind = data.get('kind', 'explicit')
        coefficients = data.get('coefficients', [])

        if kind == 'golden':
            return golden(coefficients)
        elif kind == 'silver':
            return silver(coefficients)
        elif kind == 'liouville':
            return liouville_spec(data['target_beta'], cap_bits=cap_bits,
                coefficients=coefficients)
        elif kind == 'explicit':
            return cls(coefficients)

        error = 'unknown frequency kind: {}'.format(kind)
        logger.exception(error)
        raise ValueError(error)


class Convergent:

    def __init__(self, n, p, q, q_next, delta, delta_lo, delta_hi):
        self.n = n
        self.p = p
        self.q = q
        self.q_next = q_next
        self.delta = delta
        self.delta_lo = delta_lo
        self.delta_hi = delta_hi

    def __repr__(self):
        return 'Convergent(n={}, p={}, q={})'.format(self.n, self.p, self.q)

    @property
    def ln_ratio(self):
        return float(mpmath.log(self.q_next) / mpmath.mpf(self.q))

    @property
    def data(self):
        return {
            'n': self.n,
            'p': self.p,
            'q': self.q,
            'delta_lo': float(self.delta_lo),
            'delta_hi': float(self.delta_hi),
            'ln_ratio': self.ln_ratio,
        }


class BetaEstimate:

    def __init__(self, per_n_values, depth):
        self.per_n_values = list(per_n_values)
        self.depth = depth
        self.running_sup_tail = []
        running = -math.inf

        for value in reversed(self.per_n_values):
            running = max(running, value)
            self.running_sup_tail.append(running)

        self.running_sup_tail.reverse()

    def __repr__(self):
        return 'BetaEstimate(depth={}, proxy={})'.format(self.depth,
            self.proxy)

    @property
    def proxy(self):
        return self.running_sup_tail[-1]

    def tail_sup(self, start):
        """sup of ln q_{n+1}/q_n over n >= start (1-based)"""
        return self.running_sup_tail[start - 1]

    def to_dict(self):
        return {
            'depth': self.depth,
            'proxy': self.proxy,
            'per_n_values': self.per_n_values,
            'running_sup_tail': self.running_sup_tail,
        }


def golden(coefficients=None):
    return FrequencySpec(coefficients or [], rule=ConstantRule(1),
        kind='golden')


def silver(coefficients=None):
    return FrequencySpec(coefficients or [], rule=ConstantRule(2),
        kind='silver')


def liouville_spec(target_beta, prefix=None, cap_bits=DEFAULT_CAP_BITS,
                   coefficients=None):
    """a lazily generated Liouville frequency. the rule takes over after
    `prefix` (default [1])
    """
    target_beta = float(target_beta)

    if target_beta <= 0:
        error = 'target beta must be positive, got {}'.format(target_beta)
        logger.exception(error)
        raise ValueError(error)

    leading = list(coefficients or prefix or [1])

    return FrequencySpec(leading, rule=LiouvilleRule(target_beta, cap_bits),
        kind='liouville', target_beta=target_beta)


def parse_frequency(text, cap_bits=DEFAULT_CAP_BITS):
    """golden | silver | liouville:<beta> | explicit:[a1,a2,...]"""
    text = text.strip()

    if text == 'golden':
        return golden()
    elif text == 'silver':
        return silver()
    elif text.startswith('liouville:'):
        return liouville_spec(float(text.split(':', 1)[1]), cap_bits=cap_bits)
    elif text.startswith('explicit:'):
        body = text.split(':', 1)[1].strip().strip('[]')
        coefficients = [int(part) for part in body.split(',') if part.strip()]

        if not coefficients:
            raise ValueError('explicit frequency needs coefficients')

        return FrequencySpec(coefficients)

    error = 'unrecognised frequency shorthand: {}'.format(text)
    logger.exception(error)
    raise ValueError(error)


def _require(alpha, count):
    try:
        alpha.materialize(count)
    except DepthCapExceededException as e:
        error = ('{} coefficients requested; achievable depth is {}').format(
            count, e.achievable_depth)
        logger.exception(error)
        raise InsufficientDepthException(error)


def convergents(alpha, depth, guard=DEFAULT_GUARD, reference_depth=None):
    if depth < 1:
        raise ValueError('depth must be at least 1')

    if guard < 2:
        raise ValueError('guard must be at least 2 to certify delta')

    reference = max(depth + guard, reference_depth or 0)

    with Timer() as timer:
        _require(alpha, reference)

        p_ref, q_ref = alpha.numerator(reference), alpha.denominator(reference)
        p_prev, q_prev = (alpha.numerator(reference - 1),
            alpha.denominator(reference - 1))
        result = []

        for n in range(1, depth + 1):
            p, q = alpha.numerator(n), alpha.denominator(n)
            delta = Fraction(abs(q * p_ref - p * q_ref), q_ref)
            other = Fraction(abs(q * p_prev - p * q_prev), q_prev)
            result.append(Convergent(n, p, q, alpha.denominator(n + 1), delta,
                min(delta, other), max(delta, other)))

    logger.debug('convergents to depth {} against reference {}'.format(depth,
        reference))
    logger.debug('runtime: {} miliseconds\n'.format(timer.elapsed))

    return result


def denominators(alpha, count):
    _require(alpha, count)

    return [alpha.denominator(n) for n in range(1, count + 1)]


def _beta_values(alpha, depth):
    qs = denominators(alpha, depth + 1)

    return [float(mpmath.log(qs[i + 1]) / mpmath.mpf(qs[i]))
            for i in range(depth)]


def estimate_beta(alpha, depth):
    if depth < 3:
        raise ValueError('estimate_beta needs depth of at least 3')

    return BetaEstimate(_beta_values(alpha, depth), depth)


def beta_proxy(alpha, depth=None):
    """the finite-depth beta proxy at `depth`, or at the deepest usable depth
    (capped at DEFAULT_BETA_DEPTH) when none is given
    """
    if depth is None:
        if alpha.rule is not None:
            try:
                alpha.materialize(DEFAULT_BETA_DEPTH + 1)
            except DepthCapExceededException:
                pass

        depth = min(DEFAULT_BETA_DEPTH, alpha.generated_depth - 1)

    if depth < 1:
        error = 'beta proxy needs at least two coefficients'
        logger.exception(error)
        raise InsufficientDepthException(error)

    return BetaEstimate(_beta_values(alpha, depth), depth)


def construct_liouville(target_beta, depth, prefix=None,
                        cap_bits=DEFAULT_CAP_BITS):
    if depth < 3:
        raise ValueError('construct_liouville needs depth of at least 3')

    spec = liouville_spec(target_beta, prefix=prefix, cap_bits=cap_bits)

    with Timer() as timer:
        try:
            spec.materialize(depth)
        except DepthCapExceededException as e:
            error = ('depth {} is unreachable for target beta {} under a {}'
                     ' bit cap; achievable depth is {}').format(depth,
                        target_beta, cap_bits, e.achievable_depth)
            logger.exception(error)
            raise DepthCapExceededException(error,
                achievable_depth=e.achievable_depth)

    logger.debug('liouville beta={} depth={} runtime: {} miliseconds\n'.format(
        target_beta, depth, timer.elapsed))

    return spec


def achievable_depth(target_beta, prefix=None, cap_bits=DEFAULT_CAP_BITS):
    spec = liouville_spec(target_beta, prefix=prefix, cap_bits=cap_bits)

    while True:
        try:
            spec.materialize(spec.generated_depth + 1)
        except DepthCapExceededException:
            return spec.generated_depth


def certifying_depth(alpha, bound):
    """smallest N with q_N > bound"""
    n = 1

    while True:
        try:
            q = alpha.denominator(n)
        except (InsufficientDepthException, DepthCapExceededException):
            error = ('no convergent denominator exceeds {} within the'
                     ' materialized depth {}').format(bound,
                        alpha.generated_depth)
            logger.exception(error)
            raise PrecisionUnavailableException(error)

        if q > bound:
            return n

        n += 1


def _error_bound(alpha, n_abs, depth):
    q = alpha.denominator(depth)

    if alpha.generated_depth >= depth + 1:
        q_next = alpha.denominator(depth + 1)
    else:
        q_next = q

    return float(Fraction(n_abs) / (q * q_next)) + FLOAT_ULP


def reduce_mod_1(alpha, n, precision_depth=None,
                 factor=DEFAULT_CERTIFICATION):
    """n * alpha mod 1 through the exact convergent p_N/q_N. n may be a
    Fraction so half-integer multiples reduce exactly too
    """
    n = Fraction(n)

    if n == 0:
        return Reduction(0.0, 0.0)

    bound = factor * abs(n)

    if precision_depth is None:
        depth = certifying_depth(alpha, bound)
    else:
        try:
            q = alpha.denominator(precision_depth)
        except (InsufficientDepthException, DepthCapExceededException):
            q = 0

        if q <= bound:
            error = ('q_{} does not exceed {} so n={} cannot be certified'
                     ).format(precision_depth, bound, n)
            logger.exception(error)
            raise PrecisionUnavailableException(error)

        depth = precision_depth

    exact = (n * Fraction(alpha.numerator(depth), alpha.denominator(depth))) % 1
    value = float(exact)

    if value >= 1.0:
        value = 0.0

    return Reduction(value, _error_bound(alpha, abs(n), depth))


def orbit(alpha, start, count, factor=DEFAULT_CERTIFICATION):
    """numpy array of (start + j) * alpha mod 1 for j = 0..count-1"""
    values = np.zeros(max(count, 0))

    if count <= 0:
        return values

    extreme = max(abs(start), abs(start + count - 1))

    if extreme == 0:
        return values

    depth = certifying_depth(alpha, factor * extreme)
    p, q = alpha.numerator(depth), alpha.denominator(depth)
    residue = (start * p) % q
    step = p % q

    for j in range(count):
        values[j] = residue / q
        residue += step

        if residue >= q:
            residue -= q

    values[values >= 1.0] = 0.0

    return values
