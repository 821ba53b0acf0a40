import copy
import math

from collections import OrderedDict

from .field import Boolean, Field, FieldManager, Float, Integer, Json, String
from .util import camel_to_underscore, SCHEMA_PREFIX


RECORD_MAP = {}


class _RecordType(type):
    """collects the Field attributes of a record class in declaration order,
    subclass columns first and inherited columns after them, and registers
    the class in RECORD_MAP under its schema name
    """

    def __new__(cls, name, bases, attrs):
        own = sorted(((key, val) for key, val in attrs.items()
                      if isinstance(val, Field)),
                     key=lambda item: item[1].creation_counter)
        declared = OrderedDict(own)

        for base in bases:
            for key, val in getattr(base, '_declared_fields', {}).items():
                if key not in declared:
                    declared[key] = val

        for key, val in declared.items():
            if not val.name:
                val.name = key

        attrs['_declared_fields'] = declared

        if not attrs.get('schema') and name != 'Record':
            attrs['schema'] = camel_to_underscore(name).replace('_record', '')

        cls = super(_RecordType, cls).__new__(cls, name, bases, attrs)

        if attrs.get('schema'):
            RECORD_MAP[attrs['schema']] = cls

        return cls

    def __str__(cls):
        return camel_to_underscore(cls.__name__)


def get_record(schema):
    if schema not in RECORD_MAP:
        raise KeyError('no record registered for schema {}'.format(schema))

    return RECORD_MAP[schema]


class Record(metaclass=_RecordType):
    schema = None
    version = 1
    experiment = String()
    error = String()
    provenance = String()

    def __init__(self, data=None, provenance=None):
        fields = OrderedDict((key, copy.deepcopy(val)) for key, val in
                             self._declared_fields.items())
        self.fields = FieldManager(fields=fields)
        self.fields.hydrate(data or {})

        if provenance:
            self.fields['provenance'] = provenance

        if self.fields['experiment'] is None:
            self.fields['experiment'] = self.schema

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__, dict(self.data))

    def __getitem__(self, name):
        return self.fields[name]

    def __setitem__(self, name, value):
        self.fields[name] = value

    @classmethod
    def schema_line(cls):
        return '# schema: {}.{}/v{}'.format(SCHEMA_PREFIX, cls.schema,
            cls.version)

    @classmethod
    def header(cls):
        return [field.name for field in cls._declared_fields.values()]

    @property
    def data(self):
        return self.fields.data

    @property
    def failed(self):
        return bool(self.fields['error'])

    def csv_row(self):
        return self.fields.output

    def json_row(self):
        """the row as a dict keyed by column; non finite floats use the same
        text as the CSV
        """
        row = OrderedDict()

        for name, value in self.fields.data.items():
            if isinstance(value, float) and not math.isfinite(value):
                value = self.fields.fields[name].output

            row[name] = value

        return row


class ConvergentRecord(Record):
    schema = 'cf'
    n = Integer()
    p = Integer()
    q = Integer()
    delta_lo = Float()
    delta_hi = Float()
    ln_ratio = Float()


class DeterminantRecord(Record):
    schema = 'det'
    coupling = Float('lambda')
    theta = Float()
    energy = Float()
    k = Integer()
    sign = Integer()
    log_abs = Float()
    rate = Float()
    growth_rate = Float()


class GreenRecord(Record):
    schema = 'green'
    coupling = Float('lambda')
    theta = Float()
    energy = Float()
    x1 = Integer()
    x2 = Integer()
    y = Integer()
    sign_left = Integer()
    log_left = Float()
    sign_right = Integer()
    log_right = Float()
    decay_rate = Float()


class ResonanceRecord(Record):
    schema = 'resonance'
    y = Integer()
    n = Integer()
    q_n = Integer()
    b_n = Float()
    resonant = Boolean()
    ell = Integer()
    distance = Integer()


class UniformityRecord(Record):
    schema = 'uniformity'
    coupling = Float('lambda')
    theta = Float()
    n = Integer()
    ell = Integer()
    q_n = Integer()
    i1 = Json()
    i2 = Json()
    epsilon_achieved = Float()
    bound = Float()
    beta_proxy = Float()
    uniform = Boolean()
    grid_size = Integer()


class DecayRecord(Record):
    schema = 'decay'
    coupling = Float('lambda')
    beta_proxy = Float()
    q_n = Integer()
    energy = Float()
    fitted_rate = Float()
    floor = Float()
    r_squared = Float()
    box_size = Integer()


class LyapunovRecord(Record):
    schema = 'lyapunov'
    coupling = Float('lambda')
    energy = Float()
    steps = Integer()
    theta_samples = Integer()
    lyapunov = Float()
    ln_lambda = Float()


class SweepRecord(Record):
    schema = 'sweep'
    coupling = Float('lambda')
    theta = Float()
    beta_proxy = Float()
    q_n = Integer()
    box_size = Integer()
    pairs = Integer()
    min_rate = Float()
    mean_rate = Float()
    max_rate = Float()
    floor = Float()
