import json
import math

from collections import OrderedDict


class FieldManager:
    """ordered collection of output columns keyed by column name. the order
    of `fields` is the column order of every CSV and JSON row
    """

    def __init__(self, fields=None):
        self.fields = OrderedDict()

        for name, field in (fields or {}).items():
            if not field.name:
                field.name = name

            self.fields[field.name] = field

    def __getitem__(self, name):
        return self.fields[name].value

    def __setitem__(self, name, value):
        self.fields[name].set(value)

    def __contains__(self, name):
        return name in self.fields

    def __len__(self):
        return len(self.fields)

    def hydrate(self, data):
        for key, val in data.items():
            if key in self.fields:
                self.fields[key].set(val)

        return self

    def empty(self):
        for field in self.fields.values():
            field.empty()

        return self

    @property
    def header(self):
        return [field.name for field in self.fields.values()]

    @property
    def data(self):
        return OrderedDict((field.name, field.value)
                           for field in self.fields.values())

    @property
    def output(self):
        return [field.output for field in self.fields.values()]


class Field:
    creation_counter = 0

    def __init__(self, name=None, default=None):
        self.name = name
        self.default = default
        self._value = None
        self._set = False
        self.creation_counter = Field.creation_counter
        Field.creation_counter += 1

    def __repr__(self):
        return '{}(name={}, value={})'.format(self.__class__.__name__,
            self.name, self.value)

    def set(self, value):
        self._value = value
        self._set = True

        return self

    def empty(self):
        self._value = None
        self._set = False

        return self

    @property
    def value(self):
        value = self._value if self._set else self.default

        if value is None:
            return None

        return self.to_python(value)

    @property
    def output(self):
        value = self.value

        if value is None:
            return ''

        return self.to_output(value)

    def to_python(self, value):
        return value

    def to_output(self, value):
        return str(value)


class String(Field):

    def to_python(self, value):
        return str(value)


class Integer(Field):
    """exact integers of any size; continued fraction denominators overflow
    every fixed-width type
    """

    def to_python(self, value):
        if isinstance(value, bool):
            return int(value)

        if isinstance(value, int):
            return value

        return int(float(value))


class Float(Field):

    def to_python(self, value):
        return float(value)

    def to_output(self, value):
        if math.isnan(value):
            return 'nan'

        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'

        return repr(value)


class Boolean(Field):

    def to_python(self, value):
        if isinstance(value, str):
            return value.lower().strip() == 'true'

        return bool(value)

    def to_output(self, value):
        return 'true' if value else 'false'


class Json(Field):
    """nested values (boxes, phase lists) kept as compact json text in CSV"""

    def to_python(self, value):
        if isinstance(value, str) and len(value.replace(' ', '')):
            return json.loads(value)

        return value

    def to_output(self, value):
        return json.dumps(value, separators=(',', ':'), sort_keys=True)
