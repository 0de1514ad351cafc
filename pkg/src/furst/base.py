from fractions import Fraction
from pprint import pprint
from typing import Any, Dict, Generic, List, Optional, Type, TypeVar

from .exceptions import PrepareError
from .structure import Angle, SUnit

T = TypeVar("T")


def class_decorator(cls):
    fields = []
    extra_fields = []
    for att_name in cls.__dict__:
        if att_name.startswith("_"):
            continue
        att = getattr(cls, att_name)
        if callable(att):
            continue

        if isinstance(att, property):
            extra_fields.append(att_name)
        else:
            fields.append(att_name)

    cls._fields = fields
    cls._extra_fields = extra_fields
    cls.fields = [*fields, *extra_fields]
    cls.set_string_format(cls._string_format, prefix_class=True)
    cls._original_string_format = cls.get_string_format()
    return cls


class BaseObject:
    """Base report record

    Field values are prepared by their declared Field, so a record can be
    built from native Python values or from the decimal strings produced by
    `to_json`.

    """

    fields = []  # set in class_decorator
    _fields = []
    _string_format = ""  # set in each
    _original_string_format = ""

    @classmethod
    def get_string_format(cls):
        return cls._string_format

    @classmethod
    def set_string_format(cls, string_format: str, prefix_class: bool = False):
        try:
            string_format.format(**cls._sample_values())
        except Exception as e:
            raise ValueError("Invalid formatting string") from e

        if prefix_class:
            string_format = f"{cls.__name__}: " + string_format

        cls._string_format = string_format

    @classmethod
    def _sample_values(cls) -> Dict:
        values = {f: "test" for f in cls.fields}
        for name in cls._fields:
            values[name] = getattr(cls._field(name), "sample", "test")
        return values

    @classmethod
    def reset_string_format(cls):
        cls._string_format = cls._original_string_format

    @classmethod
    def from_dict(cls, data: Dict):
        """Used when reading back a JSON report"""
        return cls(data)

    @classmethod
    def build(cls, **values):
        return cls(values)

    def __init__(self, data: Dict):
        self.raw_data = data
        self.data = {}
        for field in self._fields:
            raw_value = data.get(field)
            prepared_value = self._field(field).safe_prepare(raw_value)
            setattr(self, field, prepared_value)
            self.data[field] = prepared_value

    @classmethod
    def _field(cls, name: str) -> "Field":
        return cls.__dict__[name]

    def to_dict(self) -> Dict:
        return {f: getattr(self, f) for f in self.fields}

    def to_json(self) -> Dict:
        """Numbers become decimal strings so nothing loses precision"""
        encoded = {}
        for name in self._fields:
            encoded[name] = self._field(name).dump(getattr(self, name))
        for name in self._extra_fields:
            encoded[name] = dump_value(getattr(self, name))
        return encoded

    def pprint(self):
        pprint(self.to_dict(), sort_dicts=False)

    def __eq__(self, other):
        if not isinstance(other, self.__class__):
            return NotImplemented
        return self.data == other.data

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.data!r})"

    def __str__(self):
        if not self._string_format:
            class_name = self.__class__.__name__
            all_str = []
            for current_field in self.fields:
                current_value = getattr(self, current_field)
                if current_value:
                    all_str.append(str(current_value))
            fields_str = " ".join(all_str)
            return f"{class_name} {fields_str}"

        all_data = {f: getattr(self, f) for f in self.fields}
        return self._string_format.format(**all_data)


def dump_value(value: Any) -> Any:
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, BaseObject):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [dump_value(v) for v in value]
    if isinstance(value, float):
        return repr(value)
    return str(value)


class Field(Generic[T]):
    """Base field class"""

    sample: Any = "test"

    def __set_name__(self, owner: Type[BaseObject], name):
        self._field_name = f"{owner.__name__}.{name}"

    @property
    def field_name(self) -> str:
        return getattr(self, "_field_name", self.__class__.__name__)

    def safe_prepare(self, value: Any) -> Optional[T]:
        if value in (None, ""):
            return None
        try:
            return self.prepare(value)
        except Exception as error:
            raise PrepareError(self, value, inner=error) from error

    def prepare(self, value: Any) -> T:
        return value

    def dump(self, value: Optional[T]) -> Any:
        return dump_value(value)


class StringField(Field[str]):
    """Field of string type"""

    def prepare(self, value: Any) -> str:
        return str(value)


class BooleanField(Field[bool]):
    """Field of boolean type"""

    sample = False

    BOOL_MAPPING = {"true": True, "false": False}

    def prepare(self, value: Any) -> bool:
        if isinstance(value, str):
            return self.BOOL_MAPPING[value.strip().lower()]
        assert isinstance(value, bool), f"Invalid type passed to {self.field_name}"
        return value


class IntegerField(Field[int]):
    """Field of int type, serialised as a decimal string"""

    sample = 0

    def prepare(self, value: Any) -> int:
        if isinstance(value, float):
            raise TypeError("Integer fields never take floats")
        return int(value)


class FractionField(Field[Fraction]):
    """Field of exact rational type, serialised as p/q"""

    sample = Fraction(0)

    def prepare(self, value: Any) -> Fraction:
        if isinstance(value, float):
            raise TypeError("Rational fields never take floats")
        return Fraction(value)


class FloatField(Field[float]):
    """Field of floating point type, serialised with repr"""

    sample = 0.0

    def prepare(self, value: Any) -> float:
        return float(value)


class AngleField(Field[Angle]):
    """Field for a point of the circle"""

    def prepare(self, value: Any) -> Angle:
        if isinstance(value, Angle):
            return value
        if isinstance(value, Fraction):
            return Angle.from_fraction(value)
        return Angle.from_string(value)


class SUnitField(Field[SUnit]):
    """Field for an element a^u b^v, serialised as u,v,value"""

    def prepare(self, value: Any) -> SUnit:
        if isinstance(value, SUnit):
            return value
        return SUnit.from_string(value)


class ListField(Field[List[T]]):
    """Field of a list with specific type"""

    def __init__(self, item_field: Optional[Field] = None):
        self.item_field = item_field or Field()

    def prepare(self, value: Any) -> List[T]:
        return [self.item_field.prepare(v) for v in value]

    def dump(self, value: Optional[List[T]]) -> Any:
        if value is None:
            return None
        return [self.item_field.dump(v) for v in value]


class RecordField(Field[BaseObject]):
    """Field holding a nested record"""

    def __init__(self, record_class: Type[BaseObject]):
        self.record_class = record_class

    def prepare(self, value: Any) -> BaseObject:
        if isinstance(value, self.record_class):
            return value
        return self.record_class.from_dict(value)
