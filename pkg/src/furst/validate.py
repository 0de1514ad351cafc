from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional

from .exceptions import DomainError


def validate_int_arg(name: str, value: Any, default: Optional[int] = None) -> int:
    if value is None:
        if default is None:
            raise ValueError(f"Missing {name}")
        else:
            value = default
    if isinstance(value, str):
        value = int(value.strip())
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"Invalid {name} type")
    return value


def validate_min_int_arg(name: str, value: Any, minimum: int) -> int:
    value = validate_int_arg(name, value)
    if value < minimum:
        raise DomainError(f"{name} must be at least {minimum}, got {value}")
    return value


def validate_str_arg(name: str, value: Any, strip=True) -> str:
    if value is None:
        raise ValueError(f"Missing {name}")
    if not isinstance(value, str):
        raise TypeError(f"Invalid {name} type")
    if strip:
        value = value.strip()
    return value


def validate_fraction_arg(name: str, value: Any) -> Fraction:
    """Accepts "p/q", decimal strings, ints and Fractions; never floats"""
    if value is None:
        raise ValueError(f"Missing {name}")
    if isinstance(value, str):
        value = Fraction(value.strip())
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"Invalid {name} type, use an exact rational")
    if isinstance(value, int):
        value = Fraction(value)
    if not isinstance(value, Fraction):
        raise TypeError(f"Invalid {name} type")
    return value


def validate_real_arg(name: str, value: Any) -> float:
    if value is None:
        raise ValueError(f"Missing {name}")
    if isinstance(value, str):
        value = float(Fraction(value.strip()))
    if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
        raise TypeError(f"Invalid {name} type")
    return float(value)


def validate_open_interval_arg(name: str, value: Any, low: float, high: float) -> float:
    value = validate_real_arg(name, value)
    if not low < value < high:
        raise DomainError(f"{name} must lie in ({low}, {high}), got {value}")
    return value


def validate_choice_arg(name: str, value: Any, choices: Iterable[str]) -> str:
    value = validate_str_arg(name, value).lower()
    choices = tuple(choices)
    if value not in choices:
        raise DomainError(f"{name} must be one of {', '.join(choices)}, got {value}")
    return value


def validate_path_arg(name: str, value: Any) -> Path:
    if value is None:
        raise ValueError(f"Missing {name}")
    if isinstance(value, str):
        value = Path(value)
    if not isinstance(value, Path):
        raise TypeError(f"Invalid {name} type")
    return value

