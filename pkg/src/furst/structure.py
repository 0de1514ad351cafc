import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from math import gcd
from typing import Dict, Iterable, Iterator, Optional, Tuple

from .exceptions import DomainError, ParameterError
from .validate import validate_int_arg


@dataclass(frozen=True)
class SUnitParams:
    """Coprime bases a, b of the multiplicative set"""

    a: int
    b: int

    def __post_init__(self):
        a = validate_int_arg("a", self.a)
        b = validate_int_arg("b", self.b)
        if a < 2 or b < 2:
            raise ParameterError(f"Bases must be at least 2, got a={a}, b={b}")
        if gcd(a, b) != 1:
            raise ParameterError(f"Bases must be coprime, gcd({a}, {b}) = {gcd(a, b)}")

    @classmethod
    def from_string(cls, input_string: str) -> "SUnitParams":
        segments = input_string.split(",")
        if len(segments) != 2:
            raise ValueError("Invalid bases string, expected 'a,b'")
        return cls(int(segments[0]), int(segments[1]))

    def __str__(self):
        return f"{self.a},{self.b}"


@total_ordering
@dataclass(frozen=True)
class SUnit:
    """One element a^u b^v of the multiplicative set"""

    u: int
    v: int
    value: int

    @classmethod
    def build(cls, params: SUnitParams, u: int, v: int) -> "SUnit":
        return cls(u, v, params.a**u * params.b**v)

    def check(self, params: SUnitParams) -> bool:
        expected = params.a**self.u * params.b**self.v
        return self.u >= 0 and self.v >= 0 and self.value == expected

    def times_b(self, params: SUnitParams, w: int) -> "SUnit":
        return SUnit(self.u, self.v + w, self.value * params.b**w)

    def __lt__(self, other: "SUnit"):
        return self.value < other.value

    @classmethod
    def from_string(cls, input_string: str) -> "SUnit":
        segments = input_string.split(",")
        if len(segments) != 3:
            raise ValueError("Invalid SUnit string, expected 'u,v,value'")
        return cls(*(int(s) for s in segments))

    def __str__(self):
        return f"{self.u},{self.v},{self.value}"


@total_ordering
@dataclass(frozen=True)
class Angle:
    """Exact point of the circle R/Z, stored as a reduced fraction in [0, 1)"""

    num: int
    den: int = 1

    def __post_init__(self):
        if self.den <= 0:
            raise DomainError(f"Angle denominator must be positive, got {self.den}")
        num = self.num % self.den
        common = gcd(num, self.den)
        object.__setattr__(self, "num", num // common)
        object.__setattr__(self, "den", self.den // common)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Angle":
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @classmethod
    def from_string(cls, input_string: str) -> "Angle":
        return cls.from_fraction(Fraction(input_string.strip()))

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    def scale(self, q: int) -> "Angle":
        return Angle(q * self.num, self.den)

    def __add__(self, other: "Angle") -> "Angle":
        return Angle.from_fraction(self.value + other.value)

    def __sub__(self, other: "Angle") -> "Angle":
        return Angle.from_fraction(self.value - other.value)

    def __lt__(self, other: "Angle"):
        return self.num * other.den < other.num * self.den

    def __float__(self):
        return self.num / self.den

    def __str__(self):
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class PointSet:
    """Strictly ascending distinct angles"""

    points: Tuple[Angle, ...] = ()

    def __post_init__(self):
        for previous, current in zip(self.points, self.points[1:]):
            if not previous < current:
                raise DomainError("PointSet must be strictly ascending")

    @classmethod
    def from_iterable(cls, points: Iterable[Angle]) -> "PointSet":
        return cls(tuple(sorted(set(points))))

    @classmethod
    def from_string(cls, input_string: str) -> "PointSet":
        lines = [line.strip() for line in input_string.splitlines()]
        return cls.from_iterable(Angle.from_string(line) for line in lines if line)

    def __len__(self):
        return len(self.points)

    def __iter__(self) -> Iterator[Angle]:
        return iter(self.points)

    def __getitem__(self, index: int) -> Angle:
        return self.points[index]

    def __str__(self):
        return "\n".join(str(p) for p in self.points)


@dataclass(frozen=True)
class DigitSet:
    """Residues modulo a^n; source_bound is the Σ-budget that produced them"""

    a: int
    n: int
    residues: Tuple[int, ...] = field(default_factory=tuple)
    source_bound: Optional[int] = None

    def __post_init__(self):
        if self.a < 2 or self.n < 0:
            raise DomainError(f"Invalid digit set shape a={self.a}, n={self.n}")
        residues = tuple(sorted(set(self.residues)))
        if residues and not (0 <= residues[0] and residues[-1] < self.modulus):
            raise DomainError(f"Residues must lie in [0, {self.a}^{self.n})")
        object.__setattr__(self, "residues", residues)

    @property
    def modulus(self) -> int:
        return self.a**self.n

    def __len__(self):
        return len(self.residues)

    def __iter__(self) -> Iterator[int]:
        return iter(self.residues)

    @classmethod
    def from_json(cls, data: Dict) -> "DigitSet":
        bound = data.get("source_bound")
        return cls(
            int(data["a"]),
            int(data["n"]),
            tuple(int(r) for r in data["residues"]),
            None if bound is None else int(bound),
        )

    def to_json(self) -> Dict:
        data = {"a": self.a, "n": self.n, "residues": list(self.residues)}
        if self.source_bound is not None:
            data["source_bound"] = str(self.source_bound)
        return data

    @classmethod
    def from_string(cls, input_string: str) -> "DigitSet":
        return cls.from_json(json.loads(input_string))

    def __str__(self):
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    index: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class PsiSpec:
    """Power law psi(t) = k1 * t^(-k2)"""

    k1: Fraction
    k2: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "k1", Fraction(self.k1))
        object.__setattr__(self, "k2", Fraction(self.k2))
        if self.k1 <= 0:
            raise DomainError(f"k1 must be positive, got {self.k1}")
        if self.k2 < 1:
            raise DomainError(f"k2 must be at least 1, got {self.k2}")

    @property
    def exact(self) -> bool:
        return self.k2.denominator == 1

    def psi(self, t: int) -> float:
        return float(self.k1) * float(t) ** -float(self.k2)

    def inverse(self, t: float) -> float:
        """Inverse of t -> 1/psi(t)"""
        return (float(self.k1) * t) ** (1 / float(self.k2))

    @classmethod
    def from_string(cls, input_string: str) -> "PsiSpec":
        segments = input_string.split(",")
        if len(segments) == 1:
            return cls(Fraction(segments[0]))
        return cls(Fraction(segments[0]), Fraction(segments[1]))

    def __str__(self):
        return f"{self.k1},{self.k2}"


@dataclass(frozen=True)
class BumpSpec:
    """Fejér triangle kernel of width 1/H"""

    H: float

    def __post_init__(self):
        if not float(self.H) > 1:
            raise DomainError(f"Bump width H must exceed 1, got {self.H}")

    def __str__(self):
        return f"H={self.H}"
