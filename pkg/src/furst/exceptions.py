from functools import cached_property
from typing import TYPE_CHECKING, Any, Dict, Optional

if TYPE_CHECKING:
    from .base import Field


class FurstError(Exception):
    """Baseclass for all errors from this library"""

    def __init__(self, message: str, inner: Optional[Exception] = None):
        super().__init__(message, inner)
        self._message = message
        self._inner = inner

    @property
    def message(self):
        return self._message

    @property
    def inner(self):
        return self._inner

    @cached_property
    def detail(self):
        return self.build_detail()

    @cached_property
    def help_message(self):
        return self.build_help_message()

    def build_detail(self, message: Optional[str] = None):
        message = message or self.message
        if self.inner:
            message = f"{message} ({self.inner})"
        return message

    def build_help_message(self):
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error object for the diagnostic stream"""
        data = {"error": self.__class__.__name__, "message": self.detail}
        if self.help_message:
            data["help"] = self.help_message
        return data

    def __str__(self):
        return self.detail


class PrepareError(FurstError):
    """Happens when a field from a record cannot be interpreted"""

    def __init__(self, field: "Field", value: Any, inner: Optional[Exception] = None):
        super().__init__("Error preparing field", inner=inner)
        self._field = field
        self._value = value

    @property
    def field(self):
        return self._field

    @property
    def value(self):
        return self._value

    def build_detail(self):
        message = f"Could not prepare field {self._field.field_name}"
        return super().build_detail(message)


class ParameterError(FurstError):
    """When the bases a, b do not define a valid multiplicative set"""

    pass


class DomainError(FurstError):
    """When an argument lies outside the domain of an operation"""

    pass


class PreconditionError(FurstError):
    """When the inputs violate a stated precondition such as M < Q"""

    pass


class DegenerateInputError(FurstError):
    """When a construction has too little material to proceed"""

    pass


class ConsistencyError(FurstError):
    """When artefacts disagree or an exact assertion fails"""

    pass


class ResourceError(FurstError):
    """When an enumeration would exceed the configured element budget"""

    def __init__(self, message: str, budget: int, inner: Optional[Exception] = None):
        super().__init__(message, inner=inner)
        self._budget = budget

    @property
    def budget(self):
        return self._budget

    def to_dict(self):
        data = super().to_dict()
        data["budget"] = str(self._budget)
        return data

    def build_help_message(self):
        return (
            f"The element budget is {self._budget}. Raise it with --budget, "
            "the FURST_ELEMENT_BUDGET environment variable or "
            "element_budget under [limits] in furst.ini."
        )


class PrecisionError(FurstError):
    """When interval arithmetic cannot decide a comparison"""

    def __init__(
        self, message: str, required_bits: int, inner: Optional[Exception] = None
    ):
        super().__init__(message, inner=inner)
        self._required_bits = required_bits

    @property
    def required_bits(self):
        return self._required_bits

    def build_detail(self):
        message = f"{self.message} (needs about {self._required_bits} bits)"
        return super().build_detail(message)

    def to_dict(self):
        data = super().to_dict()
        data["required_bits"] = str(self._required_bits)
        return data

    def build_help_message(self):
        return (
            f"Rerun with --bits {self._required_bits} or more, or set "
            "FURST_BITS. Decimal inputs also need more digits."
        )
