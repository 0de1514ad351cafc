import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import main_config
from .exceptions import ConsistencyError
from .typing import StrOrPath
from .validate import validate_path_arg, validate_str_arg

logger = logging.getLogger(__name__)


class RegressionStore:
    """Frozen regression constants kept as key,value rows in a CSV file

    The first `check` of a key freezes its value. Later checks compare the
    decimal string exactly. Values are only written on `flush`.

    """

    def __init__(self, location: Optional[StrOrPath] = None):
        if location is None:
            location = main_config.get("regression", "path")
        self._location = validate_path_arg("location", location)
        self._cached: List[Tuple[str, str]] = []
        self._frozen: Optional[Dict[str, str]] = None

    @property
    def location(self) -> Path:
        return self._location

    def truncate(self):
        with open(self.location, "a+", encoding="utf-8", newline="") as file:
            file.seek(0)
            file.truncate(0)
        self._frozen = {}

    def load_all(self) -> Dict[str, str]:
        keyed_items = {}
        try:
            with open(self.location, "r", encoding="utf-8", newline="") as file:
                for row in csv.reader(file):
                    if len(row) >= 2 and row[0]:
                        keyed_items[row[0]] = row[1]
        except FileNotFoundError:
            logger.info("No regression file at %s yet", self.location)
        return keyed_items

    @property
    def frozen(self) -> Dict[str, str]:
        if self._frozen is None:
            self._frozen = self.load_all()
        return self._frozen

    def get(self, key: str) -> Optional[str]:
        key = validate_str_arg("key", key)
        for cached_key, value in self._cached:
            if cached_key == key:
                return value
        return self.frozen.get(key)

    def append(self, key: str, value) -> None:
        """Queues one value; call `flush` to persist it"""
        key = validate_str_arg("key", key)
        self._cached.append((key, str(value)))

    def check(self, key: str, value) -> bool:
        """Freezes the value on first sight, compares exactly afterwards"""
        value = str(value)
        previous = self.get(key)
        if previous is None:
            self.append(key, value)
            return True
        if previous != value:
            logger.warning("Regression %s changed: %s -> %s", key, previous, value)
            return False
        return True

    def require(self, key: str, value) -> None:
        if not self.check(key, value):
            raise ConsistencyError(
                f"Regression value {key} is {value}, frozen as {self.get(key)}"
            )

    def flush(self):
        if not self._cached:
            return
        merged = dict(self.frozen)
        merged.update(self._cached)
        self.location.parent.mkdir(parents=True, exist_ok=True)
        with open(self.location, "w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            for key in sorted(merged):
                writer.writerow([key, merged[key]])
        self._frozen = merged
        self._cached = []
