from pathlib import Path
from typing import Union

StrOrPath = Union[str, Path]
