import csv
import json
from fractions import Fraction
from io import StringIO
from typing import Dict, Iterable, Sequence

import numpy as np
from scipy.stats import spearmanr

from .structure import Angle
from .validate import validate_int_arg


def create_table_structure(data, num_columns=2, suppress_empty_values=False):
    keys = list(data.keys())

    if suppress_empty_values:
        keys = [key for key in keys if data[key] not in ("", None)]

    num_columns = max(1, min(num_columns, len(keys)))
    num_rows = len(keys) // num_columns
    if len(keys) % num_columns != 0:
        num_rows += 1

    table = []

    for i in range(num_columns):
        column_keys = keys[i * num_rows : (i + 1) * num_rows]
        if not column_keys:
            continue
        max_key_width = max(len(key) for key in column_keys)
        max_value_width = max(len(str(data[key])) for key in column_keys)

        column_data = [(key, str(data[key])) for key in column_keys]
        column_metadata = (max_key_width, max_value_width)

        table.append((column_metadata, column_data))

    return table


def render_ascii_table(table_structure, fixed_value_width=None, max_width=None):
    num_columns = len(table_structure)
    num_rows = max((len(column_data) for _, column_data in table_structure), default=0)

    table = ""

    for row_index in range(num_rows):
        for col_index in range(num_columns):
            metadata, rows = table_structure[col_index]
            max_key_width, max_value_width = metadata
            if row_index < len(rows):
                key, value = rows[row_index]
            else:
                key = ""
                value = ""

            value_width = (
                fixed_value_width if fixed_value_width is not None else max_value_width
            )
            if max_width:
                value_width = min(max_width, value_width)

            # Long values are cut with an ellipsis marker
            if len(value) > value_width:
                value = value[: max(value_width - 1, 0)] + "~"

            dots = "." * (max_key_width - len(key) + 1)

            if key == "" and value == "":
                key_width = len(key) + len(dots)
                table += " " * (key_width + value_width + 2)
            else:
                table += f"{key}{dots}: {value:{value_width}}"

            if col_index < num_columns - 1:
                table += "  "
            else:
                table = table.rstrip() + "\n"

    return table


def format_table(data: Dict, max_width=40) -> str:
    flat = {k: v for k, v in data.items() if not isinstance(v, (list, dict))}
    table = create_table_structure(flat, suppress_empty_values=True)
    return render_ascii_table(table, max_width=max_width)


def pprint_data(data: Dict):
    print(format_table(data))


def get_csv_from_rows(rows: Iterable[Sequence], header: Sequence[str] = ()) -> str:
    csv_data = StringIO()
    writer = csv.writer(csv_data, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([str(v) for v in row])
    csv_string = csv_data.getvalue()
    csv_data.close()
    return csv_string


def get_tuple_from_csv(csv_string: str) -> tuple:
    csv_data = StringIO(csv_string)
    reader = csv.reader(csv_data)
    row = next(reader)
    csv_data.close()
    return tuple(row)


class StrEncoder(json.JSONEncoder):
    """Helps encoding flat data, exact numbers become decimal strings"""

    def default(self, obj):
        if isinstance(obj, (Fraction, Angle)):
            return str(obj)
        if isinstance(obj, np.integer):
            return str(int(obj))
        if isinstance(obj, np.floating):
            return repr(float(obj))
        try:
            encoded = super().default(obj)
        except TypeError:
            encoded = str(obj)
        return encoded


def dumps(data) -> str:
    return json.dumps(data, cls=StrEncoder, indent=2)


def make_rng(seed=0) -> np.random.Generator:
    """The one seeded generator used everywhere: numpy PCG64"""
    seed = validate_int_arg("seed", seed, default=0)
    if not 0 <= seed < 2**64:
        raise ValueError("Seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(seed))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation, ties ranked by their average"""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("Spearman correlation needs two sequences of length >= 2")
    return float(spearmanr(xs, ys)[0])
