"""
JSON and CSV rendering shared by the CLI and the surface/table exports.

Floats are always written with 17 significant digits so that identical runs
produce byte-identical output.
"""
import csv
import dataclasses
import io
import json
import math
import re
from enum import Enum
from typing import Any, Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel

FLOAT_FORMAT = "%.17g"
_TOKEN = "__float_{}__"
_TOKEN_PATTERN = re.compile(r'"__float_(\d+)__"')


def format_float(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return FLOAT_FORMAT % value


def to_jsonable(obj: Any) -> Any:
    """Plain python structure for pydantic models, numpy values, enums and dyadic objects."""
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(by_alias=True))
    if isinstance(obj, Enum):
        return obj.value
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj: Any, indent: int = 2) -> str:
    floats: List[float] = []

    def tokenize(value: Any) -> Any:
        if isinstance(value, float):
            floats.append(value)
            return _TOKEN.format(len(floats) - 1)
        if isinstance(value, dict):
            return {k: tokenize(v) for k, v in value.items()}
        if isinstance(value, list):
            return [tokenize(v) for v in value]
        return value

    text = json.dumps(tokenize(to_jsonable(obj)), indent=indent)
    return _TOKEN_PATTERN.sub(lambda m: format_float(floats[int(m.group(1))]), text)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()
