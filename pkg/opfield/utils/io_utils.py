# /*
#  * -----------------------------------------------------------------------------
#  *  Copyright (c) 2025 Magda Kowalska. All rights reserved.
#  *
#  *  This software and its source code are the intellectual property of
#  *  Magda Kowalska. Unauthorized copying, reproduction, or use of this
#  *  software, in whole or in part, is strictly prohibited without express
#  *  written permission.
#  *
#  *  This software is protected under the Berne Convention for the Protection
#  *  of Literary and Artistic Works, EU copyright law, and international
#  *  copyright treaties.
#  *
#  *  Author: Magda Kowalska
#  *  Created: 2026-10-19
#  *  Last Modified: 2026-10-19
#  * -----------------------------------------------------------------------------
#  */

import json
import math
import os
from typing import Any, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError
from pydantic_core import PydanticSerializationError, to_jsonable_python

from opfield.exceptions import FileFormatError
from opfield.models import EigenvalueField

Model = TypeVar("Model", bound=BaseModel)

FLOAT_FORMAT = ".17g"


def _numpy_fallback(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _format(value: Any, indent: int, level: int) -> str:
    """Plain JSON data to text; floats are the only values json.dumps does not write"""
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot write non-finite number {value}")
        return format(value, FLOAT_FORMAT)
    if isinstance(value, dict) and value:
        items = [f"{pad}{json.dumps(k)}: {_format(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list) and value:
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_format(v, indent, level + 1) for v in value) + "]"
        items = [pad + _format(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    return json.dumps(value)


def dumps(value: Any, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits"""
    try:
        plain = to_jsonable_python(value, inf_nan_mode="constants", fallback=_numpy_fallback)
    except PydanticSerializationError as exc:
        raise TypeError(str(exc)) from exc
    return _format(plain, indent, 0) + "\n"


def write_json(path: str, value: Any) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(value))
    return path


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def read_json(path: str) -> Any:
    """Parse JSON, rejecting NaN/Infinity; errors carry line and column"""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise FileFormatError(path, f"cannot read file: {exc.strerror}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        source = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else None
        raise FileFormatError(path, exc.msg, exc.lineno, exc.colno, source) from exc
    except ValueError as exc:
        raise FileFormatError(path, str(exc)) from exc


def read_model(path: str, model: Type[Model]) -> Model:
    data = read_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise FileFormatError(path, f"{where}: {first['msg']}") from exc


def write_csv(path: str, frame: pd.DataFrame) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def curves_frame(result: EigenvalueField) -> pd.DataFrame:
    """One row per node: x, then the scalar eigenvalues of every block"""
    scalars = result.scalar_curves
    columns = {"x": result.grid}
    for i in range(result.n):
        for k in range(result.p):
            columns[f"lambda_{i + 1}_{k + 1}"] = scalars[i, :, k]
    return pd.DataFrame(columns)
