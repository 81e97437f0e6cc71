# -*- coding: utf-8 -*-


from collections.abc import Sequence
from typing import TypeVar, Union

import numpy as np
import numpy.typing as npt

from ..errors import InvalidInputError

T = TypeVar("T")


def ensure_list(obj: Union[Sequence[T], T]) -> list[T]:
    if isinstance(obj, Sequence) and not isinstance(obj, str):
        return list(obj)
    return [obj]  # type: ignore[list-item]


def as_float_vector(values: npt.ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        err_msg = f"`{name}` must be one-dimensional, but found shape {arr.shape}."
        raise InvalidInputError(err_msg)
    return arr
