"""
Local object descriptor model
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError


DESCRIPTOR_DIM = 128


@dataclass(frozen=True)
class LocalDescriptor:
    """128-d rotation/translation-invariant object feature f_i"""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.shape != (DESCRIPTOR_DIM,):
            raise InvalidInputError(f"Descriptor must have {DESCRIPTOR_DIM} entries, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("Descriptor contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))
