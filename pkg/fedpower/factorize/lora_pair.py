from dataclasses import dataclass

import numpy as np

from fedpower.exceptions import ShapeError
from fedpower.linalg import as_matrix


@dataclass(frozen=True)
class LoRAPair:
    """Adapter factors: `b` (m x r) times `a` (r x n) is the weight update."""

    a: np.ndarray
    b: np.ndarray
    # directions an orthonormalization had to fill with random draws
    deficient: int = 0

    def __post_init__(self):
        a = as_matrix(self.a, "A")
        b = as_matrix(self.b, "B")
        if a.shape[0] != b.shape[1]:
            raise ShapeError(f"A is {a.shape} but B is {b.shape}; ranks disagree")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def rank(self):
        return self.a.shape[0]

    @property
    def shape(self):
        """(m, n) of the merged update."""
        return self.b.shape[0], self.a.shape[1]

    def merged(self):
        return self.b @ self.a

    def values(self):
        return self.a.size + self.b.size
