from typing import NamedTuple

import numpy as np

from fedpower import hooks
from fedpower.exceptions import ShapeError, ValidationError
from fedpower.linalg.dense import as_matrix
from fedpower.linalg.rng import Purpose
from fedpower.utils import logger

_MAX_REFILLS = 8


class Orthonormal(NamedTuple):
    matrix: np.ndarray
    # indices of directions replaced by fresh random draws
    deficient: tuple


def _project_out(v, basis):
    # modified Gram-Schmidt, one re-orthogonalization pass
    for _ in range(2):
        for q in basis:
            v = v - (q @ v) * q
    return v


def orthonormalize_columns(m, rng=None, tol=hooks.ortho_tolerance):
    """Orthonormal basis of the column span of `m` (rows >= cols).

    A column whose residual norm falls below `tol` (relative to its own norm)
    is replaced by a Gaussian draw from `rng`, re-orthogonalized, and its index
    reported in `deficient`.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows < cols:
        raise ShapeError(f"need rows >= cols to orthonormalize columns, got {m.shape}")

    basis = []
    deficient = []
    for j in range(cols):
        column = m[:, j]
        scale = np.linalg.norm(column)
        v = _project_out(column.copy(), basis)
        norm = np.linalg.norm(v)
        if scale == 0.0 or norm <= tol * scale:
            v, norm = _refill(rows, basis, j, rng)
            deficient.append(j)
        basis.append(v / norm)

    if deficient:
        logger("linalg").debug(f"replaced deficient directions {deficient} of a {m.shape} matrix")
    return Orthonormal(np.column_stack(basis), tuple(deficient))


def _refill(rows, basis, index, rng):
    if rng is None:
        raise ValidationError(
            f"direction {index} is numerically rank deficient and no RngStream was supplied"
        )
    stream = rng.child(Purpose.ORTHO_FILL, index)
    for _ in range(_MAX_REFILLS):
        v = _project_out(stream.normal(size=rows), basis)
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            return v, norm
    raise ValidationError(f"could not complete an orthonormal basis at direction {index}")


def orthonormalize_rows(m, rng=None, tol=hooks.ortho_tolerance):
    m = as_matrix(m)
    if m.shape[1] < m.shape[0]:
        raise ShapeError(f"need cols >= rows to orthonormalize rows, got {m.shape}")
    result = orthonormalize_columns(m.T, rng=rng, tol=tol)
    return Orthonormal(result.matrix.T.copy(), result.deficient)
