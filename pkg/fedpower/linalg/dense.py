import numpy as np

from fedpower.exceptions import ShapeError, ValidationError

DenseMatrix = np.ndarray


def as_matrix(value, name="matrix"):
    """Validate and return `value` as a finite 2-D float64 array."""
    m = np.asarray(value, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} holds non-finite entries")
    return m


def matmul(a, b):
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    out = a @ b
    if not np.all(np.isfinite(out)):
        raise ValidationError("matrix product overflowed")
    return out


def transpose(m):
    return as_matrix(m).T.copy()


def frobenius_norm(m):
    return float(np.linalg.norm(as_matrix(m), "fro"))


def gaussian_matrix(rows, cols, std, rng):
    """i.i.d. N(0, std^2) entries drawn from `rng`; std == 0 gives exact zeros."""
    if std < 0:
        raise ValidationError(f"std must be non-negative, got {std}")
    if std == 0:
        return np.zeros((rows, cols))
    return rng.normal(size=(rows, cols), scale=float(std))
