from fedpower.linalg.dense import (  # noqa: F401
    DenseMatrix,
    as_matrix,
    frobenius_norm,
    gaussian_matrix,
    matmul,
    transpose,
)
from fedpower.linalg.orthonormal import (  # noqa: F401
    Orthonormal,
    orthonormalize_columns,
    orthonormalize_rows,
)
from fedpower.linalg.rng import Purpose, RngStream  # noqa: F401
