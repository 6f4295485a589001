from functools import partial
from jax import jit, Array
import jax.ops as ops
from typing import Tuple
import numpy.typing as npt

# (rows, cols, values) of a sparse matrix
COO = Tuple[Array | npt.NDArray, Array | npt.NDArray, Array | npt.NDArray]


@partial(jit, static_argnums=(2,))
def spmm(A: COO, v: Array | npt.NDArray, shape: int) -> Array:
    """Product between a sparse matrix in COO format and a dense matrix whose columns
    are spin configurations.

    Args:
        A: tuple (rows,cols,values) representing the sparse matrix in COO format.
        v: dense matrix (columns are the vectors to multiply).
        shape: the number of rows of A.

    Returns:
        the dense matrix A@v.
    """
    assert v.ndim > 1
    rows, cols, vals = A
    # NOTE: make vals a column vector
    prod = vals[:, None] * v.take(cols, axis=0)
    return ops.segment_sum(prod, rows, shape)


@partial(jit, static_argnums=(2,))
def quadratic_form(A: COO, v: Array | npt.NDArray, shape: int) -> Array:
    """Computes v_k^T A v_k for every column v_k of a dense matrix.

    Args:
        A: sparse (shape x shape) matrix in COO format.
        v: dense matrix whose columns are the vectors of the forms.
        shape: the number of rows of A.

    Returns:
        array of the values of the quadratic forms, one per column.
    """
    return (v * spmm(A, v, shape)).sum(axis=0)
