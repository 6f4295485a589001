"""Pure statevector kernels.

Amplitudes are flat arrays of length 2^n where bit k of the basis index is the state
of qubit k. Kernels never mutate their input and are jit-compiled with the qubit
indices as static arguments.
"""
from functools import partial

import jax.numpy as jnp
import numpy as np
from jax import Array, jit


def rx_matrix(angle) -> Array:
    """RX(angle) = exp(-i angle X/2)."""
    c = jnp.cos(angle/2)
    s = jnp.sin(angle/2)
    return jnp.array([[c, -1j*s], [-1j*s, c]])


def ry_matrix(angle) -> Array:
    """RY(angle) = exp(-i angle Y/2)."""
    c = jnp.cos(angle/2)
    s = jnp.sin(angle/2)
    return jnp.array([[c, -s], [s, c]])


# NOTE: numpy array, jax dtypes are only fixed once config() has run
H_MATRIX = np.array([[1., 1.], [1., -1.]])/np.sqrt(2.)


@partial(jit, static_argnums=(1, 2))
def apply_matrix(amps: Array, n: int, qubit: int, mat: Array) -> Array:
    """Applies a 2x2 matrix to one qubit.

    The amplitudes are viewed as a (2^(n-1-qubit), 2, 2^qubit) array, so that the
    middle axis pairs the indices differing only in the target bit.
    """
    psi = amps.reshape(2**(n - 1 - qubit), 2, 2**qubit)
    psi = jnp.einsum("ab,ibj->iaj", mat.astype(amps.dtype), psi)
    return psi.reshape(-1)


def basis_bit(n: int, qubit: int) -> Array:
    """Bit of the given qubit for every basis index."""
    return (jnp.arange(2**n) >> qubit) & 1


def z_eigenvalue(n: int, qubit: int) -> Array:
    """+1 where the qubit is 0, -1 where it is 1."""
    return 1 - 2*basis_bit(n, qubit)


@partial(jit, static_argnums=(1, 2))
def apply_rz(amps: Array, n: int, qubit: int, angle) -> Array:
    """RZ(angle) = exp(-i angle Z/2): |0> gains exp(-i angle/2), |1> exp(+i angle/2).
    """
    return amps*jnp.exp(-0.5j*angle*z_eigenvalue(n, qubit))


@partial(jit, static_argnums=(1, 2, 3))
def apply_rzz(amps: Array, n: int, q1: int, q2: int, angle) -> Array:
    """RZZ(angle) = exp(-i angle Z_q1 Z_q2/2)."""
    zz = z_eigenvalue(n, q1)*z_eigenvalue(n, q2)
    return amps*jnp.exp(-0.5j*angle*zz)


@partial(jit, static_argnums=(1, 2, 3))
def apply_crz(amps: Array, n: int, control: int, target: int, angle) -> Array:
    """RZ(angle) on the target wherever the control qubit is 1."""
    phase = jnp.exp(-0.5j*angle*z_eigenvalue(n, target))
    return jnp.where(basis_bit(n, control) == 1, amps*phase, amps)


@partial(jit, static_argnums=(1, 2, 3))
def apply_ucry(amps: Array, n: int, target: int, controls: tuple, angles: Array
               ) -> Array:
    """Uniformly controlled RY: the angle applied to the target is selected by the
    value of the control qubits (controls[k] carries weight 2^k)."""
    pattern = jnp.zeros(2**n, dtype=int)
    for k, q in enumerate(controls):
        pattern = pattern + (basis_bit(n, q) << k)
    theta = angles[pattern]
    c = jnp.cos(theta/2).astype(amps.dtype)
    s = jnp.sin(theta/2).astype(amps.dtype)
    bit = basis_bit(n, target)
    partner = amps[jnp.arange(2**n) ^ (1 << target)]
    # |0> -> c|0> + s|1>, |1> -> -s|0> + c|1>
    return jnp.where(bit == 0, c*amps - s*partner, s*partner + c*amps)


@jit
def apply_phase(amps: Array, phases: Array) -> Array:
    """Multiplies every amplitude by exp(-i phases[z])."""
    return amps*jnp.exp(-1j*phases)


@jit
def probabilities(amps: Array) -> Array:
    return jnp.abs(amps)**2
