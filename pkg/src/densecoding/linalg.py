"""Dense complex linear algebra for small multi-qubit Hilbert spaces.

Matrices are plain ``numpy`` complex arrays. Subsystem 0 is always the
most-significant tensor factor, so ``kron(a, b)`` places ``a`` on subsystem 0.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NegativeEigenvalueError, NotHermitianError

HERMITICITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
EIGEN_CLAMP_TOL = 1e-10
# eigenvalues this small are indistinguishable from zero in double precision
RESOLUTION_TOL = 1e-14

MAX_DIM = 2**10

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    return a


def kron(*factors) -> np.ndarray:
    """Kronecker product with the first factor as the most-significant subsystem."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


def is_hermitian(m, tol: float = HERMITICITY_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def _check_dims(dim: int, dims: Sequence[int]) -> None:
    if any(d < 1 for d in dims) or int(np.prod(dims)) != dim:
        raise DimensionMismatchError(f"subsystem dims {list(dims)} do not factor dimension {dim}")


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Square matrix on the composite space.
    dims : sequence of int
        Subsystem dimensions, most-significant first.
    keep : iterable of int
        Subsystems to retain. The result keeps them in ascending order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m.shape[0], dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DimensionMismatchError(f"keep={keep} must be non-empty and within 0..{n - 1}")
    if 2 * n > len(_LETTERS):
        raise DimensionMismatchError("too many subsystems for partial_trace")

    row = list(_LETTERS[:n])
    col = list(_LETTERS[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    t = m.reshape(dims + dims)
    kept_dim = int(np.prod([dims[i] for i in keep]))
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(kept_dim, kept_dim)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns.
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        dev = float(np.max(np.abs(m - m.conj().T)))
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    # symmetrize so eigh sees exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], v[:, order]


def clamp_eigenvalues(w: np.ndarray, tol: float = EIGEN_CLAMP_TOL) -> np.ndarray:
    """Zero out eigenvalues in ``[-tol, 0)``; raise on anything more negative."""
    if w.size and w.min() < -tol:
        raise NegativeEigenvalueError(f"eigenvalue {w.min():.3e} is below -{tol:g}")
    return np.where(w < 0, 0.0, w)


def matrix_sqrt(m) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix."""
    w, v = hermitian_eig(m)
    w = clamp_eigenvalues(w)
    return (v * np.sqrt(w)) @ v.conj().T


def psd_factor(m, cutoff: float = RESOLUTION_TOL) -> np.ndarray:
    """Return ``A`` with ``A A^dag = m`` for Hermitian PSD ``m``.

    Eigenvalues below ``cutoff`` are zeroed: they sit at the eigensolver's
    rounding level, and their square roots (about 1e-8) would otherwise leak
    into fidelities and concurrences.
    """
    w, v = hermitian_eig(m)
    w = clamp_eigenvalues(w)
    w = np.where(w < cutoff, 0.0, w)
    return v * np.sqrt(w)


def _apply_left(t: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _apply_right_dagger(t: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    op_t = op.conj().reshape((2,) * (2 * k))
    out = np.tensordot(t, op_t, axes=(axes, list(range(k, 2 * k))))
    return np.moveaxis(out, list(range(t.ndim - k, t.ndim)), axes)


def check_targets(targets: Sequence[int], num_qubits: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise DimensionMismatchError(f"duplicate target qubits {targets}")
    if any(t < 0 or t >= num_qubits for t in targets):
        raise DimensionMismatchError(f"targets {targets} out of range for {num_qubits} qubits")
    return targets


def apply_left(m: np.ndarray, op, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """Left-multiply ``m`` (matrix or ket) by ``op`` acting on ``targets``."""
    op = as_matrix(op)
    targets = check_targets(targets, num_qubits)
    if op.shape[0] != 2 ** len(targets):
        raise DimensionMismatchError(f"operator dim {op.shape[0]} does not match {len(targets)} targets")
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        t = m.reshape((2,) * num_qubits)
        return _apply_left(t, op, targets).reshape(-1)
    t = m.reshape((2,) * (2 * num_qubits))
    return _apply_left(t, op, targets).reshape(m.shape)


def conjugate(m: np.ndarray, op, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """Return ``op m op^dagger`` with ``op`` embedded on ``targets``."""
    op = as_matrix(op)
    targets = check_targets(targets, num_qubits)
    if op.shape[0] != 2 ** len(targets):
        raise DimensionMismatchError(f"operator dim {op.shape[0]} does not match {len(targets)} targets")
    t = np.asarray(m, dtype=complex).reshape((2,) * (2 * num_qubits))
    t = _apply_left(t, op, targets)
    t = _apply_right_dagger(t, op, [num_qubits + a for a in targets])
    return t.reshape(2**num_qubits, 2**num_qubits)


def embed(op, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``op`` acting on ``targets`` (identity elsewhere)."""
    eye = np.eye(2**num_qubits, dtype=complex)
    return apply_left(eye, op, targets, num_qubits)


def project_out(m: np.ndarray, qubits: Sequence[int], bits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Unnormalised state of the other qubits after ``qubits`` are found in ``bits``.

    Equivalent to ``Tr_q[(|b><b|_q (x) I) m]`` with the measured qubits removed.
    """
    qubits = check_targets(qubits, num_qubits)
    if len(bits) != len(qubits):
        raise DimensionMismatchError("one bit per measured qubit is required")
    t = np.asarray(m).reshape((2,) * (2 * num_qubits))
    index: list = [slice(None)] * (2 * num_qubits)
    for q, b in zip(qubits, bits):
        index[q] = int(b)
        index[num_qubits + q] = int(b)
    rest = 2 ** (num_qubits - len(qubits))
    return t[tuple(index)].reshape(rest, rest)


def insert_zero_qubits(m: np.ndarray, position: int, count: int, num_qubits: int) -> np.ndarray:
    """Tensor ``count`` qubits in |0> into the register so they start at ``position``."""
    if not 0 <= position <= num_qubits:
        raise DimensionMismatchError(f"insert position {position} out of range")
    zero = np.zeros((2**count, 2**count), dtype=complex)
    zero[0, 0] = 1.0
    out = np.kron(np.asarray(m, dtype=complex), zero)
    n = num_qubits + count
    order = list(range(position)) + list(range(num_qubits, n)) + list(range(position, num_qubits))
    return permute_qubits(out, order)


def permute_qubits(m: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder the qubits of a density matrix so new qubit ``i`` is old qubit ``order[i]``."""
    n = len(order)
    t = np.asarray(m).reshape((2,) * (2 * n))
    return t.transpose(list(order) + [n + o for o in order]).reshape(2**n, 2**n)
