"""Density matrices, Bell states, fidelity and von Neumann entropy."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, InvalidStateError

TRACE_TOL = 1e-9
PURITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A qubit-register density matrix.

    Construction checks shape, Hermiticity and unit trace. Positivity needs an
    eigendecomposition, so it is only checked by :meth:`validate`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix)
        dim = m.shape[0]
        if dim & (dim - 1) or dim > linalg.MAX_DIM:
            raise InvalidStateError(f"dimension {dim} is not a power of two up to {linalg.MAX_DIM}")
        if not linalg.is_hermitian(m):
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace {tr!r} differs from 1")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def eigenvalues(self) -> np.ndarray:
        return linalg.hermitian_eig(self.matrix)[0]

    def validate(self) -> "DensityMatrix":
        """Raise :class:`InvalidStateError` unless the state is PSD within tolerance."""
        w = self.eigenvalues()
        if w[-1] < -linalg.EIGEN_CLAMP_TOL:
            raise InvalidStateError(f"negative eigenvalue {w[-1]:.3e}")
        return self

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.matrix, self.matrix)))

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return abs(self.purity() - 1.0) <= tol

    def ptrace(self, keep) -> "DensityMatrix":
        return DensityMatrix(linalg.partial_trace(self.matrix, [2] * self.num_qubits, keep))

    def tensor(self, *others: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(linalg.kron(self.matrix, *(o.matrix for o in others)))

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis(cls, bits: str) -> "DensityMatrix":
        """Computational basis state, e.g. ``DensityMatrix.basis("01")``."""
        v = np.zeros(2 ** len(bits), dtype=complex)
        v[int(bits, 2)] = 1.0
        return cls.from_ket(v)

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2**num_qubits
        return cls(np.eye(d, dtype=complex) / d)


def coerce(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


class BellKind(enum.Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"


_BELL_KETS = {
    BellKind.PHI_PLUS: (1, 0, 0, 1),
    BellKind.PHI_MINUS: (1, 0, 0, -1),
    BellKind.PSI_PLUS: (0, 1, 1, 0),
    BellKind.PSI_MINUS: (0, 1, -1, 0),
}


def bell_ket(kind: BellKind = BellKind.PHI_PLUS) -> np.ndarray:
    return np.array(_BELL_KETS[BellKind(kind)], dtype=complex) / np.sqrt(2)


def bell_state(kind: BellKind = BellKind.PHI_PLUS) -> DensityMatrix:
    return DensityMatrix.from_ket(bell_ket(kind))


def werner_state(fidelity: float) -> DensityMatrix:
    """Werner state ``w |Phi+><Phi+| + (1 - w) I/4`` with the given Bell fidelity."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
    w = (4.0 * fidelity - 1.0) / 3.0
    return DensityMatrix(w * bell_state().matrix + (1.0 - w) * np.eye(4) / 4.0)


def random_density_matrix(num_qubits: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed random mixed state (``rank`` defaults to full)."""
    d = 2**num_qubits
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _same_dim(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dimensions differ: {rho.dim} vs {sigma.dim}")


def fidelity(rho, sigma) -> float:
    """Squared Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    With ``rho = A A^dag`` and ``sigma = B B^dag`` the trace equals the sum of
    singular values of ``A^dag B``, which avoids a second matrix square root.
    """
    rho, sigma = coerce(rho), coerce(sigma)
    _same_dim(rho, sigma)
    a = linalg.psd_factor(rho.matrix)
    b = linalg.psd_factor(sigma.matrix)
    f = float(np.sum(np.linalg.svd(a.conj().T @ b, compute_uv=False)) ** 2)
    return min(max(f, 0.0), 1.0)


def fidelity_with_pure(psi, sigma) -> float:
    """Fidelity against a pure reference, computed as ``<psi|sigma|psi>``."""
    psi, sigma = coerce(psi), coerce(sigma)
    _same_dim(psi, sigma)
    if not psi.is_pure():
        raise InvalidStateError(f"reference state is not pure (purity {psi.purity():.12f})")
    f = float(np.real(np.einsum("ij,ji->", psi.matrix, sigma.matrix)))
    return min(max(f, 0.0), 1.0)


def entropy_of_spectrum(w) -> float:
    """Shannon entropy in bits of a probability vector; zero entries contribute nothing."""
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log2 rho)`` in bits."""
    rho = coerce(rho)
    return entropy_of_spectrum(linalg.clamp_eigenvalues(rho.eigenvalues()))
