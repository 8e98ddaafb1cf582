"""Kraus-operator noise channels: amplitude damping, phase damping and their
symmetric composite, plus application to selected qubits and Choi matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, InvalidChannelError
from .states import DensityMatrix, coerce

COMPLETENESS_TOL = 1e-12
CHOI_PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple
    label: str = ""

    def __post_init__(self):
        ops = tuple(linalg.as_matrix(k) for k in self.operators)
        if not ops:
            raise InvalidChannelError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops):
            raise InvalidChannelError("Kraus operators must share one square shape")
        if d & (d - 1):
            raise InvalidChannelError(f"operator dimension {d} is not a power of two")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        err = self.completeness_error()
        if err > COMPLETENESS_TOL:
            raise InvalidChannelError(f"{self.label or 'channel'}: sum K^dag K deviates from I by {err:.3e}")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def __call__(self, rho, targets: Sequence[int] | None = None) -> DensityMatrix:
        rho = coerce(rho)
        if targets is None:
            targets = range(self.num_qubits)
        return apply_channel(self, rho, targets)


@dataclass(frozen=True)
class NoiseParams:
    """Amplitude-damping probability ``p`` and phase-damping probability ``q``."""

    p: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.p == 0.0 and self.q == 0.0


def _check_prob(name: str, v: float) -> float:
    v = float(v)
    if not (np.isfinite(v) and 0.0 <= v <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


def amplitude_damping_operators(p: float) -> list[np.ndarray]:
    p = _check_prob("p", p)
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]], dtype=complex)
    a1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]], dtype=complex)
    return [a0, a1]


def phase_damping_operators(q: float) -> list[np.ndarray]:
    q = _check_prob("q", q)
    p0 = np.sqrt(1.0 - q) * np.eye(2, dtype=complex)
    p1 = np.sqrt(q) * np.diag([1.0, 0.0]).astype(complex)
    p2 = np.sqrt(q) * np.diag([0.0, 1.0]).astype(complex)
    return [p0, p1, p2]


def amplitude_damping(p: float) -> KrausChannel:
    return KrausChannel(tuple(amplitude_damping_operators(p)), label=f"AD(p={p:g})")


def phase_damping(q: float) -> KrausChannel:
    return KrausChannel(tuple(phase_damping_operators(q)), label=f"PD(q={q:g})")


def composite_channel(params: NoiseParams) -> KrausChannel:
    """Equal mixture of AD-after-PD and PD-after-AD as one Kraus family.

    Each ordered product ``A_i P_j`` and ``P_j A_i`` is weighted by ``1/sqrt(2)``.
    Products that vanish identically are dropped; they contribute nothing to
    the Kraus sum or to the completeness relation.
    """
    ad = amplitude_damping_operators(params.p)
    pd = phase_damping_operators(params.q)
    ops = [a @ b / np.sqrt(2.0) for a in ad for b in pd]
    ops += [b @ a / np.sqrt(2.0) for a in ad for b in pd]
    ops = [k for k in ops if np.any(k != 0)]
    return KrausChannel(tuple(ops), label=f"composite(p={params.p:g}, q={params.q:g})")


def apply_channel(channel: KrausChannel, rho, targets: Sequence[int]) -> DensityMatrix:
    """Apply ``sum_i K_i rho K_i^dag`` with the channel acting on ``targets``."""
    rho = coerce(rho)
    n = rho.num_qubits
    targets = linalg.check_targets(targets, n)
    if channel.dim != 2 ** len(targets):
        raise DimensionMismatchError(
            f"channel acts on {channel.num_qubits} qubits but {len(targets)} targets given"
        )
    out = np.zeros_like(rho.matrix)
    for k in channel.operators:
        out += linalg.conjugate(rho.matrix, k, targets, n)
    return DensityMatrix(out)


def apply_unitary(rho, u, targets: Sequence[int]) -> DensityMatrix:
    rho = coerce(rho)
    return DensityMatrix(linalg.conjugate(rho.matrix, u, targets, rho.num_qubits))


def composite_channel_apply(params: NoiseParams, rho, target: int) -> DensityMatrix:
    rho = coerce(rho)
    if not 0 <= target < rho.num_qubits:
        raise DimensionMismatchError(f"target {target} out of range for {rho.num_qubits} qubits")
    if params.is_noiseless:
        return rho
    return apply_channel(composite_channel(params), rho, [target])


def choi_matrix(channel: KrausChannel) -> np.ndarray:
    """Choi operator ``sum_ij E(|i><j|) (x) |i><j|``.

    The channel acts on the first factor. Tracing out that factor gives the
    identity when the channel is trace preserving.
    """
    d = channel.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for k in channel.operators:
        # row-major vec of K is (K (x) I) sum_j |j>|j>
        v = k.reshape(-1)
        out += np.outer(v, v.conj())
    return out


def is_cptp(channel: KrausChannel) -> bool:
    if channel.completeness_error() > COMPLETENESS_TOL:
        return False
    w = linalg.hermitian_eig(choi_matrix(channel))[0]
    return bool(w[-1] >= -CHOI_PSD_TOL)
