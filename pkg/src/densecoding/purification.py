"""Entanglement purification: DEJMPS distillation and the ancilla-assisted
adaptive purification ``U(theta1, theta2)``, with its angle optimiser and the
pilot-metric noise estimator.

Two-pair registers are ordered ``(A0, B0, A1, B1)``: pair one on qubits 0-1,
pair two on qubits 2-3, Alice's half first in each pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from . import linalg
from .channels import KrausChannel, NoiseParams, composite_channel_apply
from .errors import InvalidStateError
from .metrics import correlation_report
from .states import DensityMatrix, bell_state, coerce, fidelity_with_pure

ANGLE_GRID = 33
ANGLE_FTOL = 1e-6
TIE_TOL = 1e-12
TABLE_STEP = 0.02
NEIGHBOUR_NODES = 8

_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


@dataclass(frozen=True)
class PurificationAngles:
    theta1: float = 0.0
    theta2: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.theta1) and np.isfinite(self.theta2)):
            raise ValueError("purification angles must be finite")
        object.__setattr__(self, "theta1", wrap_angle(self.theta1))
        object.__setattr__(self, "theta2", wrap_angle(self.theta2))


def wrap_angle(theta: float) -> float:
    """Map to [-pi, pi]; +pi is kept as is."""
    theta = float(theta)
    if -np.pi <= theta <= np.pi:
        return theta
    return float((theta + np.pi) % (2 * np.pi) - np.pi)


@dataclass(frozen=True, eq=False)
class DistillationOutcome:
    state: DensityMatrix | None
    success_prob: float

    @property
    def fidelity(self) -> float:
        if self.state is None:
            return 0.0
        return fidelity_with_pure(bell_state(), self.state)


@dataclass(frozen=True)
class NoiseEstimate:
    p_hat: float
    q_hat: float
    residual: float = 0.0

    def __post_init__(self):
        for name in ("p_hat", "q_hat"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.residual < 0:
            raise ValueError("residual must be non-negative")

    @property
    def params(self) -> NoiseParams:
        return NoiseParams(self.p_hat, self.q_hat)


# -- DEJMPS -----------------------------------------------------------------

def dejmps_round(pair1, pair2, theta: float = np.pi / 2, axis: str = "x") -> DistillationOutcome:
    """One DEJMPS round: pair two is sacrificed to purify pair one.

    Alice rotates her qubits by ``theta`` and Bob by ``-theta``, both apply a
    CNOT from their pair-one qubit onto their pair-two qubit, and pair two is
    measured in the computational basis. The round succeeds when the two
    outcomes agree.

    ``axis="x"`` uses X rotations, which leave ``Phi+`` and Werner states
    invariant. ``axis="y"`` uses Y rotations instead; those rotate ``Phi+``
    into ``Psi+`` at ``theta = pi/2``.
    """
    pair1, pair2 = coerce(pair1), coerce(pair2)
    if pair1.num_qubits != 2 or pair2.num_qubits != 2:
        raise InvalidStateError("DEJMPS acts on two two-qubit pairs")
    rot = {"x": rx, "y": ry}[axis]
    m = np.kron(pair1.matrix, pair2.matrix)
    for q, angle in ((0, theta), (2, theta), (1, -theta), (3, -theta)):
        m = linalg.conjugate(m, rot(angle), [q], 4)
    m = linalg.conjugate(m, _CNOT, [0, 2], 4)
    m = linalg.conjugate(m, _CNOT, [1, 3], 4)
    kept = sum(linalg.project_out(m, [2, 3], [b, b], 4) for b in (0, 1))
    ps = float(np.real(np.trace(kept)))
    if ps <= 0.0:
        return DistillationOutcome(None, 0.0)
    return DistillationOutcome(DensityMatrix(kept / ps), min(ps, 1.0))


def dejmps_fidelity_recursion(f: float) -> tuple[float, float]:
    """Closed-form output fidelity and success probability for Werner inputs."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")
    ps = f * f + 2.0 / 3.0 * f * (1 - f) + 5.0 / 9.0 * (1 - f) ** 2
    return (f * f + (1 - f) ** 2 / 9.0) / ps, ps


# -- adaptive purification ----------------------------------------------------

DATA = (0, 1, 2, 3)
ANCILLAS = (4, 5, 6, 7)


def adaptive_gates(angles: PurificationAngles) -> list[tuple[np.ndarray, tuple]]:
    """Gate sequence of ``U(theta1, theta2)`` in circuit order.

    Data qubits 0-3 hold (A0, B0, A1, B1); ancillas are qubits 4-7. theta1
    rotates the Alice-side qubits (0, 2) and theta2 the Bob-side qubits (1, 3).
    Each pair is coupled only to its own two ancillas.
    """
    t1, t2 = angles.theta1, angles.theta2
    return [
        (_CNOT, (0, 4)),
        (ry(t1), (0,)),
        (_CNOT, (2, 6)),
        (_CNOT, (1, 4)),
        (ry(t2), (1,)),
        (ry(t1), (2,)),
        (_CNOT, (3, 6)),
        (_CNOT, (0, 5)),
        (ry(-t1), (0,)),
        (ry(t2), (3,)),
        (_CNOT, (2, 7)),
        (_CNOT, (1, 5)),
        (ry(-t2), (1,)),
        (ry(-t1), (2,)),
        (_CNOT, (3, 7)),
        (ry(-t2), (3,)),
    ]


def _run_gates(columns: np.ndarray, angles: PurificationAngles) -> np.ndarray:
    """Apply the circuit to every column of a ``256 x k`` block of kets."""
    k = columns.shape[1]
    t = columns.reshape((2,) * 8 + (k,))
    for gate, qubits in adaptive_gates(angles):
        n = len(qubits)
        g = gate.reshape((2,) * (2 * n))
        t = np.tensordot(g, t, axes=(list(range(n, 2 * n)), list(qubits)))
        t = np.moveaxis(t, list(range(n)), list(qubits))
    return t.reshape(256, k)


def adaptive_unitary(angles: PurificationAngles) -> np.ndarray:
    """Full 256 x 256 unitary on (4 data + 4 ancilla) qubits."""
    return _run_gates(np.eye(256, dtype=complex), angles)


def adaptive_kraus(angles: PurificationAngles) -> KrausChannel:
    """Kraus form of ``rho -> Tr_anc U (rho (x) |0000><0000|) U^dag``."""
    iso = _run_gates(np.eye(256, dtype=complex)[:, ::16], angles)  # columns with ancillas in |0000>
    t = iso.reshape(16, 16, 16)  # (data out, ancilla out, data in)
    ops = tuple(t[:, a, :] for a in range(16))
    return KrausChannel(ops, label=f"adaptive(theta1={angles.theta1:.6g}, theta2={angles.theta2:.6g})")


def adaptive_purify(two_pairs, angles: PurificationAngles, measure_ancillas: bool = False) -> DensityMatrix:
    """Apply the adaptive purification map to a four-qubit two-pair state.

    The ancillas are traced out, so the map is deterministic and keeps both
    pairs. With ``measure_ancillas`` the full eight-qubit state is built and
    the ancillas are read out in the computational basis with every outcome
    kept. This gives the same state and exists to cross-check the trace-out
    route.
    """
    rho = coerce(two_pairs)
    if rho.num_qubits != 4:
        raise InvalidStateError(f"adaptive purification acts on 4 qubits, got {rho.num_qubits}")
    if not measure_ancillas:
        ch = adaptive_kraus(angles)
        out = sum(k @ rho.matrix @ k.conj().T for k in ch.operators)
        return DensityMatrix(out)
    full = linalg.insert_zero_qubits(rho.matrix, 4, 4, 4)
    u = adaptive_unitary(angles)
    full = u @ full @ u.conj().T
    out = np.zeros((16, 16), dtype=complex)
    for a in range(16):
        bits = [(a >> (3 - i)) & 1 for i in range(4)]
        out += linalg.project_out(full, ANCILLAS, bits, 8)
    return DensityMatrix(out)


def noisy_pair(params: NoiseParams) -> DensityMatrix:
    """``Phi+`` with the composite channel on Alice's qubit only."""
    return composite_channel_apply(params, bell_state(), 0)


def pair_fidelities(two_pairs) -> tuple[float, float]:
    rho = coerce(two_pairs)
    ref = bell_state()
    return fidelity_with_pure(ref, rho.ptrace([0, 1])), fidelity_with_pure(ref, rho.ptrace([2, 3]))


def mean_pair_fidelity(two_pairs) -> float:
    return float(np.mean(pair_fidelities(two_pairs)))


class _Objective:
    def __init__(self, params: NoiseParams):
        pair = noisy_pair(params)
        self.rho = np.kron(pair.matrix, pair.matrix)

    def __call__(self, t1: float, t2: float) -> float:
        out = adaptive_purify(DensityMatrix(self.rho), PurificationAngles(t1, t2))
        return mean_pair_fidelity(out)


def optimize_angles(noise: NoiseEstimate) -> tuple[PurificationAngles, float]:
    """Maximise the mean Bell fidelity of two purified pairs under the estimated noise.

    A 33 x 33 grid over [-pi, pi]^2 is scanned first. Near-ties (within 1e-12)
    go to the angle pair closest to (0, 0), then the smallest theta1, then the
    smallest theta2. Nelder-Mead then refines from the grid optimum, and its
    result is only kept if it is strictly better.
    """
    f = _Objective(noise.params)
    grid = np.linspace(-np.pi, np.pi, ANGLE_GRID)
    values = np.array([[f(a, b) for b in grid] for a in grid])
    best_val = values.max()
    cands = [(abs(grid[i]) + abs(grid[j]), grid[i], grid[j])
             for i, j in zip(*np.nonzero(values >= best_val - TIE_TOL))]
    _, t1, t2 = min(cands)
    best = (float(t1), float(t2))
    best_val = float(f(*best))

    step = grid[1] - grid[0]
    x0 = np.array(best)
    res = minimize(
        lambda x: -f(x[0], x[1]),
        x0,
        method="Nelder-Mead",
        options={"initial_simplex": np.array([x0, x0 + [step, 0.0], x0 + [0.0, step]]),
                 "fatol": ANGLE_FTOL, "xatol": 1e-6, "maxiter": 400},
    )
    if -res.fun > best_val + TIE_TOL:
        best, best_val = (float(res.x[0]), float(res.x[1])), float(-res.fun)
    return PurificationAngles(*best), best_val


def identity_baseline(noise: NoiseEstimate) -> float:
    """Mean pair fidelity at angles (0, 0), where the circuit leaves Bell-pair fidelity unchanged."""
    return _Objective(noise.params)(0.0, 0.0)


# -- pilot-metric noise estimation ----------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricTable:
    """Forward map ``(p, q) -> (QD, EoF)`` sampled on a regular grid."""

    p_values: np.ndarray
    q_values: np.ndarray
    qd: np.ndarray
    eof: np.ndarray

    def __post_init__(self):
        shape = (len(self.p_values), len(self.q_values))
        if self.qd.shape != shape or self.eof.shape != shape:
            raise ValueError("metric grids must be shaped (len(p_values), len(q_values))")

    @property
    def size(self) -> int:
        return self.qd.size


@lru_cache(maxsize=4)
def build_metric_table(step: float = TABLE_STEP) -> MetricTable:
    n = int(round(1.0 / step)) + 1
    ps = np.linspace(0.0, 1.0, n)
    qs = np.linspace(0.0, 1.0, n)
    qd = np.empty((n, n))
    eof = np.empty((n, n))
    for i, p in enumerate(ps):
        for j, q in enumerate(qs):
            rep = correlation_report(noisy_pair(NoiseParams(float(p), float(q))))
            qd[i, j], eof[i, j] = rep.qd, rep.eof
    for a in (ps, qs, qd, eof):
        a.setflags(write=False)
    return MetricTable(ps, qs, qd, eof)


def _bilinear(c00, c10, c01, c11, u, v):
    return c00 * (1 - u) * (1 - v) + c10 * u * (1 - v) + c01 * (1 - u) * v + c11 * u * v


def estimate_noise(qd: float, eof: float, table: MetricTable) -> NoiseEstimate:
    """Invert pilot metrics to a ``(p, q)`` estimate.

    Grid nodes are ranked by distance to the target in (QD, EoF) space. The
    bilinear interpolant is then inverted inside every cell touching the
    nearest few nodes. The smallest residual wins, and ties go to the smaller
    p, then the smaller q.

    The map ``(p, q) -> (QD, EoF)`` folds near the noiseless corner: for
    small p with q = 0 there is a second point with small positive q and
    identical metrics. There the estimate is one of the preimages, not
    necessarily the true channel.
    """
    if table.size == 0:
        raise ValueError("metric table is empty")
    target = np.array([qd, eof], dtype=float)
    d2 = (table.qd - target[0]) ** 2 + (table.eof - target[1]) ** 2
    # stable sort keeps p-major, q-minor order among equal distances
    order = np.argsort(d2.ravel(), kind="stable")
    i, j = np.unravel_index(int(order[0]), d2.shape)
    candidates = [(float(np.sqrt(d2[i, j])), float(table.p_values[i]), float(table.q_values[j]))]

    # the (p, q) -> metrics map is anisotropic, so search the cells around
    # several near nodes rather than only the nearest one
    n_p, n_q = d2.shape
    cells = set()
    for k in order[:NEIGHBOUR_NODES]:
        a, b = np.unravel_index(int(k), d2.shape)
        cells.update((ci, cj) for ci in (a - 1, a) for cj in (b - 1, b)
                     if 0 <= ci < n_p - 1 and 0 <= cj < n_q - 1)
    for ci, cj in sorted(cells):
        c = np.array([(table.qd[a, b], table.eof[a, b]) for a, b in
                      ((ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1))])

        def resid(x, c=c):
            return _bilinear(c[0], c[1], c[2], c[3], x[0], x[1]) - target

        sol = least_squares(resid, np.array([0.5, 0.5]), bounds=([0.0, 0.0], [1.0, 1.0]),
                            xtol=1e-12, ftol=1e-12, gtol=1e-12)
        p_hat = table.p_values[ci] + sol.x[0] * (table.p_values[ci + 1] - table.p_values[ci])
        q_hat = table.q_values[cj] + sol.x[1] * (table.q_values[cj + 1] - table.q_values[cj])
        candidates.append((float(np.linalg.norm(sol.fun)), float(np.clip(p_hat, 0, 1)), float(np.clip(q_hat, 0, 1))))

    r_min = min(c[0] for c in candidates)
    r, p_hat, q_hat = min((c for c in candidates if c[0] <= r_min + TIE_TOL), key=lambda c: (c[1], c[2]))
    return NoiseEstimate(p_hat, q_hat, r)
