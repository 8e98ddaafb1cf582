"""Two-qubit correlation measures: concurrence, entanglement of formation,
mutual information, one-way classical correlations and quantum discord.

Classical correlations are obtained by measuring qubit 0 (A) with a rank-1
projective measurement parameterised by Bloch angles ``(theta, phi)`` and
minimising the average conditional entropy of qubit 1 (B).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import DimensionMismatchError, InvariantViolation
from .states import DensityMatrix, bell_state, coerce, fidelity_with_pure, von_neumann_entropy

THETA_POINTS = 64
PHI_POINTS = 128
REFINE_FTOL = 1e-8
REFINE_XTOL = 1e-7
PROB_CUTOFF = 1e-12
CLAMP_TOL = 1e-9

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class MeasurementAngles:
    theta: float
    phi: float


@dataclass(frozen=True)
class CorrelationReport:
    fidelity: float
    qd: float
    eof: float
    mutual_info: float
    classical_info: float
    concurrence: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _two_qubit(rho) -> DensityMatrix:
    rho = coerce(rho)
    if rho.num_qubits != 2:
        raise DimensionMismatchError(f"expected a two-qubit state, got {rho.num_qubits} qubits")
    return rho


def canonical_angles(theta: float, phi: float) -> MeasurementAngles:
    """Map any ``(theta, phi)`` to the equivalent pair with theta in [0, pi], phi in [0, 2 pi)."""
    theta = float(np.mod(theta, 2 * np.pi))
    if theta > np.pi:
        theta = 2 * np.pi - theta
        phi = phi + np.pi
    phi = float(np.mod(phi, 2 * np.pi))
    if phi >= 2 * np.pi:
        phi = 0.0
    return MeasurementAngles(theta, phi)


def measurement_projectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    c2, s2 = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
    off = np.sin(theta) / 2
    p0 = np.array([[c2, off * np.exp(-1j * phi)], [off * np.exp(1j * phi), s2]])
    p1 = np.array([[s2, -off * np.exp(-1j * phi)], [-off * np.exp(1j * phi), c2]])
    return p0, p1


def _weighted_entropy(a, d, b) -> np.ndarray:
    """``p S(M / p)`` for 2x2 Hermitian blocks ``M = [[a, b], [b*, d]]`` with ``p = a + d``."""
    p = a + d
    half = np.sqrt(((a - d) / 2) ** 2 + np.abs(b) ** 2)
    lam = np.clip(np.stack([p / 2 + half, p / 2 - half]), 0.0, None)
    ok = p > PROB_CUTOFF
    safe_p = np.where(ok, p, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, lam * np.log2(lam / safe_p), 0.0)
    return np.where(ok, np.maximum(-terms.sum(axis=0), 0.0), 0.0)


class _ConditionalEntropy:
    """Average conditional entropy of B after measuring A, vectorised over angles."""

    def __init__(self, rho: np.ndarray):
        t = rho.reshape(2, 2, 2, 2)
        # blocks[y, x] is the B-operator <y|_A rho |x>_A
        self.b00 = t[0, :, 0, :]
        self.b11 = t[1, :, 1, :]
        self.b01 = t[0, :, 1, :]
        self.b10 = t[1, :, 0, :]
        self.rho_b = self.b00 + self.b11

    def __call__(self, theta, phi) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        c2 = (np.cos(theta / 2) ** 2)[..., None, None]
        s2 = (np.sin(theta / 2) ** 2)[..., None, None]
        cs = (np.sin(theta) / 2)[..., None, None]
        e = np.exp(1j * phi)[..., None, None]
        m0 = c2 * self.b00 + s2 * self.b11 + cs * np.conj(e) * self.b10 + cs * e * self.b01
        m1 = self.rho_b - m0
        h = 0.0
        for m in (m0, m1):
            h = h + _weighted_entropy(m[..., 0, 0].real, m[..., 1, 1].real, m[..., 0, 1])
        return h


def conditional_entropy(rho, angles: MeasurementAngles) -> float:
    """``sum_k p_k S(rho_B|k)`` for the measurement on A given by ``angles``."""
    rho = _two_qubit(rho)
    return float(_ConditionalEntropy(rho.matrix)(angles.theta, angles.phi))


def minimise_conditional_entropy(rho) -> tuple[float, MeasurementAngles]:
    """Grid search over measurement angles followed by Nelder-Mead refinement.

    The grid has ``THETA_POINTS`` values of theta spanning [0, pi] and
    ``PHI_POINTS`` values of phi spanning [0, 2 pi). Ties on the grid go to the
    lowest theta, then the lowest phi.
    """
    rho = _two_qubit(rho)
    f = _ConditionalEntropy(rho.matrix)
    thetas = np.linspace(0.0, np.pi, THETA_POINTS)
    phis = np.linspace(0.0, 2 * np.pi, PHI_POINTS, endpoint=False)
    grid = f(thetas[:, None], phis[None, :])
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    best_h = float(grid[i, j])
    best = (float(thetas[i]), float(phis[j]))

    step = np.array([thetas[1] - thetas[0], phis[1] - phis[0]])
    x0 = np.array(best)
    simplex = np.array([x0, x0 + [step[0], 0.0], x0 + [0.0, step[1]]])
    res = minimize(
        lambda x: float(f(x[0], x[1])),
        x0,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "fatol": REFINE_FTOL, "xatol": REFINE_XTOL, "maxiter": 2000},
    )
    if res.fun < best_h:
        best_h = float(res.fun)
        best = (float(res.x[0]), float(res.x[1]))
    return best_h, canonical_angles(*best)


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are square roots of the eigenvalues of
    ``R = rho (Y x Y) rho* (Y x Y)``. Writing ``rho = A A^dag`` they are the
    singular values of ``A^T (Y x Y) A``, which needs no square root of a
    nearly singular matrix.
    """
    rho = _two_qubit(rho)
    a = linalg.psd_factor(rho.matrix)
    lam = np.linalg.svd(a.T @ _YY @ a, compute_uv=False)
    return float(min(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), 1.0))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def eof_from_concurrence(c: float) -> float:
    if c <= 0.0:
        return 0.0
    x = (1 + np.sqrt(max(1 - c * c, 0.0))) / 2
    return binary_entropy(x)


def entanglement_of_formation(rho) -> float:
    return eof_from_concurrence(concurrence(rho))


def mutual_information(rho) -> float:
    """``S(rho_A) + S(rho_B) - S(rho)`` in bits."""
    rho = _two_qubit(rho)
    i = von_neumann_entropy(rho.ptrace([0])) + von_neumann_entropy(rho.ptrace([1])) - von_neumann_entropy(rho)
    if i < -CLAMP_TOL:
        raise InvariantViolation(f"negative mutual information {i:.3e}")
    return max(i, 0.0)


def classical_correlations(rho, reference: str = "B") -> tuple[float, MeasurementAngles]:
    """One-way classical correlation ``J(A:B)`` with measurement on qubit A.

    Parameters
    ----------
    rho : DensityMatrix
        Two-qubit state.
    reference : {"B", "A"}
        Marginal whose entropy the minimal conditional entropy is subtracted
        from. ``"B"`` gives the standard quantity ``S(rho_B) - min H``, which
        is non-negative and vanishes on product states. ``"A"`` subtracts from
        ``S(rho_A)`` instead. The two agree whenever the marginals have equal
        entropy, which fails once qubit A is amplitude damped.

    Returns
    -------
    (j, angles) : the correlation in bits and the optimal measurement angles.
    """
    rho = _two_qubit(rho)
    if reference not in ("A", "B"):
        raise ValueError(f"reference must be 'A' or 'B', got {reference!r}")
    h, angles = minimise_conditional_entropy(rho)
    marginal = rho.ptrace([1] if reference == "B" else [0])
    j = von_neumann_entropy(marginal) - h
    if reference == "B":
        if j < -CLAMP_TOL:
            raise InvariantViolation(f"negative classical correlation {j:.3e}")
        j = max(j, 0.0)
    return j, angles


def quantum_discord(rho, reference: str = "B") -> float:
    """``I(A:B) - J(A:B)``, clamped to zero when within rounding of it."""
    return _discord(rho, reference)[0]


def _discord(rho, reference: str) -> tuple[float, float, float]:
    rho = _two_qubit(rho)
    i = mutual_information(rho)
    j, _ = classical_correlations(rho, reference)
    qd = i - j
    if -CLAMP_TOL <= qd < 0.0:
        qd = 0.0
    return qd, i, j


def correlation_report(rho, reference_state: DensityMatrix | None = None, discord_reference: str = "B") -> CorrelationReport:
    """All metrics for a two-qubit state; fidelity is taken against ``Phi+`` by default."""
    rho = _two_qubit(rho)
    ref = bell_state() if reference_state is None else reference_state
    qd, i, j = _discord(rho, discord_reference)
    c = concurrence(rho)
    return CorrelationReport(
        fidelity=fidelity_with_pure(ref, rho),
        qd=qd,
        eof=eof_from_concurrence(c),
        mutual_info=i,
        classical_info=j,
        concurrence=c,
    )
