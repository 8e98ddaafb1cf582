"""Five-qubit perfect code simulated on density matrices.

Qubit roles are passed explicitly: ``code_qubits`` lists the five physical
qubits (the first carries the logical input before encoding) and
``ancilla_qubits`` the four syndrome-extraction qubits. Syndrome bit ``i``
is 1 when the state sits in the -1 eigenspace of generator ``i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .errors import InvalidStateError, InvariantViolation
from .states import DensityMatrix, coerce

PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

GENERATOR_LABELS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
N_CODE = 5
N_CHECKS = 4
ANCILLA_TOL = 1e-9

Syndrome = tuple  # four ints in {0, 1}


@dataclass(frozen=True)
class PauliString:
    ops: str
    phase: complex = 1

    def __post_init__(self):
        if any(c not in PAULIS for c in self.ops):
            raise ValueError(f"invalid Pauli string {self.ops!r}")
        if self.phase not in (1, -1, 1j, -1j):
            raise ValueError(f"phase must be one of +-1, +-i, got {self.phase}")

    def __len__(self) -> int:
        return len(self.ops)

    @classmethod
    def single(cls, pauli: str, qubit: int, n: int = N_CODE) -> "PauliString":
        ops = ["I"] * n
        ops[qubit] = pauli
        return cls("".join(ops))

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.ops)

    def commutes_with(self, other: "PauliString") -> bool:
        clashes = sum(a != "I" and b != "I" and a != b for a, b in zip(self.ops, other.ops))
        return clashes % 2 == 0

    def matrix(self) -> np.ndarray:
        return self.phase * linalg.kron(*(PAULIS[c] for c in self.ops))

    def __str__(self) -> str:
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return sign + self.ops


IDENTITY = PauliString("I" * N_CODE)


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    generators: tuple
    logical_x: PauliString
    logical_z: PauliString
    syndrome_table: dict

    def syndrome_of(self, error: PauliString) -> Syndrome:
        return tuple(int(not g.commutes_with(error)) for g in self.generators)

    def correction(self, syndrome: Sequence[int]) -> PauliString:
        return self.syndrome_table[tuple(int(b) for b in syndrome)]

    def syndrome_projector(self, syndrome: Sequence[int]) -> np.ndarray:
        """Projector onto the joint eigenspace with generator signs ``(-1)**bit``."""
        d = 2**N_CODE
        proj = np.eye(d, dtype=complex)
        for g, bit in zip(self.generators, syndrome):
            proj = proj @ (np.eye(d) + (-1) ** int(bit) * g.matrix()) / 2
        return proj

    def codespace_projector(self) -> np.ndarray:
        return self.syndrome_projector((0,) * N_CHECKS)

    def logical_basis(self) -> tuple[np.ndarray, np.ndarray]:
        zero = np.zeros(2**N_CODE, dtype=complex)
        zero[0] = 1.0
        k0 = self.codespace_projector() @ zero
        k0 /= np.linalg.norm(k0)
        k1 = self.logical_x.matrix() @ k0
        return k0, k1

    def encoding_unitary(self) -> np.ndarray:
        return _encoding_unitary(self)


def _syndrome_table(generators: Sequence[PauliString]) -> dict:
    table = {(0,) * N_CHECKS: IDENTITY}
    for q in range(N_CODE):
        for p in "XYZ":
            err = PauliString.single(p, q)
            s = tuple(int(not g.commutes_with(err)) for g in generators)
            if s in table:
                raise InvariantViolation(f"syndrome {s} of {err} collides with {table[s]}")
            table[s] = err
    return table


@lru_cache(maxsize=None)
def build_code() -> StabilizerCode:
    """The [[5,1,3]] code with generators XZZXI, IXZZX, XIXZZ, ZXIXZ."""
    gens = tuple(PauliString(s) for s in GENERATOR_LABELS)
    for a, b in itertools.combinations(gens, 2):
        if not a.commutes_with(b):
            raise InvariantViolation(f"generators {a} and {b} anticommute")
    return StabilizerCode(
        generators=gens,
        logical_x=PauliString("X" * N_CODE),
        logical_z=PauliString("Z" * N_CODE),
        syndrome_table=_syndrome_table(gens),
    )


@lru_cache(maxsize=None)
def _encoding_unitary(code: StabilizerCode) -> np.ndarray:
    # column |b, s> -> E_s |b_L>, where E_s is the correction for syndrome s.
    # The 16 error cosets of a perfect code tile the 32-dim space, so this is unitary.
    k0, k1 = code.logical_basis()
    u = np.zeros((2**N_CODE, 2**N_CODE), dtype=complex)
    for b, ket in enumerate((k0, k1)):
        for s in itertools.product((0, 1), repeat=N_CHECKS):
            col = b * 2**N_CHECKS + int("".join(map(str, s)), 2)
            u[:, col] = code.correction(s).matrix() @ ket
    err = np.max(np.abs(u.conj().T @ u - np.eye(2**N_CODE)))
    if err > 1e-10:
        raise InvariantViolation(f"encoding map is not unitary (error {err:.3e})")
    u.setflags(write=False)
    return u


def _code_register(rho: DensityMatrix, code_qubits: Sequence[int]) -> list[int]:
    code_qubits = linalg.check_targets(code_qubits, rho.num_qubits)
    if len(code_qubits) != N_CODE:
        raise ValueError(f"expected {N_CODE} code qubits, got {len(code_qubits)}")
    return code_qubits


def _require_zero(rho: DensityMatrix, qubits: Sequence[int], what: str) -> None:
    pop = np.real(np.trace(linalg.project_out(rho.matrix, qubits, [0] * len(qubits), rho.num_qubits)))
    if abs(pop - 1.0) > ANCILLA_TOL:
        raise InvalidStateError(f"{what} are not in |0> (population {pop:.6f})")


def encode(rho, code_qubits: Sequence[int] = (0, 1, 2, 3, 4), code: StabilizerCode | None = None) -> DensityMatrix:
    """Encode the logical qubit held on ``code_qubits[0]``.

    ``code_qubits[1:]`` must be fresh qubits in |0>; other qubits (for
    example the partner of a Bell pair) are left untouched.
    """
    rho = coerce(rho)
    code = code or build_code()
    code_qubits = _code_register(rho, code_qubits)
    _require_zero(rho, code_qubits[1:], "encoding ancillas")
    return DensityMatrix(linalg.conjugate(rho.matrix, code.encoding_unitary(), code_qubits, rho.num_qubits))


def encode_logical(logical, code: StabilizerCode | None = None) -> DensityMatrix:
    """Encode a single-qubit state into a fresh five-qubit block."""
    logical = coerce(logical)
    m = linalg.insert_zero_qubits(logical.matrix, 1, N_CHECKS, logical.num_qubits)
    return encode(DensityMatrix(m), code=code)


def decode(rho, code_qubits: Sequence[int] = (0, 1, 2, 3, 4), discard: bool = True,
           code: StabilizerCode | None = None) -> DensityMatrix:
    """Invert the encoder; with ``discard`` the four freed qubits are traced out.

    The logical qubit stays at the position of ``code_qubits[0]`` among the
    remaining qubits.
    """
    rho = coerce(rho)
    code = code or build_code()
    code_qubits = _code_register(rho, code_qubits)
    m = linalg.conjugate(rho.matrix, code.encoding_unitary().conj().T, code_qubits, rho.num_qubits)
    if not discard:
        return DensityMatrix(m)
    drop = set(code_qubits[1:])
    keep = [q for q in range(rho.num_qubits) if q not in drop]
    return DensityMatrix(linalg.partial_trace(m, [2] * rho.num_qubits, keep))


def apply_pauli(rho, pauli: PauliString, qubits: Sequence[int]) -> DensityMatrix:
    rho = coerce(rho)
    m = rho.matrix
    for q, c in zip(qubits, pauli.ops):
        if c != "I":
            m = linalg.conjugate(m, PAULIS[c], [q], rho.num_qubits)
    return DensityMatrix(m)


def correct(rho, syndrome: Sequence[int], code_qubits: Sequence[int] = (0, 1, 2, 3, 4),
            code: StabilizerCode | None = None) -> DensityMatrix:
    code = code or build_code()
    return apply_pauli(rho, code.correction(syndrome), code_qubits)


def syndrome_probabilities(rho, code_qubits: Sequence[int] = (0, 1, 2, 3, 4),
                           code: StabilizerCode | None = None) -> dict:
    """Outcome distribution of the four stabilizer checks, from projectors directly."""
    rho = coerce(rho)
    code = code or build_code()
    code_qubits = _code_register(rho, code_qubits)
    out = {}
    for s in itertools.product((0, 1), repeat=N_CHECKS):
        proj = code.syndrome_projector(s)
        branch = linalg.conjugate(rho.matrix, proj, code_qubits, rho.num_qubits)
        out[s] = float(np.real(np.trace(branch)))
    return out


def recover(rho, code_qubits: Sequence[int] = (0, 1, 2, 3, 4), code: StabilizerCode | None = None) -> DensityMatrix:
    """Syndrome measurement plus correction averaged over all outcomes.

    This is the deterministic channel ``sum_s C_s P_s rho P_s C_s^dag`` and
    needs no ancilla qubits.
    """
    rho = coerce(rho)
    code = code or build_code()
    code_qubits = _code_register(rho, code_qubits)
    n = rho.num_qubits
    out = np.zeros_like(rho.matrix)
    for s in itertools.product((0, 1), repeat=N_CHECKS):
        op = code.correction(s).matrix() @ code.syndrome_projector(s)
        out += linalg.conjugate(rho.matrix, op, code_qubits, n)
    return DensityMatrix(out)


def _controlled(p: np.ndarray) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = p
    return u


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def extraction_circuit(rho, code_qubits: Sequence[int], ancilla_qubits: Sequence[int],
                       code: StabilizerCode | None = None) -> DensityMatrix:
    """Couple each generator to its ancilla (H, controlled-Pauli string, H)."""
    rho = coerce(rho)
    code = code or build_code()
    n = rho.num_qubits
    code_qubits = _code_register(rho, code_qubits)
    ancilla_qubits = linalg.check_targets(ancilla_qubits, n)
    if len(ancilla_qubits) != N_CHECKS:
        raise ValueError(f"expected {N_CHECKS} ancilla qubits, got {len(ancilla_qubits)}")
    if set(ancilla_qubits) & set(code_qubits):
        raise ValueError("ancilla and code qubits overlap")
    _require_zero(rho, ancilla_qubits, "syndrome ancillas")
    m = rho.matrix
    for g, a in zip(code.generators, ancilla_qubits):
        m = linalg.conjugate(m, _H, [a], n)
        for q, c in zip(code_qubits, g.ops):
            if c != "I":
                m = linalg.conjugate(m, _controlled(PAULIS[c]), [a, q], n)
        m = linalg.conjugate(m, _H, [a], n)
    return DensityMatrix(m)


def syndrome_branches(rho, code_qubits: Sequence[int], ancilla_qubits: Sequence[int],
                      code: StabilizerCode | None = None) -> dict:
    """Every ancilla outcome with its probability and unnormalised post-measurement
    matrix (ancillas removed)."""
    coupled = extraction_circuit(rho, code_qubits, ancilla_qubits, code)
    out = {}
    for s in itertools.product((0, 1), repeat=N_CHECKS):
        block = linalg.project_out(coupled.matrix, ancilla_qubits, s, coupled.num_qubits)
        out[s] = (float(np.real(np.trace(block))), block)
    return out


def measure_syndrome(rho, code_qubits: Sequence[int] = (0, 1, 2, 3, 4),
                     ancilla_qubits: Sequence[int] = (5, 6, 7, 8), seed=None,
                     code: StabilizerCode | None = None) -> tuple[Syndrome, DensityMatrix]:
    """Run the extraction circuit, sample the ancilla readout and collapse.

    Returns the syndrome and the normalised post-measurement state with the
    ancillas removed. ``seed`` may be an int or a ``numpy`` Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    branches = syndrome_branches(rho, code_qubits, ancilla_qubits, code)
    keys = list(branches)
    probs = np.clip([branches[k][0] for k in keys], 0.0, None)
    probs = probs / probs.sum()
    s = keys[int(rng.choice(len(keys), p=probs))]
    prob, block = branches[s]
    return s, DensityMatrix(block / prob)


def remaining_positions(num_qubits: int, removed: Sequence[int]) -> dict:
    """Map old qubit index to new index after ``removed`` qubits are dropped."""
    removed = set(removed)
    kept = [q for q in range(num_qubits) if q not in removed]
    return {q: i for i, q in enumerate(kept)}


@dataclass(frozen=True)
class ExhaustiveCheck:
    total: int
    corrected: int
    distinct_syndromes: int
    min_fidelity: float
    syndromes: dict

    @property
    def all_corrected(self) -> bool:
        return self.corrected == self.total and self.distinct_syndromes == self.total


def single_qubit_errors() -> list[PauliString]:
    """The 15 weight-one Paulis on the five code qubits, qubit-major, X/Y/Z order."""
    return [PauliString.single(c, q) for q in range(N_CODE) for c in "XYZ"]


def exhaustive_single_qubit_check(threshold: float = 1 - 1e-9, seed: int = 0) -> ExhaustiveCheck:
    """Encode Alice's half of ``Phi+``, inject each single-qubit Pauli, recover.

    Runs the full 10-qubit register (five code qubits, four ancillas, Bob),
    reading the syndrome from the ancilla circuit, then corrects, decodes and
    compares against ``Phi+``.
    """
    from .states import bell_state

    code = build_code()
    rng = np.random.default_rng(seed)
    pair = bell_state()
    encoded = encode(DensityMatrix(linalg.insert_zero_qubits(pair.matrix, 1, N_CODE - 1, 2)), code=code)
    register = DensityMatrix(linalg.insert_zero_qubits(encoded.matrix, N_CODE, N_CHECKS, N_CODE + 1))
    code_qubits = tuple(range(N_CODE))
    ancillas = tuple(range(N_CODE, N_CODE + N_CHECKS))

    syndromes, corrected, worst = {}, 0, 1.0
    for err in single_qubit_errors():
        noisy = apply_pauli(register, err, code_qubits)
        s, post = measure_syndrome(noisy, code_qubits, ancillas, seed=rng, code=code)
        out = decode(correct(post, s, code_qubits, code), code_qubits)
        f = float(np.real(np.trace(pair.matrix @ out.matrix)))
        syndromes[err.ops] = s
        worst = min(worst, f)
        corrected += f >= threshold and any(s)
    distinct = len(set(syndromes.values()))
    return ExhaustiveCheck(len(syndromes), corrected, distinct, worst, syndromes)
