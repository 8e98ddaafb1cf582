"""Density-matrix simulation of superdense coding over damping noise, with
five-qubit error correction, entanglement purification and correlation metrics."""

from .channels import KrausChannel, NoiseParams, amplitude_damping, composite_channel, phase_damping
from .errors import (
    DimensionMismatchError,
    InvalidChannelError,
    InvalidStateError,
    InvariantViolation,
    NegativeEigenvalueError,
    NotHermitianError,
    RankDeficientError,
)
from .experiments import ExperimentRecord, RegressionFit, fit_regression, sweep_noise_grid
from .metrics import CorrelationReport, correlation_report, entanglement_of_formation, quantum_discord
from .protocol import Message, ProtocolConfig, ProtocolResult, run_protocol
from .purification import PurificationAngles, adaptive_purify, dejmps_round, estimate_noise, optimize_angles
from .states import DensityMatrix, bell_state, fidelity, werner_state

__version__ = "0.1.0"

__all__ = [
    "CorrelationReport",
    "DensityMatrix",
    "DimensionMismatchError",
    "ExperimentRecord",
    "InvalidChannelError",
    "InvalidStateError",
    "InvariantViolation",
    "KrausChannel",
    "Message",
    "NegativeEigenvalueError",
    "NoiseParams",
    "NotHermitianError",
    "ProtocolConfig",
    "ProtocolResult",
    "PurificationAngles",
    "RankDeficientError",
    "RegressionFit",
    "adaptive_purify",
    "amplitude_damping",
    "bell_state",
    "composite_channel",
    "correlation_report",
    "dejmps_round",
    "entanglement_of_formation",
    "estimate_noise",
    "fidelity",
    "fit_regression",
    "optimize_angles",
    "phase_damping",
    "quantum_discord",
    "run_protocol",
    "sweep_noise_grid",
    "werner_state",
]
