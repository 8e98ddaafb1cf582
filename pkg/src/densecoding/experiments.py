"""Noise-grid sweeps and least-squares regression of fidelity on QD and EoF."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channels import NoiseParams
from .errors import InvariantViolation, RankDeficientError
from .metrics import correlation_report
from .protocol import channel_capacity
from .purification import noisy_pair

CSV_HEADER = ("p", "q", "fidelity", "qd", "eof", "capacity")
DEFAULT_STEPS = 21
# Relative pivot tolerance for the centred normal equations.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ExperimentRecord:
    p: float
    q: float
    fidelity: float
    qd: float
    eof: float
    capacity: float

    def __post_init__(self):
        values = astuple(self)
        if not all(math.isfinite(v) for v in values):
            raise InvariantViolation(f"non-finite field in {self}")
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise InvariantViolation(f"(p, q) = ({self.p}, {self.q}) outside the unit square")
        if self.qd < 0.0:
            raise InvariantViolation(f"negative discord {self.qd}")


@dataclass(frozen=True)
class RegressionFit:
    alpha: float
    beta_qd: float
    beta_eof: float
    r2: float
    mse: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def evaluate_point(p: float, q: float, discord_reference: str = "A") -> ExperimentRecord:
    """Send ``Phi+`` through the composite channel at ``(p, q)`` and record its metrics."""
    rho = noisy_pair(NoiseParams(p, q))
    rep = correlation_report(rho, discord_reference=discord_reference)
    return ExperimentRecord(p, q, rep.fidelity, rep.qd, rep.eof, channel_capacity(rho))


def sweep_noise_grid(p_steps: int = DEFAULT_STEPS, q_steps: int = DEFAULT_STEPS,
                     discord_reference: str = "A") -> list[ExperimentRecord]:
    """Evaluate the uniform ``p_steps x q_steps`` grid over [0, 1]^2.

    Records are ordered row-major with p as the outer index. Discord uses the
    ``discord_reference`` convention of :func:`metrics.classical_correlations`;
    the default ``"A"`` conditions on the measured qubit's own marginal.
    """
    if p_steps < 2 or q_steps < 2:
        raise ValueError("p_steps and q_steps must both be at least 2")
    ps = np.linspace(0.0, 1.0, p_steps)
    qs = np.linspace(0.0, 1.0, q_steps)
    return [evaluate_point(float(p), float(q), discord_reference) for p in ps for q in qs]


def fit_regression(records: Sequence[ExperimentRecord]) -> RegressionFit:
    """Ordinary least squares for ``fidelity = alpha + beta_qd QD + beta_eof EoF``.

    Regressors and target are centred before solving the 2x2 normal equations,
    and the intercept is recovered from the means.

    Raises
    ------
    ValueError
        Fewer than three records.
    RankDeficientError
        The centred regressors are collinear (or one is constant).
    """
    if len(records) < 3:
        raise ValueError(f"need at least 3 records, got {len(records)}")
    x = np.array([[r.qd, r.eof] for r in records], dtype=float)
    y = np.array([r.fidelity for r in records], dtype=float)
    x_mean, y_mean = x.mean(axis=0), y.mean()
    xc, yc = x - x_mean, y - y_mean

    gram = xc.T @ xc
    scale = np.sqrt(np.diag(gram))
    if np.any(scale == 0.0):
        raise RankDeficientError("a regressor is constant across the records")
    corr = gram / np.outer(scale, scale)
    if 1.0 - abs(corr[0, 1]) < RANK_TOL:
        raise RankDeficientError("QD and EoF are collinear across the records")

    beta = np.linalg.solve(gram, xc.T @ yc)
    alpha = y_mean - x_mean @ beta
    resid = yc - xc @ beta
    ss_res = float(resid @ resid)
    ss_tot = float(yc @ yc)
    # a constant target is fitted exactly by the intercept alone
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RegressionFit(float(alpha), float(beta[0]), float(beta[1]), float(r2), ss_res / len(y))


# -- CSV ----------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(v, ".17g")


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def write_csv(records: Iterable[ExperimentRecord], path) -> None:
    Path(path).write_bytes(records_to_csv(records).encode("ascii"))


def parse_csv(text: str) -> list[ExperimentRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(h.strip() for h in rows[0]) != CSV_HEADER:
        raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"line {n}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        try:
            out.append(ExperimentRecord(*(float(v) for v in row)))
        except (ValueError, InvariantViolation) as exc:
            raise ValueError(f"line {n}: {exc}") from exc
    return out


def read_csv(path) -> list[ExperimentRecord]:
    return parse_csv(Path(path).read_text(encoding="ascii"))
