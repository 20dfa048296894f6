"""Two-qubit phase-gate sequence from exchange pulses and z rotations.

The controlled-phase construction alternates two half exchange pulses
with single-qubit z rotations; composed in the standard computational
basis |q2 q1> it equals diag(1, 1, 1, -1) up to a global phase.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

_SZ = np.diag([0.5, -0.5])
_SP = np.array([[0.0, 1.0], [0.0, 0.0]])
_SM = _SP.T
_I2 = np.eye(2)


def _kron(a, b):
    return np.kron(a, b)


def rotation_z(qubit: int, angle: float) -> np.ndarray:
    """exp(-i angle S^z) on one qubit of a two-qubit register."""
    rz = expm(-1j * angle * _SZ)
    return _kron(rz, _I2) if qubit == 1 else _kron(_I2, rz)


def exchange_pulse(theta: float) -> np.ndarray:
    """exp(-i theta S1.S2): exchange evolution by the given angle."""
    h = (_kron(_SZ, _SZ)
         + 0.5 * (_kron(_SP, _SM) + _kron(_SM, _SP)))
    return expm(-1j * theta * h)


@dataclass
class PhaseGateReport:
    unitary: np.ndarray
    distance_to_cz: float
    global_phase: complex


def phase_gate_sequence() -> PhaseGateReport:
    """Compose the pulse sequence and report its distance to a CZ gate.

    Sequence (right to left): half exchange, qubit-1 pi z rotation, half
    exchange, then +-pi/2 z rotations on the two qubits.
    """
    u = (rotation_z(2, -np.pi / 2.0)
         @ rotation_z(1, np.pi / 2.0)
         @ exchange_pulse(np.pi / 2.0)
         @ rotation_z(1, np.pi)
         @ exchange_pulse(np.pi / 2.0))
    cz = np.diag([1.0, 1.0, 1.0, -1.0])
    # strip the global phase using the largest-magnitude entry
    k = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    phase = u[k] / cz[k]
    dist = float(np.max(np.abs(u / phase - cz)))
    return PhaseGateReport(u, dist, complex(phase))
